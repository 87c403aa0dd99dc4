#pragma once

// Batch front end: construct | verify | search | obstruct | demo.

#include <iosfwd>
#include <string>
#include <vector>

namespace hypertuple::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInvalidInput = 2,
  kBudgetExhausted = 3,
  kInvariantFailure = 4,
};

/// Runs one subcommand. args excludes the program name. Human-readable
/// reports go to `out`, diagnostics to `err`; artifacts are written to the
/// files named by the flags (temp file + rename).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes `contents` to `path` through a sibling temporary and a rename.
void write_atomically(const std::string& path, const std::string& contents);

/// "1,-2.5,3" -> {1, -2.5, 3}. Throws ParseError on junk.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace hypertuple::cli
