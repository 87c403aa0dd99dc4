#pragma once

#include <stdexcept>
#include <string>

namespace hypertuple {

/// Input outside the mathematical domain of an operation (zero eigenvalue,
/// non-positive root parameter, zero target entry, singular certificate matrix).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mismatched lengths or grid shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or lost too much accuracy.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The tuple construction could not meet its tolerances within its retry caps.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Kronecker scan exhausted its budget. Carries the best candidate seen.
class SearchBudgetError : public std::runtime_error {
 public:
  SearchBudgetError(const std::string& what, double best_error, long long best_ell)
      : std::runtime_error(what), best_error_(best_error), best_ell_(best_ell) {}

  /// Smallest upper bound on the lattice error seen during the scan.
  double best_error() const noexcept { return best_error_; }
  long long best_ell() const noexcept { return best_ell_; }

 private:
  double best_error_;
  long long best_ell_;
};

/// A malformed serialized document.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hypertuple
