#include "hypertuple/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "CLI11.hpp"

#include "hypertuple/construction.hpp"
#include "hypertuple/density_search.hpp"
#include "hypertuple/errors.hpp"
#include "hypertuple/obstructions.hpp"
#include "hypertuple/serialization.hpp"

namespace hypertuple::cli {

namespace {

struct Options {
  int n = 2;
  int p1 = 1;
  int p2 = 0;
  std::uint64_t seed = 0;
  double det_tol = 1e-6;
  double residual_tol = 1e-8;
  std::string in;
  std::string out;
  std::string report;
  std::string target;
  double eps = 0.1;
  long long ell_max = 1000000;
  std::string mode;
  std::string y;
  std::string gammas;
  std::string matrix;
  std::string x;
  double margin = 0.0;
  int grid_bound = 20;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_number_list(row));
  if (rows.empty()) throw ParseError("matrix: no rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ParseError("matrix: rows must have equal length");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void print_checks(const std::vector<InvariantCheck>& checks, std::ostream& out) {
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(20) << c.name << std::right << " value "
        << std::setprecision(6) << c.value << "  threshold " << c.threshold;
    if (!c.detail.empty()) out << "  (" << c.detail << ")";
    out << "\n";
  }
}

bool all_passed(const std::vector<InvariantCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
}

int cmd_construct(const Options& o, std::ostream& out) {
  ConstructionParams params;
  params.shape = Shape{o.n, o.p1, o.p2};
  params.seed = o.seed;
  params.det_tol = o.det_tol;
  params.residual_tol = o.residual_tol;
  validate_shape(params.shape);

  const UConstruction built = build_u_system_detailed(params);
  const TupleRealization r = assemble_tuple(built.system, params);
  const auto checks = check_realization(r);

  out << "constructed n=" << o.n << " p1=" << o.p1 << " p2=" << o.p2 << " seed=" << o.seed << ": "
      << r.tuple.k() << " operators\n";
  out << "det " << built.report.det << ", residual " << built.report.residual << ", c_n = 2^"
      << built.report.cn_exponent << " sqrt(p)\n";
  print_checks(checks, out);
  if (!all_passed(checks)) return kInvariantFailure;

  if (!o.out.empty()) {
    write_atomically(o.out, dump(realization_to_json(r)));
    out << "wrote " << o.out << "\n";
  }
  if (!o.report.empty()) {
    Json rep = checks_to_json(checks);
    rep["construction"] = report_to_json(built.report);
    write_atomically(o.report, dump(rep));
  }
  return kSuccess;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const Json doc = read_json_file(o.in);
  const TupleRealization r = realization_from_json(doc);
  auto checks = check_realization(r);
  const bool same = realization_to_json(r) == doc;
  checks.push_back({"round_trip", same, same ? 0.0 : 1.0, 0.0, "re-serialization reproduces the file"});
  print_checks(checks, out);
  if (!o.report.empty()) write_atomically(o.report, dump(checks_to_json(checks)));
  return all_passed(checks) ? kSuccess : kInvariantFailure;
}

int cmd_search(const Options& o, std::ostream& out) {
  const TupleRealization r = realization_from_json(read_json_file(o.in));
  ApproxRequest req;
  req.target = to_vector(parse_number_list(o.target));
  req.epsilon = o.eps;
  req.ell_max = o.ell_max;

  ApproxResult res;
  try {
    res = orbit_target_search(r, req);
  } catch (const SearchBudgetError& e) {
    const Json diag{{"format", kFormatVersion},
                    {"status", "budget_exhausted"},
                    {"message", e.what()},
                    {"best_error", e.best_error()},
                    {"best_ell", e.best_ell()},
                    {"ell_max", o.ell_max},
                    {"epsilon", o.eps}};
    out << dump(diag);
    if (!o.out.empty()) write_atomically(o.out, dump(diag));
    return kBudgetExhausted;
  }
  out << "m* =";
  for (auto v : res.m.values()) out << " " << v;
  out << "\nell " << res.ell << ", orbit error " << res.achieved_error << " < " << o.eps
      << (res.verified ? " (rechecked with explicit products)" : " (NOT verified)") << "\n";
  if (res.perturbed) out << "zero target entries were shifted to " << res.searched_target.transpose() << "\n";
  if (!o.out.empty()) write_atomically(o.out, dump(result_to_json(res)));
  return res.verified ? kSuccess : kInvariantFailure;
}

int cmd_obstruct(const Options& o, std::ostream& out) {
  Json cert;
  if (o.mode == "ell") {
    const EllCertificate c = ell_certificate(to_vector(parse_number_list(o.y)));
    cert = ell_certificate_to_json(c);
    out << "required ell = " << c.required_ell << " < 0: " << (c.infeasible ? "unreachable" : "no certificate") << "\n";
  } else if (o.mode == "block3") {
    const std::vector<double> g = parse_number_list(o.gammas);
    const Vector y = to_vector(parse_number_list(o.y));
    const double gap = block3_empirical_gap(g, y, o.grid_bound);
    cert = block3_gap_to_json(g, y, o.grid_bound, gap);
    out << "min distance to w over m in [0," << o.grid_bound << "]^" << g.size() << ": " << gap << "\n";
  } else if (o.mode == "cone") {
    const Matrix L = parse_matrix(o.matrix);
    const Vector x = to_vector(parse_number_list(o.x));
    const ConeCertificate c = cone_certificate(L, x, o.margin);
    cert = cone_certificate_to_json(c, L, x);
    out << "gap lower bound " << c.gap_lower_bound << " (sigma_min " << c.sigma_min << ", orthant distance "
        << c.negative_margin << ")\n";
  } else {
    throw DomainError("obstruct: --mode must be ell, cone or block3");
  }
  if (!o.out.empty()) write_atomically(o.out, dump(cert));
  return kSuccess;
}

int cmd_demo(std::ostream& out) {
  ConstructionParams params;
  params.shape = Shape{2, 1, 0};
  params.seed = 7;
  const UConstruction built = build_u_system_detailed(params);
  const TupleRealization r = assemble_tuple(built.system, params);
  out << "1. A hypercyclic triple of 2x2 Jordan blocks (seed 7):\n";
  for (int nu = 0; nu < 3; ++nu) out << "   gamma_" << nu + 1 << " = " << r.grid.gamma()(0, nu) << "\n";
  out << "   c = (" << r.usystem.coeffs()[0] << ", " << r.usystem.coeffs()[1] << "), u_3 = -(c1 u1 + c2 u2) to "
      << built.report.residual << "\n";

  const auto checks = check_realization(r);
  out << "2. Invariants: " << (all_passed(checks) ? "all pass" : "FAILURES") << "\n";

  out << "3. Steering the orbit of w = (0, 1):\n";
  for (const auto& t : {std::vector<double>{1.0, -1.0}, std::vector<double>{-2.0, 0.5}, std::vector<double>{1.0, 0.0}}) {
    ApproxRequest req{to_vector(t), 0.25, 1000000};
    const ApproxResult res = orbit_target_search(r, req);
    out << "   target (" << t[0] << ", " << t[1] << "): m* = (" << res.m[0] << ", " << res.m[1] << ", " << res.m[2]
        << "), error " << res.achieved_error << (res.verified ? " [verified]" : "") << "\n";
  }

  const Vector y = (Vector(3) << 0.0, 0.0, 1.0).finished();
  const EllCertificate ell = ell_certificate(y);
  out << "4. A single 3x3 block is never hypercyclic: reaching w needs lim sum m/gamma^2 = " << ell.required_ell
      << "\n";
  const std::vector<double> g{2.0};
  out << "   empirical gap for gamma = 2 over m <= 50: " << block3_empirical_gap(g, y, 50) << "\n";
  return all_passed(checks) ? kSuccess : kInvariantFailure;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("not a number: \"" + item + "\"");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) throw ParseError("not a number: \"" + item + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw ParseError("empty number list");
  return out;
}

void write_atomically(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ParseError("cannot write " + tmp.string());
    f << contents;
    f.flush();
    if (!f) throw ParseError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ParseError("cannot move output into place: " + ec.message());
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hypercyclic tuples of Jordan-form matrices"};
  app.require_subcommand(1);
  Options o;

  auto* construct = app.add_subcommand("construct", "Build a hypercyclic (n+1)-tuple and write it as JSON");
  construct->add_option("--n", o.n, "Dimension")->required();
  construct->add_option("--p1", o.p1, "Number of 2x2 blocks")->required();
  construct->add_option("--p2", o.p2, "Number of 1x1 blocks")->required();
  construct->add_option("--seed", o.seed, "Seed for the arbitrary positive entries");
  construct->add_option("--det-tol", o.det_tol, "Minimum |det(u_1..u_n)|");
  construct->add_option("--residual-tol", o.residual_tol, "Maximum ||u_{n+1} + sum c u||");
  construct->add_option("--out", o.out, "Realization file");
  construct->add_option("--report", o.report, "Validation report file");

  auto* verify = app.add_subcommand("verify", "Re-check every invariant of a realization file");
  verify->add_option("--in", o.in, "Realization file")->required();
  verify->add_option("--report", o.report, "Report file");

  auto* search = app.add_subcommand("search", "Find m with ||T^m w - x|| < eps");
  search->add_option("--in", o.in, "Realization file")->required();
  search->add_option("--target", o.target, "Comma-separated target x")->required();
  search->add_option("--eps", o.eps, "Tolerance");
  search->add_option("--ell-max", o.ell_max, "Kronecker budget");
  search->add_option("--out", o.out, "Result file");

  auto* obstruct = app.add_subcommand("obstruct", "Certificates for unreachable targets");
  obstruct->add_option("--mode", o.mode, "ell, cone or block3")->required()->check(CLI::IsMember({"ell", "cone", "block3"}));
  obstruct->add_option("--y", o.y, "Comma-separated y (ell, block3)");
  obstruct->add_option("--gammas", o.gammas, "Comma-separated eigenvalues (block3)");
  obstruct->add_option("--grid-bound", o.grid_bound, "Largest exponent scanned (block3)");
  obstruct->add_option("--matrix", o.matrix, "Rows separated by ';', entries by ',' (cone)");
  obstruct->add_option("--x", o.x, "Comma-separated target (cone)");
  obstruct->add_option("--margin", o.margin, "Required depth below zero (cone)");
  obstruct->add_option("--out", o.out, "Certificate file");

  auto* demo = app.add_subcommand("demo", "The n = 2 story end to end");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInvalidInput;
  }

  try {
    if (construct->parsed()) return cmd_construct(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (search->parsed()) return cmd_search(o, out);
    if (obstruct->parsed()) return cmd_obstruct(o, out);
    if (demo->parsed()) return cmd_demo(out);
  } catch (const ShapeError& e) {
    err << Json{{"error", "invalid_input"}, {"message", e.what()}}.dump() << "\n";
    return kInvalidInput;
  } catch (const DomainError& e) {
    err << Json{{"error", "invalid_input"}, {"message", e.what()}}.dump() << "\n";
    return kInvalidInput;
  } catch (const ParseError& e) {
    err << Json{{"error", "parse_error"}, {"message", e.what()}}.dump() << "\n";
    return kInvalidInput;
  } catch (const SearchBudgetError& e) {
    err << Json{{"error", "budget_exhausted"}, {"message", e.what()}, {"best_error", e.best_error()}}.dump() << "\n";
    return kBudgetExhausted;
  } catch (const std::exception& e) {
    err << Json{{"error", "failure"}, {"message", e.what()}}.dump() << "\n";
    return kInvariantFailure;
  }
  return kInvalidInput;
}

}  // namespace hypertuple::cli
