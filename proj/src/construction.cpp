#include "hypertuple/construction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "hypertuple/errors.hpp"
#include "hypertuple/rng.hpp"

namespace hypertuple {

namespace {

constexpr int kFirstCnExponent = 4;
constexpr int kLastCnExponent = 60;
constexpr int kMaxAuxDoublings = 200;
constexpr double kRootResidualTol = 1e-10;
// |log delta| allowed for the entry solved to make det = 1.
constexpr double kMaxFreeLog = 2.0;

double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

// (c+1) y - log(delta1 e^y + delta2 c), strictly increasing with slope in (c, c+1).
double root_objective(double c, double log_delta1, double log_delta2, double y) {
  return (c + 1.0) * y - log_add_exp(log_delta1 + y, log_delta2 + std::log(c));
}

double root_slope(double c, double log_delta1, double log_delta2, double y) {
  const double share = std::exp(log_delta1 + y - log_add_exp(log_delta1 + y, log_delta2 + std::log(c)));
  return (c + 1.0) - share;
}

std::string shape_text(int p1, int p2) {
  return "(p1=" + std::to_string(p1) + ", p2=" + std::to_string(p2) + ")";
}

// Rows 0..n-2 carry u_1..u_{n-1} with the base-matrix sign rule (minus at
// nu == b); the last row is (0,1,...,0,1,0,...,0).
Matrix assemble_base(int p1, int p2, const Matrix& a, const Matrix& delta) {
  const int n = 2 * p1 + p2;
  Matrix m = Matrix::Zero(n, n);
  for (int nu = 0; nu < n - 1; ++nu) {
    for (int b = 0; b < p1; ++b) {
      const double s = (nu == b) ? -1.0 : 1.0;
      m(nu, 2 * b) = std::log(a(b, nu));
      m(nu, 2 * b + 1) = s / a(b, nu);
    }
    for (int b = 0; b < p2; ++b) m(nu, 2 * p1 + b) = std::log(delta(b, nu));
  }
  for (int b = 0; b < p1; ++b) m(n - 1, 2 * b + 1) = 1.0;
  return m;
}

BaseMatrix make_base(int p1, int p2, Matrix a, Matrix delta) {
  BaseMatrix out;
  out.shape = Shape{2 * p1 + p2, p1, p2};
  out.matrix = assemble_base(p1, p2, a, delta);
  out.a = std::move(a);
  out.delta = std::move(delta);
  out.det = determinant(out.matrix);
  return out;
}

BaseMatrix base_recursive(int p1, int p2, Rng& rng, double det_tol, int max_retries) {
  if (p1 == 1 && p2 == 0) {
    for (int attempt = 0; attempt < max_retries; ++attempt) {
      Matrix a(1, 1);
      a(0, 0) = rng.positive();
      BaseMatrix base = make_base(1, 0, std::move(a), Matrix(0, 1));
      if (std::abs(base.det) >= det_tol) return base;
    }
    throw ConstructionError("build_base_matrix: base case " + shape_text(1, 0) + " kept drawing a = 1");
  }

  const int n = 2 * p1 + p2;
  if (p2 >= 1) {
    // Grow a 1-block. Only log delta_{n-1}^(p2) is free and det is affine in it.
    // A free entry far from 1 would poison the conditioning of every later
    // step, so it is capped at |log delta| <= kMaxFreeLog. A failed level
    // redraws the smaller matrix as well.
    for (int attempt = 0; attempt < max_retries; ++attempt) {
      const BaseMatrix prev = base_recursive(p1, p2 - 1, rng, det_tol, max_retries);
      Matrix a(p1, n - 1);
      Matrix delta(p2, n - 1);
      a.leftCols(n - 2) = prev.a;
      if (p2 > 1) delta.topLeftCorner(p2 - 1, n - 2) = prev.delta;
      for (int b = 0; b < p1; ++b) a(b, n - 2) = rng.positive();
      for (int b = 0; b < p2 - 1; ++b) delta(b, n - 2) = rng.positive();
      for (int nu = 0; nu < n - 2; ++nu) delta(p2 - 1, nu) = rng.positive();

      delta(p2 - 1, n - 2) = 1.0;
      const double at0 = determinant(assemble_base(p1, p2, a, delta));
      delta(p2 - 1, n - 2) = std::exp(1.0);
      const double slope = determinant(assemble_base(p1, p2, a, delta)) - at0;
      if (std::abs(slope) < det_tol) continue;
      // det = 1 when that keeps delta moderate; otherwise the admissible
      // endpoint with the larger |det|.
      double log_free = (1.0 - at0) / slope;
      if (!std::isfinite(log_free) || std::abs(log_free) > kMaxFreeLog) {
        log_free = (at0 * slope >= 0.0) ? kMaxFreeLog : -kMaxFreeLog;
      }
      delta(p2 - 1, n - 2) = std::exp(log_free);
      BaseMatrix base = make_base(p1, p2, std::move(a), std::move(delta));
      if (std::abs(base.det) >= det_tol) return base;
    }
    throw ConstructionError("build_base_matrix: no admissible free entry log delta for " + shape_text(p1, p2));
  }

  // p2 == 0: the 1-block of (p1-1, 1) becomes the p1-th 2-block.
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const BaseMatrix prev = base_recursive(p1 - 1, 1, rng, det_tol, max_retries);
    Matrix a(p1, n - 1);
    a.topLeftCorner(p1 - 1, n - 2) = prev.a;
    a.block(p1 - 1, 0, 1, n - 2) = prev.delta;
    for (int b = 0; b < p1 - 1; ++b) a(b, n - 2) = rng.positive();

    double best_det = 0.0;
    double best_a = 1.0;
    for (int step = -6; step <= 6; ++step) {
      a(p1 - 1, n - 2) = std::exp(0.5 * step);
      const double d = determinant(assemble_base(p1, 0, a, Matrix(0, n - 1)));
      if (std::abs(d) > std::abs(best_det)) {
        best_det = d;
        best_a = a(p1 - 1, n - 2);
      }
    }
    if (std::abs(best_det) < det_tol) continue;
    a(p1 - 1, n - 2) = best_a;
    return make_base(p1, 0, std::move(a), Matrix(0, n - 1));
  }
  throw ConstructionError("build_base_matrix: scan over a_{n-1} found no |det| >= det_tol for " + shape_text(p1, p2));
}

double surrogate_from(Rng& rng, int prime_index) {
  const std::uint64_t q = 1 + rng.below(8);
  const std::uint64_t r = 1 + rng.below(8);
  return irrational_surrogate(q, r, nth_prime(prime_index));
}

// Left side of the positivity condition for every 2-block:
// sum_{p1 < nu < n-1} c/a - sum_{nu < p1} c/a (0-based nu).
std::vector<double> aux_margins_of(const Shape& s, const Matrix& a, const Vector& coeffs) {
  std::vector<double> out(static_cast<std::size_t>(s.p1), 0.0);
  for (int b = 0; b < s.p1; ++b) {
    double v = 0.0;
    for (int nu = s.p1; nu < s.n - 1; ++nu) v += coeffs(nu) / a(b, nu);
    for (int nu = 0; nu < s.p1; ++nu) v -= coeffs(nu) / a(b, nu);
    out[static_cast<std::size_t>(b)] = v;
  }
  return out;
}

struct RowAux {
  double inv_tilde = 0.0;  // 1 / a~_{n+1}
  double log_hat = 0.0;    // log a^_{n+1}
};

// Auxiliaries for a row of entries x_0..x_{n-2}; minus_at < 0 means no signed term.
RowAux row_aux(const Vector& coeffs, const double* entries, int count, int minus_at) {
  RowAux aux;
  for (int nu = 0; nu < count; ++nu) {
    const double term = coeffs(nu) / entries[nu];
    aux.inv_tilde += (nu == minus_at) ? -term : term;
    aux.log_hat -= coeffs(nu) * std::log(entries[nu]);
  }
  return aux;
}

double min_omit_one(const Matrix& u) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < u.cols(); ++j) best = std::min(best, std::abs(determinant(drop_column(u, j))));
  return best;
}

double residual_of(const USystem& s) {
  const int n = s.shape().n;
  Vector r = s.u().col(n);
  for (int nu = 0; nu < n; ++nu) r += s.coeffs()(nu) * s.u().col(nu);
  return r.norm();
}

// Relative residuals of the defining root equations for a_n and delta_n.
double max_root_residual(const USystem& s) {
  const Shape& sh = s.shape();
  const int n = sh.n;
  const Vector& c = s.coeffs();
  double worst = 0.0;
  if (n == 2) {
    const double la1 = std::log(s.a()(0, 0));
    const double ld1 = std::log(c(0)) - (c(0) + 1.0) * la1;
    const double ld2 = -c(0) * la1;
    return std::abs(root_relative_residual(c(1), ld1, ld2, std::log(s.a()(0, 1))));
  }
  for (int b = 0; b < sh.p1; ++b) {
    Eigen::RowVectorXd row = s.a().row(b);
    const RowAux aux = row_aux(c, row.data(), n - 1, b);
    const double ld1 = aux.log_hat + std::log(aux.inv_tilde);
    worst = std::max(worst, std::abs(root_relative_residual(c(n - 1), ld1, aux.log_hat, std::log(s.a()(b, n - 1)))));
  }
  for (int b = 0; b < sh.p2; ++b) {
    Eigen::RowVectorXd row = s.delta().row(b);
    const RowAux aux = row_aux(c, row.data(), n - 1, -1);
    const double ld1 = aux.log_hat + std::log(aux.inv_tilde);
    worst = std::max(worst,
                     std::abs(root_relative_residual(c(n - 1), ld1, aux.log_hat, std::log(s.delta()(b, n - 1)))));
  }
  return worst;
}

bool all_positive_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return (m.array() > 0.0).all() && m.allFinite();
}

UConstruction build_two_dimensional(const ConstructionParams& params, Rng& rng) {
  const BaseMatrix base = build_base_matrix(1, 0, rng.below(std::numeric_limits<std::uint64_t>::max()),
                                            params.det_tol, params.max_retries);
  const double a1 = base.a(0, 0);
  const double la1 = std::log(a1);
  const double c1 = surrogate_from(rng, 0);
  const double ld1 = std::log(c1) - (c1 + 1.0) * la1;
  const double ld2 = -c1 * la1;

  for (int j = kFirstCnExponent; j <= kLastCnExponent; ++j) {
    const double c2 = std::ldexp(std::sqrt(static_cast<double>(nth_prime(1))), j);
    const RootSolution root = solve_root_log(c2, ld1, ld2);
    Matrix basis(2, 2);
    basis << la1, root.log_x, 1.0 / a1, std::exp(-root.log_x);
    const double det = determinant(basis);
    if (std::abs(det) < params.det_tol) continue;

    const double inv_a3 = c1 / a1 + c2 * std::exp(-root.log_x);
    Matrix a(1, 3);
    a << a1, std::exp(root.log_x), 1.0 / inv_a3;
    Vector coeffs(2);
    coeffs << c1, c2;
    USystem sys(params.shape, std::move(a), Matrix(0, 3), std::move(coeffs));
    ConstructionReport report;
    report.base_det = base.det;
    report.det = det;
    report.cn_exponent = j;
    return {std::move(sys), report};
  }
  throw ConstructionError("build_u_system: c_2 escalation reached 2^" + std::to_string(kLastCnExponent) +
                          " without |det| >= det_tol");
}

UConstruction build_general(const ConstructionParams& params, Rng& rng) {
  const Shape& s = params.shape;
  const int n = s.n;
  const BaseMatrix base = build_base_matrix(s.p1, s.p2, rng.below(std::numeric_limits<std::uint64_t>::max()),
                                            params.det_tol, params.max_retries);

  Vector coeffs = Vector::Zero(n);
  for (int nu = 0; nu < s.p1; ++nu) coeffs(nu) = surrogate_from(rng, nu);
  Vector kappa = Vector::Zero(n);
  for (int nu = s.p1; nu < n - 1; ++nu) kappa(nu) = surrogate_from(rng, nu);

  // Scale c_{p1+1}..c_{n-1} by t = 1, 2, 4, ... until the margin holds.
  double scale = 1.0;
  std::vector<double> margins;
  for (int doubling = 0;; ++doubling) {
    for (int nu = s.p1; nu < n - 1; ++nu) coeffs(nu) = scale * kappa(nu);
    margins = aux_margins_of(s, base.a, coeffs);
    if (*std::min_element(margins.begin(), margins.end()) >= params.aux_margin) break;
    if (doubling == kMaxAuxDoublings) throw ConstructionError("build_u_system: positivity margin unreachable");
    scale *= 2.0;
  }

  std::vector<RowAux> a_aux(static_cast<std::size_t>(s.p1));
  std::vector<RowAux> d_aux(static_cast<std::size_t>(s.p2));
  for (int b = 0; b < s.p1; ++b) {
    Eigen::RowVectorXd row = base.a.row(b);
    a_aux[static_cast<std::size_t>(b)] = row_aux(coeffs, row.data(), n - 1, b);
  }
  for (int b = 0; b < s.p2; ++b) {
    Eigen::RowVectorXd row = base.delta.row(b);
    d_aux[static_cast<std::size_t>(b)] = row_aux(coeffs, row.data(), n - 1, -1);
  }

  const double prime_root = std::sqrt(static_cast<double>(nth_prime(n - 1)));
  for (int j = kFirstCnExponent; j <= kLastCnExponent; ++j) {
    const double cn = std::ldexp(prime_root, j);
    Vector log_an(s.p1);
    Vector log_dn(s.p2);
    for (int b = 0; b < s.p1; ++b) {
      const RowAux& aux = a_aux[static_cast<std::size_t>(b)];
      log_an(b) = solve_root_log(cn, aux.log_hat + std::log(aux.inv_tilde), aux.log_hat).log_x;
    }
    for (int b = 0; b < s.p2; ++b) {
      const RowAux& aux = d_aux[static_cast<std::size_t>(b)];
      log_dn(b) = solve_root_log(cn, aux.log_hat + std::log(aux.inv_tilde), aux.log_hat).log_x;
    }

    Matrix a(s.p1, n + 1);
    Matrix delta(s.p2, n + 1);
    a.leftCols(n - 1) = base.a;
    delta.leftCols(n - 1) = base.delta;
    for (int b = 0; b < s.p1; ++b) {
      a(b, n - 1) = std::exp(log_an(b));
      a(b, n) = 1.0 / (a_aux[static_cast<std::size_t>(b)].inv_tilde + cn * std::exp(-log_an(b)));
    }
    for (int b = 0; b < s.p2; ++b) {
      delta(b, n - 1) = std::exp(log_dn(b));
      delta(b, n) = 1.0 / (d_aux[static_cast<std::size_t>(b)].inv_tilde + cn * std::exp(-log_dn(b)));
    }
    coeffs(n - 1) = cn;

    USystem sys(s, std::move(a), std::move(delta), coeffs);
    const double det = determinant(sys.basis());
    if (std::abs(det) < params.det_tol) continue;

    ConstructionReport report;
    report.base_det = base.det;
    report.det = det;
    report.aux_margins = std::move(margins);
    report.cn_exponent = j;
    report.aux_scale = scale;
    return {std::move(sys), report};
  }
  throw ConstructionError("build_u_system: c_n escalation reached 2^" + std::to_string(kLastCnExponent) +
                          " without |det| >= det_tol");
}

}  // namespace

void validate_shape(const Shape& shape) {
  if (shape.p1 < 1) throw ShapeError("shape: p1 must be at least 1");
  if (shape.p2 < 0) throw ShapeError("shape: p2 must be non-negative");
  if (2 * shape.p1 + shape.p2 != shape.n) {
    throw ShapeError("shape: 2*p1 + p2 = " + std::to_string(2 * shape.p1 + shape.p2) + " but n = " +
                     std::to_string(shape.n));
  }
  if (shape.n < 2 || shape.n > kMaxDimension) throw ShapeError("shape: n must lie in [2, 64]");
}

bool gamma_negative(const Shape& shape, int b, int nu) {
  if (shape.n == 2) return nu == 2;
  return nu == b || nu == shape.n;
}

bool c_negative(const Shape& shape, int b, int nu) { return nu == shape.p1 + b; }

RootSolution solve_root_log(double c, double log_delta1, double log_delta2) {
  if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(log_delta1) || !std::isfinite(log_delta2)) {
    throw DomainError("solve_unique_positive_root: c, delta1, delta2 must be positive and finite");
  }
  const double log_c = std::log(c);
  // At y_lo one of the two exponentials equals e^{(c+1) y_lo}, so the objective
  // lies in [-log 2, 0); the slope is at least c, so the root is within log(2)/c.
  double lo = std::max(log_delta1 / c, (log_delta2 + log_c) / (c + 1.0));
  double hi = lo + std::log(2.0) / c;
  hi += 1e-12 * (1.0 + std::abs(hi));
  while (root_objective(c, log_delta1, log_delta2, hi) < 0.0) hi += (hi - lo);

  RootSolution out;
  double y = 0.5 * (lo + hi);
  for (int it = 1; it <= 400; ++it) {
    out.iterations = it;
    const double g = root_objective(c, log_delta1, log_delta2, y);
    if (g == 0.0) break;
    if (g < 0.0) lo = y; else hi = y;
    // Newton from inside the bracket; bisect when it would leave it.
    double next = y - g / root_slope(c, log_delta1, log_delta2, y);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(next), 1e-300);
    if (std::abs(next - y) <= tol || next == lo || next == hi) {
      y = next;
      break;
    }
    y = next;
    if (it == 400) throw NumericError("solve_unique_positive_root: no convergence");
  }
  out.log_x = y;
  out.x = std::exp(y);
  return out;
}

double solve_unique_positive_root(double c, double delta1, double delta2) {
  if (!(delta1 > 0.0) || !(delta2 > 0.0) || !std::isfinite(delta1) || !std::isfinite(delta2)) {
    throw DomainError("solve_unique_positive_root: c, delta1, delta2 must be positive and finite");
  }
  return solve_root_log(c, std::log(delta1), std::log(delta2)).x;
}

double root_relative_residual(double c, double log_delta1, double log_delta2, double log_x) {
  return std::expm1(root_objective(c, log_delta1, log_delta2, log_x));
}

BaseMatrix base_matrix_from_entries(int p1, int p2, const Matrix& a, const Matrix& delta, double det_tol) {
  validate_shape(Shape{2 * p1 + p2, p1, p2});
  const int n = 2 * p1 + p2;
  if (a.rows() != p1 || a.cols() != n - 1 || delta.rows() != p2 || (p2 > 0 && delta.cols() != n - 1)) {
    throw ShapeError("base_matrix_from_entries: entry grids must be p1 x (n-1) and p2 x (n-1)");
  }
  Matrix d = p2 > 0 ? delta : Matrix(0, n - 1);
  if (!all_positive_finite(a) || !all_positive_finite(d)) {
    throw DomainError("base_matrix_from_entries: entries must be positive");
  }
  BaseMatrix base = make_base(p1, p2, a, std::move(d));
  if (!(std::abs(base.det) >= det_tol)) {
    std::ostringstream msg;
    msg << "base matrix " << shape_text(p1, p2) << " has |det| = " << std::abs(base.det) << " < " << det_tol;
    throw ConstructionError(msg.str());
  }
  return base;
}

BaseMatrix build_base_matrix(int p1, int p2, std::uint64_t seed, double det_tol, int max_retries) {
  validate_shape(Shape{2 * p1 + p2, p1, p2});
  if (max_retries < 1) throw DomainError("build_base_matrix: max_retries must be positive");
  Rng rng(seed);
  return base_recursive(p1, p2, rng, det_tol, max_retries);
}

USystem::USystem(Shape shape, Matrix a, Matrix delta, Vector coeffs)
    : shape_(shape), a_(std::move(a)), delta_(std::move(delta)), coeffs_(std::move(coeffs)) {
  validate_shape(shape_);
  const int n = shape_.n;
  if (delta_.rows() == 0) delta_.resize(0, n + 1);
  if (a_.rows() != shape_.p1 || a_.cols() != n + 1 || delta_.rows() != shape_.p2 || delta_.cols() != n + 1 ||
      coeffs_.size() != n) {
    throw ShapeError("USystem: a must be p1 x (n+1), delta p2 x (n+1), coeffs of length n");
  }
  if (!all_positive_finite(a_) || !all_positive_finite(delta_) || !all_positive_finite(coeffs_)) {
    throw DomainError("USystem: a, delta and c must be strictly positive and finite");
  }
  u_.resize(n, n + 1);
  for (int nu = 0; nu <= n; ++nu) {
    for (int b = 0; b < shape_.p1; ++b) {
      const double s = gamma_negative(shape_, b, nu) ? -1.0 : 1.0;
      u_(2 * b, nu) = std::log(a_(b, nu));
      u_(2 * b + 1, nu) = s / a_(b, nu);
    }
    for (int b = 0; b < shape_.p2; ++b) u_(2 * shape_.p1 + b, nu) = std::log(delta_(b, nu));
  }
}

UConstruction build_u_system_detailed(const ConstructionParams& params) {
  validate_shape(params.shape);
  if (!(params.det_tol > 0.0) || !(params.residual_tol > 0.0) || params.max_retries < 1) {
    throw DomainError("build_u_system: tolerances and retry budget must be positive");
  }
  Rng rng(params.seed);
  UConstruction out = params.shape.n == 2 ? build_two_dimensional(params, rng) : build_general(params, rng);

  out.report.residual = residual_of(out.system);
  out.report.min_omit_one_det = min_omit_one(out.system.u());
  out.report.max_root_residual = max_root_residual(out.system);
  if (!(out.report.residual <= params.residual_tol)) {
    std::ostringstream msg;
    msg << "build_u_system: residual " << out.report.residual << " exceeds " << params.residual_tol;
    throw ConstructionError(msg.str());
  }
  return out;
}

USystem build_u_system(const ConstructionParams& params) { return build_u_system_detailed(params).system; }

Matrix build_Lplus(const USystem& system) { return system.u(); }

double irrational_surrogate(std::uint64_t q_eighths, std::uint64_t r_eighths, std::uint64_t prime) {
  return static_cast<double>(q_eighths) / 8.0 +
         static_cast<double>(r_eighths) / 8.0 * std::sqrt(static_cast<double>(prime));
}

std::uint64_t nth_prime(int i) {
  if (i < 0) throw DomainError("nth_prime: index must be non-negative");
  std::uint64_t candidate = 1;
  for (int found = -1; found < i;) {
    ++candidate;
    bool prime = candidate >= 2;
    for (std::uint64_t d = 2; d * d <= candidate && prime; ++d) prime = candidate % d != 0;
    if (prime) ++found;
  }
  return candidate;
}

TupleRealization assemble_tuple(const USystem& system, ConstructionParams params) {
  const Shape& s = system.shape();
  params.shape = s;
  Matrix gamma(s.p1, s.n + 1);
  Matrix cgrid(s.p2, s.n + 1);
  for (int nu = 0; nu <= s.n; ++nu) {
    for (int b = 0; b < s.p1; ++b) gamma(b, nu) = gamma_negative(s, b, nu) ? -system.a()(b, nu) : system.a()(b, nu);
    for (int b = 0; b < s.p2; ++b) {
      cgrid(b, nu) = c_negative(s, b, nu) ? -system.delta()(b, nu) : system.delta()(b, nu);
    }
  }
  EigenGrid grid(std::move(gamma), std::move(cgrid));
  JordanTuple tuple = grid.to_tuple();
  return TupleRealization{params, system, std::move(grid), std::move(tuple)};
}

TupleRealization construct_realization(const ConstructionParams& params) {
  return assemble_tuple(build_u_system(params), params);
}

std::vector<InvariantCheck> check_realization(const TupleRealization& r) {
  std::vector<InvariantCheck> out;
  const ConstructionParams& p = r.params;
  const USystem& sys = r.usystem;
  const Shape& s = sys.shape();

  {
    InvariantCheck c{"shape", true, 0.0, 0.0, ""};
    if (!(p.shape == s)) {
      c.passed = false;
      c.detail = "params shape differs from the u-system shape";
    } else if (r.grid.p1() != s.p1 || r.grid.p2() != s.p2 || r.grid.k() != s.n + 1) {
      c.passed = false;
      c.detail = "eigenvalue grid is not p1 x (n+1) and p2 x (n+1)";
    } else if (r.tuple.k() != s.n + 1 || r.tuple.dimension() != s.n) {
      c.passed = false;
      c.detail = "tuple does not hold n+1 operators on R^n";
    }
    out.push_back(c);
    if (!c.passed) return out;
  }

  {
    // The USystem constructor already rejects non-positive entries; restated
    // so the report lists it.
    const double smallest = std::min({sys.a().minCoeff(), sys.coeffs().minCoeff(),
                                      s.p2 > 0 ? sys.delta().minCoeff() : 1.0});
    out.push_back({"positivity", smallest > 0.0, smallest, 0.0, "min over a, delta, c"});
  }

  {
    int bad = 0;
    std::string where;
    for (int nu = 0; nu <= s.n; ++nu) {
      for (int b = 0; b < s.p1; ++b) {
        const double g = r.grid.gamma()(b, nu);
        if (std::abs(g) != sys.a()(b, nu) || (g < 0.0) != gamma_negative(s, b, nu)) {
          ++bad;
          if (where.empty()) where = "gamma(" + std::to_string(b + 1) + "," + std::to_string(nu + 1) + ")";
        }
      }
      for (int b = 0; b < s.p2; ++b) {
        const double g = r.grid.cgrid()(b, nu);
        if (std::abs(g) != sys.delta()(b, nu) || (g < 0.0) != c_negative(s, b, nu)) {
          ++bad;
          if (where.empty()) where = "c(" + std::to_string(b + 1) + "," + std::to_string(nu + 1) + ")";
        }
      }
    }
    const EigenGrid back = EigenGrid::from_tuple(r.tuple);
    const bool tuple_ok = back.gamma() == r.grid.gamma() && back.cgrid() == r.grid.cgrid();
    out.push_back({"sign_layout", bad == 0 && tuple_ok, static_cast<double>(bad), 0.0,
                   bad ? "first mismatch at " + where : (tuple_ok ? "" : "tuple disagrees with grid")});
  }

  const double det = determinant(sys.basis());
  out.push_back({"determinant", std::abs(det) >= p.det_tol, std::abs(det), p.det_tol, "|det(u_1..u_n)|"});

  const double res = residual_of(sys);
  out.push_back({"residual", res <= p.residual_tol, res, p.residual_tol, "||u_{n+1} + sum c u||"});

  const double omit = min_omit_one(sys.u());
  out.push_back({"omit_one", omit > p.det_tol / 1e3, omit, p.det_tol / 1e3, "min |det| with one u dropped"});

  if (s.n >= 3) {
    const auto margins = aux_margins_of(s, sys.a(), sys.coeffs());
    const double worst = *std::min_element(margins.begin(), margins.end());
    out.push_back({"aux_margin", worst >= p.aux_margin, worst, p.aux_margin, "min over 2-blocks"});
  } else {
    out.push_back({"aux_margin", true, 0.0, 0.0, "not used for n = 2"});
  }

  const double root = max_root_residual(sys);
  out.push_back({"root_equations", root <= kRootResidualTol, root, kRootResidualTol, "relative"});

  {
    Rng rng(p.seed ^ 0x9e3779b97f4a7c15ULL);
    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<std::uint64_t> m(static_cast<std::size_t>(s.n + 1));
      for (auto& v : m) v = rng.below(9);
      Vector y(s.n);
      for (int i = 0; i < s.n; ++i) y(i) = rng.uniform(-1.0, 1.0);
      const MultiIndex mi(m);
      const Vector naive = naive_power_apply(r.tuple, mi, y);
      const Vector closed = tuple_power_apply(r.tuple, mi, y);
      worst = std::max(worst, (closed - naive).norm() / (1.0 + naive.norm()));
    }
    out.push_back({"oracle_equivalence", worst <= 1e-9, worst, 1e-9, "closed form vs explicit products"});
  }
  return out;
}

}  // namespace hypertuple
