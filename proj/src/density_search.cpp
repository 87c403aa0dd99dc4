#include "hypertuple/density_search.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "hypertuple/errors.hpp"

namespace hypertuple {

namespace {

bool is_negative_in(const EigenGrid& grid, int row, int nu) {
  if (row < grid.p1()) return grid.gamma()(row, nu) < 0.0;
  return grid.cgrid()(row - grid.p1(), nu) < 0.0;
}

// Smallest operator whose eigenvalue is negative in product row `row` only.
int flip_index(const EigenGrid& grid, int row) {
  const int rows = grid.p1() + grid.p2();
  for (int nu = 0; nu < grid.k(); ++nu) {
    if (!is_negative_in(grid, row, nu)) continue;
    bool alone = true;
    for (int other = 0; other < rows && alone; ++other) alone = other == row || !is_negative_in(grid, other, nu);
    if (alone) return nu;
  }
  throw DomainError("sign_correction: no operator flips product coordinate " + std::to_string(row + 1) +
                    " alone; this sign pattern cannot be reached");
}

// Rigorous orbit error when ||L+ m - t/2|| = ||e|| < eps_k. With
// kappa = (e^{2 eps_k} - 1) / (2 eps_k), each 2-block of the orbit (P D, P)
// moves by at most M_b |e_b| componentwise, where
//   M_b = [[2 kappa |P D|, 2 e^{2 eps_k} |P|], [2 kappa |P|, 0]],
// and each 1-block entry x moves by at most 2 kappa |x| |e|. The total is
// bounded by the largest spectral norm among these blocks times ||e||.
double orbit_error_bound(const Vector& x, int p1, double eps_k) {
  const double kappa = std::expm1(2.0 * eps_k) / (2.0 * eps_k);
  const double grow = std::exp(2.0 * eps_k);
  double worst = 0.0;
  for (int b = 0; b < p1; ++b) {
    Eigen::Matrix2d m;
    m << 2.0 * kappa * std::abs(x[2 * b]), 2.0 * grow * std::abs(x[2 * b + 1]), 2.0 * kappa * std::abs(x[2 * b + 1]),
        0.0;
    worst = std::max(worst, Eigen::JacobiSVD<Eigen::Matrix2d>(m).singularValues()(0));
  }
  for (Eigen::Index i = 2 * p1; i < x.size(); ++i) worst = std::max(worst, 2.0 * kappa * std::abs(x[i]));
  return worst * eps_k;
}

}  // namespace

Vector lattice_coordinates(const USystem& system, const Vector& x) {
  const int n = system.shape().n;
  if (x.size() != n) throw ShapeError("lattice_coordinates: target length != n");
  const Matrix basis = system.basis();
  const Vector rho = solve(basis, x);
  const double residual = (basis * rho - x).norm();
  if (!(residual <= 1e-9 * (1.0 + x.norm()))) {
    throw NumericError("lattice_coordinates: basis too ill-conditioned for the requested accuracy");
  }
  return rho;
}

ApproxResult kronecker_search(const USystem& system, const Vector& x, double epsilon, long long ell_max) {
  return kronecker_search_from(system, x, epsilon, 0, ell_max);
}

ApproxResult kronecker_search_from(const USystem& system, const Vector& x, double epsilon, long long ell_from,
                                   long long ell_max) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("kronecker_search: epsilon must be positive");
  if (ell_max < 0 || ell_from < 0) throw DomainError("kronecker_search: budget must be non-negative");
  const int n = system.shape().n;
  Vector rho = lattice_coordinates(system, x);

  std::vector<std::int64_t> R(static_cast<std::size_t>(n));
  Vector r(n);
  for (int nu = 0; nu < n; ++nu) {
    const double nearest = std::round(rho[nu]);
    if (std::abs(rho[nu] - nearest) <= 1e-9 * (1.0 + std::abs(rho[nu]))) rho[nu] = nearest;
    const double fl = std::floor(rho[nu]);
    R[static_cast<std::size_t>(nu)] = static_cast<std::int64_t>(fl);
    r[nu] = rho[nu] - fl;
  }

  double norm_sum = 0.0;
  for (int nu = 0; nu < n; ++nu) norm_sum += system.u().col(nu).norm();
  const double tol = epsilon / norm_sum;
  const Vector& c = system.coeffs();

  std::vector<std::int64_t> Rp(static_cast<std::size_t>(n));
  Vector rp(n);
  double best = std::numeric_limits<double>::infinity();
  long long best_ell = -1;
  for (long long ell = ell_from; ell <= ell_max; ++ell) {
    double worst = 0.0;
    bool nonneg = true;
    for (int nu = 0; nu < n; ++nu) {
      const double shifted = -static_cast<double>(ell) * c[nu];
      const double fl = std::floor(shifted);
      Rp[static_cast<std::size_t>(nu)] = static_cast<std::int64_t>(fl);
      rp[nu] = shifted - fl;
      worst = std::max(worst, std::abs(r[nu] - rp[nu]));
      nonneg = nonneg && R[static_cast<std::size_t>(nu)] >= Rp[static_cast<std::size_t>(nu)];
    }
    if (!nonneg) continue;
    if (worst < best) {
      best = worst;
      best_ell = ell;
    }
    if (worst >= tol) continue;

    ApproxResult out;
    std::vector<std::uint64_t> m(static_cast<std::size_t>(n + 1));
    Vector mv(n + 1);
    for (int nu = 0; nu < n; ++nu) {
      const auto i = static_cast<std::size_t>(nu);
      m[i] = static_cast<std::uint64_t>(R[i] - Rp[i]);
      mv[nu] = static_cast<double>(m[i]);
    }
    m[static_cast<std::size_t>(n)] = static_cast<std::uint64_t>(ell);
    mv[n] = static_cast<double>(ell);
    out.m = MultiIndex(std::move(m));
    out.ell = ell;
    out.achieved_error = (system.u() * mv - x).norm();
    out.verified = out.achieved_error < epsilon;
    out.R = R;
    out.r = r;
    out.Rprime = Rp;
    out.rprime = rp;
    out.tolerance = tol;
    return out;
  }
  std::ostringstream msg;
  msg << "kronecker_search: no l in [" << ell_from << ", " << ell_max << "] met the tolerance " << tol;
  throw SearchBudgetError(msg.str(), best * norm_sum, best_ell);
}

SignCorrection sign_correction(const Vector& x, const TupleRealization& realization) {
  const EigenGrid& grid = realization.grid;
  const int p1 = grid.p1();
  const int p2 = grid.p2();
  if (x.size() != grid.dimension()) throw ShapeError("sign_correction: target length != n");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0 || !std::isfinite(x[i])) throw DomainError("sign_correction: target entries must be nonzero");
  }

  SignCorrection out;
  out.sigma.assign(static_cast<std::size_t>(grid.k()), 0);
  for (int row = 0; row < p1 + p2; ++row) {
    const Eigen::Index pos = row < p1 ? 2 * row : p1 + row;
    if (x[pos] < 0.0) out.sigma[static_cast<std::size_t>(flip_index(grid, row))] = 1;
  }

  out.v1 = Vector::Zero(x.size());
  out.v2 = Vector::Ones(x.size());
  for (int nu = 0; nu < grid.k(); ++nu) {
    if (!out.sigma[static_cast<std::size_t>(nu)]) continue;
    for (int b = 0; b < p1; ++b) {
      out.v2[2 * b] *= grid.gamma()(b, nu);
      out.v1[2 * b + 1] += 1.0 / grid.gamma()(b, nu);
    }
    for (int b = 0; b < p2; ++b) out.v2[2 * p1 + b] *= grid.cgrid()(b, nu);
  }
  out.y = (x - out.v1).cwiseQuotient(out.v2);
  return out;
}

Vector hypercyclic_vector(const TupleRealization& realization) {
  return hypercyclic_vector(realization.grid.p1(), realization.grid.p2());
}

ApproxResult orbit_target_search(const TupleRealization& realization, const ApproxRequest& request) {
  const int p1 = realization.grid.p1();
  const int p2 = realization.grid.p2();
  const int n = realization.grid.dimension();
  if (request.target.size() != n) throw ShapeError("orbit_target_search: target length != n");
  if (!request.target.allFinite()) throw DomainError("orbit_target_search: target must be finite");
  if (!(request.epsilon > 0.0) || !std::isfinite(request.epsilon)) {
    throw DomainError("orbit_target_search: epsilon must be positive");
  }
  if (request.ell_max < 1) throw DomainError("orbit_target_search: ell_max must be at least 1");

  const Vector w = hypercyclic_vector(p1, p2);
  const auto orbit_error = [&](const MultiIndex& m) {
    return (naive_power_apply(realization.tuple, m, w) - request.target).norm();
  };

  ApproxResult out;
  out.searched_target = request.target;
  const double shift = request.epsilon / (2.0 * std::sqrt(static_cast<double>(n)));
  int zeros = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.searched_target[i] == 0.0) {
      out.searched_target[i] = shift;
      ++zeros;
    }
  }
  out.perturbed = zeros > 0;
  const double eps_eff = request.epsilon - shift * std::sqrt(static_cast<double>(zeros));

  const auto accept_trivial = [&](const MultiIndex& m) {
    const double err = orbit_error(m);
    if (!(err < request.epsilon)) return false;
    out.m = m;
    out.achieved_error = err;
    out.verified = true;
    return true;
  };
  if (accept_trivial(MultiIndex::zeros(static_cast<std::size_t>(n + 1)))) {
    out.sigma.assign(static_cast<std::size_t>(n + 1), 0);
    return out;
  }

  const Vector v = orbit_to_v(out.searched_target, p1, p2);
  const SignCorrection sc = sign_correction(v, realization);
  out.sigma = sc.sigma;
  std::vector<std::uint64_t> sig(sc.sigma.begin(), sc.sigma.end());
  if (accept_trivial(MultiIndex(sig))) return out;

  Vector half(n);
  for (int b = 0; b < p1; ++b) {
    half[2 * b] = 0.5 * std::log(sc.y[2 * b]);
    half[2 * b + 1] = 0.5 * sc.y[2 * b + 1];
  }
  for (int b = 0; b < p2; ++b) half[2 * p1 + b] = 0.5 * std::log(sc.y[2 * p1 + b]);

  // 2% of the budget is headroom for rounding in the final recheck.
  double eps_k = eps_eff;
  while (orbit_error_bound(out.searched_target, p1, eps_k) >= 0.98 * eps_eff) eps_k *= 0.98;
  out.lattice_epsilon = eps_k;

  long long from = 0;
  for (;;) {
    ApproxResult k = kronecker_search_from(realization.usystem, half, eps_k, from, request.ell_max);
    std::vector<std::uint64_t> m(static_cast<std::size_t>(n + 1));
    for (int nu = 0; nu <= n; ++nu) {
      m[static_cast<std::size_t>(nu)] = 2 * k.m[static_cast<std::size_t>(nu)] + sig[static_cast<std::size_t>(nu)];
    }
    MultiIndex mstar(std::move(m));
    const double err = orbit_error(mstar);
    if (err < request.epsilon) {
      out.m = std::move(mstar);
      out.achieved_error = err;
      out.verified = true;
      out.ell = k.ell;
      out.R = std::move(k.R);
      out.r = std::move(k.r);
      out.Rprime = std::move(k.Rprime);
      out.rprime = std::move(k.rprime);
      out.tolerance = k.tolerance;
      out.lattice_error = k.achieved_error;
      return out;
    }
    // Rounding pushed this candidate over; keep scanning.
    from = k.ell + 1;
    if (from > request.ell_max) {
      throw SearchBudgetError("orbit_target_search: budget exhausted after a failed recheck", err, k.ell);
    }
  }
}

}  // namespace hypertuple
