#pragma once

// Steering the orbit of the hypercyclic vector w to within epsilon of a
// target: lattice coordinates in the basis u_1..u_n, the Kronecker scan over
// l u_{n+1}, and the parity (sigma) correction for negative coordinates.

#include <cstdint>
#include <vector>

#include "hypertuple/construction.hpp"
#include "hypertuple/jordan_core.hpp"
#include "hypertuple/linalg.hpp"

namespace hypertuple {

struct ApproxRequest {
  Vector target;
  double epsilon = 0.1;
  long long ell_max = 1000000;
};

struct ApproxResult {
  MultiIndex m;
  /// For kronecker_search ||L+ m - x||; for orbit_target_search the orbit
  /// error ||T^m w - x|| recomputed with the explicit-product oracle.
  double achieved_error = 0.0;
  long long ell = 0;
  bool verified = false;

  // Kronecker decomposition of the accepted step.
  std::vector<std::int64_t> R;
  Vector r;
  std::vector<std::int64_t> Rprime;
  Vector rprime;
  /// Acceptance threshold epsilon / sum ||u_nu|| of that step.
  double tolerance = 0.0;

  // Orbit-level bookkeeping (orbit_target_search only).
  std::vector<int> sigma;
  bool perturbed = false;
  Vector searched_target;
  double lattice_epsilon = 0.0;
  double lattice_error = 0.0;
};

/// Coefficients rho with x = sum rho_nu u_nu.
Vector lattice_coordinates(const USystem& system, const Vector& x);

/// Smallest l in 0..ell_max with max_nu |r_nu - r'_nu| < epsilon / sum ||u_nu||
/// and R - R' >= 0, where R + r = rho and R' + r' = -l c. Coordinates of rho
/// within 1e-9 (1 + |rho|) of an integer are snapped to it. Throws
/// SearchBudgetError when no l qualifies.
ApproxResult kronecker_search(const USystem& system, const Vector& x, double epsilon, long long ell_max);

/// Same scan started at ell_from instead of 0.
ApproxResult kronecker_search_from(const USystem& system, const Vector& x, double epsilon, long long ell_from,
                                   long long ell_max);

struct SignCorrection {
  /// sigma_nu in {0, 1}, one per operator.
  std::vector<int> sigma;
  /// Positive at every product coordinate.
  Vector y;
  Vector v1;
  Vector v2;
};

/// Splits a target in V-coordinates as x = v2 * y + v1 (componentwise) with
/// v2, v1 the factors V(sigma) introduces. The sign of each product coordinate
/// is flipped through the first operator whose eigenvalue is negative in that
/// coordinate and in no other. Throws DomainError on a zero entry of x.
SignCorrection sign_correction(const Vector& x, const TupleRealization& realization);

/// The vector w with zeros at odd 1-based positions 1, 3, ..., 2 p1 - 1.
Vector hypercyclic_vector(const TupleRealization& realization);

/// m with ||T^m w - x|| < epsilon, double-checked with naive_power_apply.
/// Zero target entries are moved by epsilon / (2 sqrt n) first.
ApproxResult orbit_target_search(const TupleRealization& realization, const ApproxRequest& request);

}  // namespace hypertuple
