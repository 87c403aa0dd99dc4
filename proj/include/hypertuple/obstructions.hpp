#pragma once

// Finite certificates for the two non-hypercyclicity results: a single Jordan
// block of dimension >= 3 (any k), and n-tuples of n x n Jordan matrices.

#include <span>

#include "hypertuple/linalg.hpp"

namespace hypertuple {

/// For J_3(m) y to approach w = (y1+y2+y3, y2+y3, y3), the limit of
/// sum_j m_j / gamma_j^2 would have to be required_ell = -1, while every
/// admissible value is >= 0.
struct EllCertificate {
  Vector y;
  Vector target;
  double required_ell = 0.0;
  double feasible_lower_bound = 0.0;
  bool infeasible = false;
};

/// Throws DomainError unless y has three finite entries with y3 != 0.
EllCertificate ell_certificate(const Vector& y);

/// w = (y1+y2+y3, y2+y3, y3).
Vector block3_target(const Vector& y);

/// min over m in {0..grid_bound}^k of ||J_3(m) y - w|| using the closed-form
/// diagonals. Refuses grids with more than 5e7 points.
double block3_empirical_gap(std::span<const double> gammas, const Vector& y, int grid_bound);

struct ConeCertificate {
  Vector preimage;               ///< L^{-1} x
  double negative_margin = 0.0;  ///< distance of the preimage from the non-negative orthant
  double sigma_min = 0.0;
  double gap_lower_bound = 0.0;
  double margin = 0.0;
};

/// Since ||L m - x|| >= sigma_min(L) ||m - L^{-1} x||, no m in N_0^n gets closer
/// to x than sigma_min(L) times the orthant distance of L^{-1} x. The bound is
/// reported only when some preimage coordinate is <= -margin; otherwise it
/// is 0. Throws DomainError for a singular L.
ConeCertificate cone_certificate(const Matrix& L, const Vector& x, double margin = 0.0);

}  // namespace hypertuple
