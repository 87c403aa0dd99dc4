#include "hypertuple/obstructions.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "hypertuple/errors.hpp"
#include "hypertuple/jordan_core.hpp"

namespace hypertuple {

namespace {

void require_block3_input(const Vector& y) {
  if (y.size() != 3) throw ShapeError("block3: y must have three entries");
  if (!y.allFinite()) throw DomainError("block3: y must be finite");
  if (y[2] == 0.0) throw DomainError("block3: y3 must be nonzero");
}

}  // namespace

Vector block3_target(const Vector& y) {
  require_block3_input(y);
  Vector w(3);
  w << y[0] + y[1] + y[2], y[1] + y[2], y[2];
  return w;
}

EllCertificate ell_certificate(const Vector& y) {
  require_block3_input(y);
  EllCertificate cert;
  cert.y = y;
  cert.target = block3_target(y);

  // y1 + y2 + y3/2 - (ell/2) y3 = y1 + y2 + y3. The y1 + y2 terms cancel, and
  // the remaining equation is homogeneous in y3, so solve it on the mantissa
  // to stay clear of subnormal halving.
  int exponent = 0;
  const double s = std::frexp(y[2], &exponent);
  const double half = 0.5 * s;
  cert.required_ell = (half - s) / half;
  cert.feasible_lower_bound = 0.0;
  cert.infeasible = cert.required_ell < cert.feasible_lower_bound;
  return cert;
}

double block3_empirical_gap(std::span<const double> gammas, const Vector& y, int grid_bound) {
  const Vector w = block3_target(y);
  if (gammas.empty()) throw ShapeError("block3_empirical_gap: need at least one eigenvalue");
  if (grid_bound < 0) throw DomainError("block3_empirical_gap: grid_bound must be non-negative");
  const std::size_t k = gammas.size();
  double points = 1.0;
  for (std::size_t i = 0; i < k; ++i) points *= grid_bound + 1.0;
  if (points > 5e7) throw DomainError("block3_empirical_gap: grid too large");

  std::vector<std::uint64_t> m(k, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    const DiagonalProfile prof = tuple_block_diagonals(gammas, 3, MultiIndex(m));
    const double d1 = prof.d[0];
    const double d2 = prof.d[1];
    Vector img(3);
    img << prof.leading * (y[0] + d1 * y[1] + d2 * y[2]), prof.leading * (y[1] + d1 * y[2]), prof.leading * y[2];
    best = std::min(best, (img - w).squaredNorm());

    std::size_t i = 0;
    while (i < k && m[i] == static_cast<std::uint64_t>(grid_bound)) m[i++] = 0;
    if (i == k) break;
    ++m[i];
  }
  return std::sqrt(best);
}

ConeCertificate cone_certificate(const Matrix& L, const Vector& x, double margin) {
  if (L.rows() != L.cols() || L.rows() != x.size() || L.rows() == 0) {
    throw ShapeError("cone_certificate: L must be square and match x");
  }
  if (!(margin >= 0.0)) throw DomainError("cone_certificate: margin must be non-negative");
  Eigen::JacobiSVD<Matrix> svd(L);
  const auto& sv = svd.singularValues();
  if (!(sv.minCoeff() > 1e-12 * sv.maxCoeff())) throw DomainError("cone_certificate: L is singular");

  ConeCertificate cert;
  cert.margin = margin;
  cert.sigma_min = sv.minCoeff();
  cert.preimage = solve(L, x);
  bool below = false;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < cert.preimage.size(); ++i) {
    const double z = cert.preimage[i];
    if (z < 0.0) sq += z * z;
    below = below || z <= -margin;
  }
  cert.negative_margin = std::sqrt(sq);
  // Shaved by a relative 1e-9 against rounding in the solve and the SVD.
  cert.gap_lower_bound = below ? cert.sigma_min * cert.negative_margin * (1.0 - 1e-9) : 0.0;
  return cert;
}

}  // namespace hypertuple
