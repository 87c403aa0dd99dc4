#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "hypertuple/construction.hpp"
#include "hypertuple/density_search.hpp"
#include "hypertuple/errors.hpp"
#include "oracles.hpp"

using namespace hypertuple;

namespace {

const TupleRealization& realization2() {
  static const TupleRealization r = construct_realization({{2, 1, 0}, 7});
  return r;
}

const TupleRealization& realization3() {
  static const TupleRealization r = construct_realization({{3, 1, 1}, 7});
  return r;
}

oracle::Mat to_mat(const Matrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

oracle::Vec to_vec(const Vector& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

// ||L+ m - x|| with plain loops.
double lattice_error(const USystem& s, const MultiIndex& m, const Vector& x) {
  oracle::Vec mv(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) mv[i] = static_cast<double>(m[i]);
  return oracle::norm(oracle::sub(oracle::apply(to_mat(s.u()), mv), to_vec(x)));
}

// The acceptance predicate of the Kronecker scan, restated independently.
bool predicate_holds(const USystem& s, const Vector& x, double eps, long long ell) {
  const int n = s.shape().n;
  const Matrix B = s.basis();
  const Vector rho = B.fullPivLu().solve(x);
  double norm_sum = 0.0;
  for (int nu = 0; nu < n; ++nu) norm_sum += s.u().col(nu).norm();
  for (int nu = 0; nu < n; ++nu) {
    double q = rho[nu];
    if (std::abs(q - std::round(q)) <= 1e-9 * (1.0 + std::abs(q))) q = std::round(q);
    const double R = std::floor(q), r = q - R;
    const double shifted = -static_cast<double>(ell) * s.coeffs()[nu];
    const double Rp = std::floor(shifted), rp = shifted - Rp;
    if (R < Rp || !(std::abs(r - rp) < eps / norm_sum)) return false;
  }
  return true;
}

// Orbit of w under T^m through repeated application of the dense operators.
double orbit_error_oracle(const TupleRealization& r, const MultiIndex& m, const Vector& x) {
  std::vector<int> dims = r.tuple.structure().dims();
  oracle::Mat eig = to_mat(r.tuple.eigenvalues());
  const oracle::Vec w = to_vec(hypercyclic_vector(r));
  return oracle::norm(oracle::sub(oracle::balanced_tuple_apply(dims, eig, m.values(), w), to_vec(x)));
}

}  // namespace

TEST_CASE("lattice coordinates examples") {
  const USystem& s = realization3().usystem;
  const Vector rho = lattice_coordinates(s, s.u().col(0));
  CHECK(std::abs(rho[0] - 1.0) < 1e-12);
  CHECK(std::abs(rho[1]) < 1e-12);
  CHECK(std::abs(rho[2]) < 1e-12);
  CHECK(lattice_coordinates(s, Vector::Zero(3)).norm() == 0.0);
  CHECK_THROWS_AS(lattice_coordinates(s, Vector::Zero(2)), ShapeError);
}

TEST_CASE("kronecker search examples") {
  const USystem& s = realization3().usystem;
  SUBCASE("x = 0 is accepted at l = 0 with m = 0") {
    const ApproxResult r = kronecker_search(s, Vector::Zero(3), 0.01, 10);
    CHECK(r.ell == 0);
    CHECK(r.m.is_zero());
    CHECK(r.achieved_error == 0.0);
  }
  SUBCASE("integer combination 3 u1 + 2 u2") {
    const Vector x = 3.0 * s.u().col(0) + 2.0 * s.u().col(1);
    const ApproxResult r = kronecker_search(s, x, 1e-6, 10);
    CHECK(r.ell == 0);
    CHECK(r.m == MultiIndex({3, 2, 0, 0}));
    CHECK(r.achieved_error <= 1e-9);
  }
  SUBCASE("n = 2, x = (1, -1), eps = 0.1") {
    const USystem& s2 = realization2().usystem;
    const Vector x = (Vector(2) << 1.0, -1.0).finished();
    const ApproxResult r = kronecker_search(s2, x, 0.1, 1000000);
    CHECK(r.verified);
    CHECK(lattice_error(s2, r.m, x) < 0.1);
    // an exhaustive scan over the box spanned by the answer also finds a point
    std::uint64_t box = 0;
    for (auto v : r.m.values()) box = std::max(box, v);
    REQUIRE(box <= 2000);
    const Matrix& u = s2.u();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i <= box; ++i)
      for (std::uint64_t j = 0; j <= box; ++j)
        for (std::uint64_t l = 0; l <= box; ++l) {
          const double di = static_cast<double>(i), dj = static_cast<double>(j), dl = static_cast<double>(l);
          const double e0 = u(0, 0) * di + u(0, 1) * dj + u(0, 2) * dl - x[0];
          const double e1 = u(1, 0) * di + u(1, 1) * dj + u(1, 2) * dl - x[1];
          best = std::min(best, e0 * e0 + e1 * e1);
        }
    CHECK(std::sqrt(best) < 0.1);
  }
}

TEST_CASE("kronecker search properties: chain, minimality, budget, non-negativity") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  const USystem& s = realization2().usystem;
  for (int trial = 0; trial < 25; ++trial) {
    const Vector x = (Vector(2) << d(gen), d(gen)).finished();
    const double eps = 0.2;
    const ApproxResult r = kronecker_search(s, x, eps, 1000000);

    // error bound chain, recomputed
    double worst = 0.0;
    for (int nu = 0; nu < 2; ++nu) worst = std::max(worst, std::abs(r.r[nu] - r.rprime[nu]));
    CHECK(worst < r.tolerance);
    CHECK(lattice_error(s, r.m, x) < eps);
    CHECK(r.achieved_error == doctest::Approx(lattice_error(s, r.m, x)).epsilon(1e-9));

    // non-negativity: R - R' >= 0 is what makes m a valid exponent
    for (int nu = 0; nu < 2; ++nu) CHECK(r.R[nu] - r.Rprime[nu] >= 0);
    CHECK(r.m[2] == static_cast<std::uint64_t>(r.ell));

    // minimality, checked by the restated predicate on every smaller l
    bool earlier = false;
    for (long long ell = 0; ell < r.ell && !earlier; ++ell) earlier = predicate_holds(s, x, eps, ell);
    CHECK_FALSE(earlier);
    CHECK(predicate_holds(s, x, eps, r.ell));

    // monotone budget: the exact budget and a larger one give the same answer
    const ApproxResult tight = kronecker_search(s, x, eps, r.ell);
    const ApproxResult loose = kronecker_search(s, x, eps, 4 * r.ell + 10);
    CHECK(tight.m == r.m);
    CHECK(loose.m == r.m);
    if (r.ell > 0) CHECK_THROWS_AS(kronecker_search(s, x, eps, r.ell - 1), SearchBudgetError);
  }
}

TEST_CASE("kronecker search budget exhaustion carries the best error") {
  const USystem& s = realization2().usystem;
  const Vector x = (Vector(2) << 0.3, 0.7).finished();
  try {
    kronecker_search(s, x, 1e-9, 10);
    FAIL("expected SearchBudgetError");
  } catch (const SearchBudgetError& e) {
    CHECK(std::isfinite(e.best_error()));
    CHECK(e.best_error() > 0.0);
  }
  CHECK_THROWS_AS(kronecker_search(s, x, 0.0, 10), DomainError);
}

TEST_CASE("sign correction examples") {
  const TupleRealization& r3 = realization3();
  SUBCASE("all positive: sigma = 0 and y = x") {
    const Vector x = (Vector(3) << 1.5, 0.3, 2.0).finished();
    const SignCorrection sc = sign_correction(x, r3);
    for (int v : sc.sigma) CHECK(v == 0);
    CHECK(sc.y == x);
  }
  SUBCASE("x1 < 0 flips through the first operator") {
    const Vector x = (Vector(3) << -1.5, 0.3, 2.0).finished();
    const SignCorrection sc = sign_correction(x, r3);
    CHECK(sc.sigma[0] == 1);
    CHECK(sc.y[0] > 0.0);
    CHECK(sc.y[2] > 0.0);
  }
  SUBCASE("reconstruction x = v2 * y + v1 and V(sigma) agreement") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (const Shape& sh : {Shape{2, 1, 0}, Shape{3, 1, 1}, Shape{4, 2, 0}, Shape{5, 1, 3}, Shape{6, 2, 2}}) {
      const TupleRealization r = construct_realization({sh, 11});
      for (int trial = 0; trial < 20; ++trial) {
        Vector x(sh.n);
        for (int i = 0; i < sh.n; ++i) x[i] = d(gen);
        const SignCorrection sc = sign_correction(x, r);
        CHECK((sc.v2.cwiseProduct(sc.y) + sc.v1 - x).norm() <= 1e-12 * (1.0 + x.norm()));
        for (int b = 0; b < sh.p1; ++b) CHECK(sc.y[2 * b] > 0.0);
        for (int b = 0; b < sh.p2; ++b) CHECK(sc.y[2 * sh.p1 + b] > 0.0);
        // v2 and v1 are exactly the product and sum parts of V(sigma)
        std::vector<std::uint64_t> sig(sc.sigma.begin(), sc.sigma.end());
        const Vector vs = v_vector(MultiIndex(sig), r.grid);
        for (int b = 0; b < sh.p1; ++b) {
          CHECK(sc.v2[2 * b] == doctest::Approx(vs[2 * b]));
          CHECK(sc.v1[2 * b + 1] == doctest::Approx(vs[2 * b + 1]));
        }
      }
    }
  }
  SUBCASE("zero entries are rejected") {
    CHECK_THROWS_AS(sign_correction((Vector(3) << 0.0, 1.0, 1.0).finished(), r3), DomainError);
  }
}

TEST_CASE("hypercyclic vector of a realization") {
  CHECK(hypercyclic_vector(realization2()) == (Vector(2) << 0, 1).finished());
  CHECK(hypercyclic_vector(realization3()) == (Vector(3) << 0, 1, 1).finished());
  CHECK(hypercyclic_vector(construct_realization({{4, 2, 0}, 1})) == (Vector(4) << 0, 1, 0, 1).finished());
}

TEST_CASE("orbit search: zero entry is perturbed and the result rechecked") {
  const TupleRealization& r = realization2();
  ApproxRequest req;
  req.target = (Vector(2) << 1.0, 0.0).finished();
  req.epsilon = 0.25;
  req.ell_max = 1000000;
  const ApproxResult res = orbit_target_search(r, req);
  CHECK(res.perturbed);
  CHECK(res.verified);
  CHECK(res.achieved_error < 0.25);
  CHECK(orbit_error_oracle(r, res.m, req.target) < 0.25);
  CHECK((tuple_power_apply(r.tuple, res.m, hypercyclic_vector(r)) - req.target).norm() < 0.25);
}

TEST_CASE("orbit search: planted solvable instance") {
  // m* = 2 m0 + sigma0 with m0 = (3, 2, 0, ...) and sigma0 the parity that
  // sign_correction assigns to the resulting target
  struct Plant {
    const TupleRealization* r;
    std::vector<std::uint64_t> m;
  };
  for (const Plant& p : {Plant{&realization2(), {6, 4, 1}}, Plant{&realization3(), {7, 4, 0, 0}}}) {
    const Vector x = naive_power_apply(p.r->tuple, MultiIndex(p.m), hypercyclic_vector(*p.r));
    ApproxRequest req{x, 1e-6, 1000};
    const ApproxResult res = orbit_target_search(*p.r, req);
    CHECK(res.verified);
    CHECK(res.achieved_error < 1e-6);
    CHECK(orbit_error_oracle(*p.r, res.m, x) < 1e-6);
  }
}

TEST_CASE("orbit search: large epsilon accepts the trivial index") {
  const TupleRealization& r = realization2();
  ApproxRequest req{(Vector(2) << 0.1, 1.1).finished(), 0.5, 10};
  const ApproxResult res = orbit_target_search(r, req);
  CHECK(res.m.is_zero());
  CHECK(res.achieved_error < 0.5);
}

TEST_CASE("orbit search soundness, n = 2 and n = 3") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int trial = 0; trial < 8; ++trial) {
    ApproxRequest req{(Vector(2) << d(gen), d(gen)).finished(), 0.1, 1000000};
    const ApproxResult res = orbit_target_search(realization2(), req);
    CHECK(res.verified);
    CHECK(orbit_error_oracle(realization2(), res.m, req.target) < 0.1);
    for (auto v : res.m.values()) CHECK(v < (std::uint64_t{1} << 62));
  }
  for (int trial = 0; trial < 2; ++trial) {
    ApproxRequest req{(Vector(3) << d(gen), d(gen), d(gen)).finished(), 0.5, 10000000};
    const ApproxResult res = orbit_target_search(realization3(), req);
    CHECK(res.verified);
    CHECK(orbit_error_oracle(realization3(), res.m, req.target) < 0.5);
  }
}

TEST_CASE("orbit search preconditions and budget") {
  const TupleRealization& r = realization2();
  CHECK_THROWS_AS(orbit_target_search(r, {Vector::Ones(3), 0.1, 10}), ShapeError);
  CHECK_THROWS_AS(orbit_target_search(r, {Vector::Ones(2), -0.1, 10}), DomainError);
  CHECK_THROWS_AS(orbit_target_search(r, {Vector::Ones(2), 0.1, 0}), DomainError);
  CHECK_THROWS_AS(orbit_target_search(r, {(Vector(2) << 2.7, -1.9).finished(), 1e-9, 10}), SearchBudgetError);
}
