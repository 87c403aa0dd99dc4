#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hypertuple/construction.hpp"
#include "hypertuple/errors.hpp"
#include "oracles.hpp"

using namespace hypertuple;

namespace {

std::vector<Shape> all_shapes(int max_n) {
  std::vector<Shape> out;
  for (int n = 2; n <= max_n; ++n)
    for (int p1 = 1; 2 * p1 <= n; ++p1) out.push_back({n, p1, n - 2 * p1});
  return out;
}

oracle::Mat columns_without(const Matrix& u, Eigen::Index skip) {
  const auto n = static_cast<std::size_t>(u.rows());
  oracle::Mat m(n, oracle::Vec(n));
  std::size_t col = 0;
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    if (j == skip) continue;
    for (std::size_t i = 0; i < n; ++i) m[i][col] = u(static_cast<Eigen::Index>(i), j);
    ++col;
  }
  return m;
}

// u-vectors rebuilt from the raw entries with the sign rule written out here.
Matrix u_from_entries(const USystem& s) {
  const Shape& sh = s.shape();
  Matrix u(sh.n, sh.n + 1);
  for (int nu = 0; nu <= sh.n; ++nu) {
    for (int b = 0; b < sh.p1; ++b) {
      const bool minus = sh.n == 2 ? nu == 2 : (nu == b || nu == sh.n);
      u(2 * b, nu) = std::log(s.a()(b, nu));
      u(2 * b + 1, nu) = (minus ? -1.0 : 1.0) / s.a()(b, nu);
    }
    for (int b = 0; b < sh.p2; ++b) u(2 * sh.p1 + b, nu) = std::log(s.delta()(b, nu));
  }
  return u;
}

}  // namespace

TEST_CASE("root solver analytic cases") {
  CHECK(std::abs(solve_unique_positive_root(1.0, 1.0, 1.0) - (1.0 + std::sqrt(5.0)) / 2.0) <= 1e-12);
  CHECK(std::abs(solve_unique_positive_root(2.0, 3.0, 1.0) - 2.0) <= 1e-12);
}

TEST_CASE("root solver two-sided bound for large c") {
  for (double c : {1e2, 1e4, 1e6}) {
    const RootSolution r = solve_root_log(c, 0.0, 0.0);
    CHECK(r.log_x > std::log(c) / (c + 1.0));
    CHECK(r.log_x < std::log(2.0 * c) / c);
    CHECK(std::abs(root_relative_residual(c, 0.0, 0.0, r.log_x)) <= 1e-12);
  }
}

TEST_CASE("root solver residual over a wide parameter range") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> logc(-3.0, 14.0), logd(-20.0, 20.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double c = std::exp(logc(gen)), l1 = logd(gen), l2 = logd(gen);
    const RootSolution r = solve_root_log(c, l1, l2);
    CHECK(std::abs(root_relative_residual(c, l1, l2, r.log_x)) <= 1e-12);
    // the root lies above delta1^(1/c), as in the uniqueness argument
    CHECK(r.log_x > l1 / c - 1e-15 * (1.0 + std::abs(l1 / c)));
  }
}

TEST_CASE("root solver preconditions") {
  CHECK_THROWS_AS(solve_unique_positive_root(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(solve_unique_positive_root(1.0, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(solve_unique_positive_root(1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("root solver limit: x(c) tends to 1") {
  // realistic coefficients: the auxiliaries of an n = 3 system
  const USystem s = build_u_system({{3, 1, 1}, 1});
  const Vector& c = s.coeffs();
  for (int b = 0; b < 2; ++b) {
    double inv_tilde = 0.0, log_hat = 0.0;
    for (int nu = 0; nu < 2; ++nu) {
      const double x = b == 0 ? s.a()(0, nu) : s.delta()(0, nu);
      inv_tilde += (b == 0 && nu == 0 ? -1.0 : 1.0) * c(nu) / x;
      log_hat -= c(nu) * std::log(x);
    }
    const double l1 = log_hat + std::log(inv_tilde), l2 = log_hat, cn = 1e6;
    const RootSolution r = solve_root_log(cn, l1, l2);
    CHECK(std::abs(r.x - 1.0) < 0.05);
    CHECK(r.log_x > (l2 + std::log(cn)) / (cn + 1.0));
    CHECK(r.log_x < std::log((std::exp(l2) + 1.0) * cn) / cn);
  }
}

TEST_CASE("base matrix examples") {
  Matrix a(1, 1);
  a << std::exp(1.0);
  const BaseMatrix b = base_matrix_from_entries(1, 0, a, Matrix(0, 1), 1e-6);
  CHECK(b.det == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b.matrix(0, 1) == doctest::Approx(-1.0 / std::exp(1.0)));
  CHECK(b.matrix(1, 0) == 0.0);
  CHECK(b.matrix(1, 1) == 1.0);

  a << 1.0;
  CHECK_THROWS_AS(base_matrix_from_entries(1, 0, a, Matrix(0, 1), 1e-6), ConstructionError);
}

TEST_CASE("inductive base matrix for every shape") {
  for (const Shape& s : all_shapes(8)) {
    CAPTURE(s.n);
    CAPTURE(s.p1);
    const BaseMatrix b = build_base_matrix(s.p1, s.p2, 99);
    CHECK(std::abs(b.det) >= 1e-6);
    oracle::Mat m(static_cast<std::size_t>(s.n), oracle::Vec(static_cast<std::size_t>(s.n)));
    for (int i = 0; i < s.n; ++i)
      for (int j = 0; j < s.n; ++j) m[i][j] = b.matrix(i, j);
    CHECK(oracle::det(m) == doctest::Approx(b.det).epsilon(1e-9));
    // last row: ones at the reciprocal columns of the 2-blocks
    for (int j = 0; j < s.n; ++j) CHECK(b.matrix(s.n - 1, j) == ((j < 2 * s.p1 && j % 2 == 1) ? 1.0 : 0.0));
    if (s.p2 >= 1) {
      // the solved entry gives det = 1 unless it was capped at |log delta| = 2
      const double free_log = std::log(b.delta(s.p2 - 1, s.n - 2));
      const bool capped = std::abs(std::abs(free_log) - 2.0) < 1e-12;
      CHECK((capped || std::abs(b.det - 1.0) < 1e-9));
      CHECK(std::abs(free_log) <= 2.0 + 1e-12);
    }
    CHECK((b.a.array() > 0.0).all());
  }
}

TEST_CASE("every shape up to n = 8: u-system invariants by independent recomputation") {
  for (const Shape& s : all_shapes(8)) {
    CAPTURE(s.n);
    CAPTURE(s.p1);
    const UConstruction built = build_u_system_detailed({s, 7});
    const USystem& sys = built.system;
    const int n = s.n;

    CHECK((sys.a().array() > 0.0).all());
    CHECK((sys.delta().array() > 0.0).all());
    CHECK((sys.coeffs().array() > 0.0).all());

    const Matrix u = u_from_entries(sys);
    CHECK((u - sys.u()).norm() == 0.0);
    CHECK(build_Lplus(sys) == sys.u());

    // det(u_1..u_n) and every omit-one determinant through textbook elimination
    for (Eigen::Index skip = 0; skip <= n; ++skip) {
      const double d = oracle::det(columns_without(u, skip));
      CHECK(std::abs(d) > 1e-9);
      if (skip == n) CHECK(std::abs(d) >= 1e-6);
    }

    Vector r = u.col(n);
    for (int nu = 0; nu < n; ++nu) r += sys.coeffs()(nu) * u.col(nu);
    CHECK(r.norm() <= 1e-8);

    for (double m : built.report.aux_margins) CHECK(m >= 0.1);
    if (n >= 3) CHECK(built.report.aux_margins.size() == static_cast<std::size_t>(s.p1));
  }
}

TEST_CASE("root equations hold at the returned a_n and delta_n") {
  for (const Shape& s : all_shapes(6)) {
    if (s.n == 2) continue;
    const USystem sys = build_u_system({s, 3});
    const int n = s.n;
    const Vector& c = sys.coeffs();
    for (int row = 0; row < s.p1 + s.p2; ++row) {
      const bool is_a = row < s.p1;
      const int b = is_a ? row : row - s.p1;
      const auto entry = [&](int nu) { return is_a ? sys.a()(b, nu) : sys.delta()(b, nu); };
      double inv_tilde = 0.0, log_hat = 0.0;
      for (int nu = 0; nu < n - 1; ++nu) {
        inv_tilde += (is_a && nu == b ? -1.0 : 1.0) * c(nu) / entry(nu);
        log_hat -= c(nu) * std::log(entry(nu));
      }
      // x^(c+1) = (hat/tilde) x + hat c, compared in logs
      const double x = entry(n - 1), cn = c(n - 1);
      const double lhs = (cn + 1.0) * std::log(x);
      const double rhs = log_hat + std::log(inv_tilde * x + cn);
      CHECK(std::abs(std::expm1(lhs - rhs)) <= 1e-10);
    }
  }
}

TEST_CASE("n = 2: u_3 = -(c_1 u_1 + c_2 u_2) and the L+ layout") {
  const USystem sys = build_u_system({{2, 1, 0}, 7});
  const Matrix L = build_Lplus(sys);
  const Matrix& a = sys.a();
  for (int nu = 0; nu < 3; ++nu) {
    CHECK(L(0, nu) == std::log(a(0, nu)));
    CHECK(L(1, nu) == (nu == 2 ? -1.0 : 1.0) / a(0, nu));
  }
  const Vector r = L.col(2) + sys.coeffs()(0) * L.col(0) + sys.coeffs()(1) * L.col(1);
  CHECK(r.norm() <= 1e-8);
}

TEST_CASE("n = 3 (p1 = 1, p2 = 1): all 3-subsets of u_1..u_4 are independent") {
  const USystem sys = build_u_system({{3, 1, 1}, 7});
  CHECK(std::abs(oracle::det(columns_without(sys.u(), 3))) >= 1e-6);
  for (Eigen::Index skip = 0; skip < 4; ++skip) CHECK(std::abs(oracle::det(columns_without(sys.u(), skip))) > 1e-9);
}

TEST_CASE("determinism: same params, bit-identical system") {
  for (const Shape& s : all_shapes(8)) {
    const USystem a = build_u_system({s, 42});
    const USystem b = build_u_system({s, 42});
    CHECK(a.a() == b.a());
    CHECK(a.delta() == b.delta());
    CHECK(a.coeffs() == b.coeffs());
    CHECK(a.u() == b.u());
  }
  CHECK(build_u_system({{4, 2, 0}, 1}).a() != build_u_system({{4, 2, 0}, 2}).a());
}

TEST_CASE("shape validation") {
  CHECK_THROWS_AS(validate_shape({3, 1, 0}), ShapeError);
  CHECK_THROWS_AS(validate_shape({2, 0, 2}), ShapeError);
  CHECK_THROWS_AS(validate_shape({66, 33, 0}), ShapeError);
  CHECK_THROWS_AS(build_u_system({{3, 1, 0}, 1}), ShapeError);
  CHECK_NOTHROW(validate_shape({5, 2, 1}));
}

TEST_CASE("surrogates use distinct primes") {
  CHECK(nth_prime(0) == 2);
  CHECK(nth_prime(1) == 3);
  CHECK(nth_prime(9) == 29);
  CHECK(irrational_surrogate(8, 4, 2) == doctest::Approx(1.0 + 0.5 * std::sqrt(2.0)));
}

TEST_CASE("assemble_tuple sign layouts") {
  SUBCASE("n = 2: gamma = (a1, a2, -a3)") {
    const TupleRealization r = construct_realization({{2, 1, 0}, 7});
    const Matrix& a = r.usystem.a();
    CHECK(r.grid.gamma()(0, 0) == a(0, 0));
    CHECK(r.grid.gamma()(0, 1) == a(0, 1));
    CHECK(r.grid.gamma()(0, 2) == -a(0, 2));
    CHECK(r.tuple.k() == 3);
    CHECK(r.tuple.structure().dims() == std::vector<int>{2});
  }
  SUBCASE("n = 3, p1 = 1, p2 = 1") {
    const TupleRealization r = construct_realization({{3, 1, 1}, 7});
    // gamma: minus at operators 1 and 4 (1-based)
    for (int nu = 0; nu < 4; ++nu) CHECK((r.grid.gamma()(0, nu) < 0.0) == (nu == 0 || nu == 3));
    // c: a single minus at operator 2, see the sign-layout note in the README
    for (int nu = 0; nu < 4; ++nu) CHECK((r.grid.cgrid()(0, nu) < 0.0) == (nu == 1));
    CHECK(r.tuple.structure().dims() == std::vector<int>{2, 1});
  }
  SUBCASE("|gamma| = a and |c| = delta everywhere") {
    for (const Shape& s : all_shapes(7)) {
      const TupleRealization r = construct_realization({s, 5});
      CHECK(r.grid.gamma().cwiseAbs() == r.usystem.a());
      CHECK(r.grid.cgrid().cwiseAbs() == r.usystem.delta());
      CHECK(r.tuple.k() == s.n + 1);
    }
  }
}

TEST_CASE("check_realization passes on fresh builds and catches planted corruption") {
  const TupleRealization r = construct_realization({{4, 1, 2}, 7});
  for (const auto& c : check_realization(r)) {
    CAPTURE(c.name);
    CHECK(c.passed);
  }

  Matrix gamma = r.grid.gamma();
  gamma(0, 1) = -gamma(0, 1);
  const TupleRealization flipped{r.params, r.usystem, EigenGrid(gamma, r.grid.cgrid()),
                                 EigenGrid(gamma, r.grid.cgrid()).to_tuple()};
  bool sign_failed = false;
  for (const auto& c : check_realization(flipped))
    if (c.name == "sign_layout") sign_failed = !c.passed;
  CHECK(sign_failed);
}
