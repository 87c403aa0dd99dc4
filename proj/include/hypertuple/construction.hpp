#pragma once

// Construction of hypercyclic (n+1)-tuples of n x n Jordan-form matrices with
// p1 blocks of dimension two and p2 blocks of dimension one (n = 2 p1 + p2).
//
// The tuple is read off a u-vector system: n+1 vectors u_nu in R^n, the
// columns of
//
//   L+ = [ log a_nu^(b) ; s_nu^(b) / a_nu^(b) ]_{b <= p1}  stacked over
//        [ log delta_nu^(b) ]_{b <= p2},
//
// with u_1..u_n independent and u_{n+1} = -sum c_nu u_nu for positive
// coefficients c_nu with 1, c_1, ..., c_n linearly independent over Q. The
// sign s_nu^(b) is the sign of the eigenvalue gamma_nu^(b).
//
// Indices in this API are 0-based: operator nu = 0..n, 2-block b = 0..p1-1.

#include <cstdint>
#include <string>
#include <vector>

#include "hypertuple/jordan_core.hpp"
#include "hypertuple/linalg.hpp"

namespace hypertuple {

struct Shape {
  int n = 2;
  int p1 = 1;
  int p2 = 0;

  bool operator==(const Shape&) const = default;
};

/// Throws ShapeError unless p1 >= 1, p2 >= 0, 2 p1 + p2 == n and 2 <= n <= 64.
void validate_shape(const Shape& shape);

struct ConstructionParams {
  Shape shape;
  std::uint64_t seed = 0;
  double det_tol = 1e-6;
  double residual_tol = 1e-8;
  /// Required slack in the positivity condition on the 1/a_{n+1} auxiliaries.
  double aux_margin = 0.1;
  /// Redraws allowed per recursion level of the base matrix.
  int max_retries = 32;

  bool operator==(const ConstructionParams&) const = default;
};

/// True when gamma_nu^(b) carries a minus sign. For n >= 3 that is nu == b and
/// nu == n (the last operator); for n = 2 only the last operator is negative.
bool gamma_negative(const Shape& shape, int b, int nu);

/// True when c_nu^(b) carries a minus sign: exactly at nu == p1 + b.
bool c_negative(const Shape& shape, int b, int nu);

// ---------------------------------------------------------------------------
// Scalar root of x^(c+1) - delta1 x - delta2 c = 0.

struct RootSolution {
  double x = 0.0;
  /// log x, accurate even when x rounds to 1 (large c).
  double log_x = 0.0;
  int iterations = 0;
};

/// Unique positive root, parameterized by log delta1 and log delta2 so that
/// huge or tiny coefficients stay representable. Solved for y = log x, where
/// the equation reads (c+1) y = log(delta1 e^y + delta2 c) and the left side
/// minus the right is strictly increasing.
RootSolution solve_root_log(double c, double log_delta1, double log_delta2);

/// Unique positive root x(c). Throws DomainError unless c, delta1, delta2 > 0.
double solve_unique_positive_root(double c, double delta1, double delta2);

/// (x^(c+1) - delta1 x - delta2 c) / (delta1 x + delta2 c), evaluated through
/// log x.
double root_relative_residual(double c, double log_delta1, double log_delta2, double log_x);

// ---------------------------------------------------------------------------
// Base matrix with rows u_1..u_{n-1} and the fixed last row (0,1,...,0,1,0..0).

struct BaseMatrix {
  Shape shape;
  Matrix matrix;  ///< n x n
  Matrix a;       ///< p1 x (n-1): a_nu^(b), nu = 0..n-2
  Matrix delta;   ///< p2 x (n-1)
  double det = 0.0;
};

/// Assembles the base matrix from explicit entries and checks |det| >= det_tol
/// (ConstructionError otherwise).
BaseMatrix base_matrix_from_entries(int p1, int p2, const Matrix& a, const Matrix& delta, double det_tol);

/// Inductive construction: (1,0) is the base case; (p1,p2) comes from
/// (p1,p2-1) with the free entry log delta_{n-1}^(p2) solved so that det = 1
/// (or, when that needs |log delta| > 2, set to the endpoint +-2 with the
/// larger |det|), and (p1,0) comes from (p1-1,1) with a_{n-1}^(p1) scanned
/// over e^t, t = -3, -2.5, ..., 3, for the largest |det|.
BaseMatrix build_base_matrix(int p1, int p2, std::uint64_t seed, double det_tol = 1e-6, int max_retries = 32);

// ---------------------------------------------------------------------------

class USystem {
 public:
  /// Derives u_1..u_{n+1} from the entries. a is p1 x (n+1), delta is
  /// p2 x (n+1), coeffs has n entries; all strictly positive.
  USystem(Shape shape, Matrix a, Matrix delta, Vector coeffs);

  const Shape& shape() const noexcept { return shape_; }
  const Matrix& a() const noexcept { return a_; }
  const Matrix& delta() const noexcept { return delta_; }
  const Vector& coeffs() const noexcept { return coeffs_; }
  /// n x (n+1); column nu is u_{nu+1}.
  const Matrix& u() const noexcept { return u_; }
  /// n x n matrix with columns u_1..u_n.
  Matrix basis() const { return u_.leftCols(shape_.n); }

 private:
  Shape shape_;
  Matrix a_;
  Matrix delta_;
  Vector coeffs_;
  Matrix u_;
};

struct ConstructionReport {
  double base_det = 0.0;
  double det = 0.0;              ///< det(u_1..u_n)
  double residual = 0.0;         ///< ||u_{n+1} + sum c_nu u_nu||
  double min_omit_one_det = 0.0; ///< min over omitted nu of |det| of the other n
  std::vector<double> aux_margins;
  double max_root_residual = 0.0;
  int cn_exponent = 0;           ///< j in c_n = 2^j sqrt(p)
  double aux_scale = 1.0;        ///< t scaling c_{p1+1}..c_{n-1}
};

struct UConstruction {
  USystem system;
  ConstructionReport report;
};

/// Full construction with diagnostics. Deterministic in params.
UConstruction build_u_system_detailed(const ConstructionParams& params);
USystem build_u_system(const ConstructionParams& params);

/// Columns of the returned n x (n+1) matrix are u_1..u_{n+1}.
Matrix build_Lplus(const USystem& system);

/// Irrational surrogate q + r sqrt(prime) with q, r in {1/8, ..., 8/8}.
/// Distinct primes per coefficient keep 1, c_1, ..., c_n independent over Q.
double irrational_surrogate(std::uint64_t q_eighths, std::uint64_t r_eighths, std::uint64_t prime);

/// The i-th prime (0-based).
std::uint64_t nth_prime(int i);

// ---------------------------------------------------------------------------

struct TupleRealization {
  ConstructionParams params;
  USystem usystem;
  EigenGrid grid;
  JordanTuple tuple;
};

/// Signed eigenvalue grids and the (n+1)-tuple for a u-vector system.
TupleRealization assemble_tuple(const USystem& system, ConstructionParams params = {});

/// build_u_system followed by assemble_tuple.
TupleRealization construct_realization(const ConstructionParams& params);

struct InvariantCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Re-runs every realization invariant: shape, positivity, sign layout,
/// determinant, residual, omit-one independence, auxiliary margin and the
/// closed-form/oracle equivalence on seeded random multi-indices.
std::vector<InvariantCheck> check_realization(const TupleRealization& realization);

}  // namespace hypertuple
