#pragma once

// Small dense linear algebra used across the library. Matrices are dense
// row-major; everything here is desk scale (n <= 64).

#include <Eigen/Dense>

namespace hypertuple {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Largest supported total dimension.
inline constexpr int kMaxDimension = 64;

/// Determinant via partially pivoted LU.
double determinant(const Matrix& a);

/// Solves a x = b with one step of iterative refinement. Throws NumericError if
/// the matrix is singular to working precision.
Vector solve(const Matrix& a, const Vector& b);

/// Smallest singular value, from a two-sided Jacobi SVD.
double smallest_singular_value(const Matrix& a);

/// Returns a with column `col` removed.
Matrix drop_column(const Matrix& a, Eigen::Index col);

}  // namespace hypertuple
