#include "hypertuple/linalg.hpp"

#include <cmath>

#include "hypertuple/errors.hpp"

namespace hypertuple {

double determinant(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("determinant: matrix is not square");
  if (a.rows() == 0) return 1.0;
  return a.partialPivLu().determinant();
}

Vector solve(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw ShapeError("solve: shape mismatch");
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw NumericError("solve: matrix is singular to working precision");
  Vector x = lu.solve(b);
  const Vector residual = b - a * x;
  x += lu.solve(residual);
  return x;
}

double smallest_singular_value(const Matrix& a) {
  if (a.size() == 0) throw ShapeError("smallest_singular_value: empty matrix");
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().minCoeff();
}

Matrix drop_column(const Matrix& a, Eigen::Index col) {
  Matrix out(a.rows(), a.cols() - 1);
  for (Eigen::Index j = 0, k = 0; j < a.cols(); ++j) {
    if (j == col) continue;
    out.col(k++) = a.col(j);
  }
  return out;
}

}  // namespace hypertuple
