#pragma once

// Commuting tuples of real Jordan-form matrices and closed-form evaluation of
// their multi-index powers.
//
// A tuple T = (T_1, ..., T_k) shares one block structure (n_1, ..., n_p); the
// operator T_nu is the direct sum of Jordan blocks Jrd(n_b, gamma_nu^(b)). For
// a multi-index m the power T^m = T_1^m_1 ... T_k^m_k is block diagonal and
// each block is an upper-triangular Toeplitz matrix
//
//   gamma^m * [1 d_1 d_2 ...; 0 1 d_1 ...; ...]
//
// with gamma^m = prod_nu gamma_nu^m_nu and d_j the sum over compositions
// |beta| = j of prod_nu C(m_nu, beta_nu) / gamma_nu^beta_nu.

#include <cstdint>
#include <span>
#include <vector>

#include "hypertuple/linalg.hpp"

namespace hypertuple {

/// Block dimensions n_1 ... n_p shared by every operator of a tuple.
class BlockStructure {
 public:
  explicit BlockStructure(std::vector<int> dims);

  const std::vector<int>& dims() const noexcept { return dims_; }
  int block_count() const noexcept { return static_cast<int>(dims_.size()); }
  int dimension() const noexcept { return dimension_; }
  /// Index of the first coordinate of block b.
  int offset(int b) const { return offsets_.at(static_cast<std::size_t>(b)); }

  bool operator==(const BlockStructure&) const = default;

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int dimension_ = 0;
};

/// Exponent vector m in N_0^k.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<std::uint64_t> m) : m_(std::move(m)) {}

  static MultiIndex zeros(std::size_t k) { return MultiIndex(std::vector<std::uint64_t>(k, 0)); }
  /// Throws DomainError on a negative entry.
  static MultiIndex from_signed(std::span<const std::int64_t> m);

  std::size_t size() const noexcept { return m_.size(); }
  std::uint64_t operator[](std::size_t i) const { return m_[i]; }
  const std::vector<std::uint64_t>& values() const noexcept { return m_; }
  bool is_zero() const noexcept;

  MultiIndex operator+(const MultiIndex& other) const;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<std::uint64_t> m_;
};

/// k commuting Jordan-form operators. eigenvalues(b, nu) is the eigenvalue of
/// block b in operator nu; all entries are nonzero.
class JordanTuple {
 public:
  JordanTuple(BlockStructure structure, Matrix eigenvalues);

  const BlockStructure& structure() const noexcept { return structure_; }
  const Matrix& eigenvalues() const noexcept { return eigenvalues_; }
  int k() const noexcept { return static_cast<int>(eigenvalues_.cols()); }
  int dimension() const noexcept { return structure_.dimension(); }

  /// Eigenvalues of block b across the k operators.
  std::vector<double> block_eigenvalues(int b) const;

  /// Dense n x n matrix of operator nu.
  Matrix operator_matrix(int nu) const;

 private:
  BlockStructure structure_;
  Matrix eigenvalues_;
};

/// Eigenvalue grids of a tuple whose blocks all have dimension at most two:
/// gamma is p1 x k (2-blocks), cgrid is p2 x k (1-blocks).
class EigenGrid {
 public:
  EigenGrid(Matrix gamma, Matrix cgrid);

  /// Inverse of to_tuple; the tuple must list its 2-blocks before its 1-blocks.
  static EigenGrid from_tuple(const JordanTuple& tuple);

  const Matrix& gamma() const noexcept { return gamma_; }
  const Matrix& cgrid() const noexcept { return cgrid_; }
  int p1() const noexcept { return static_cast<int>(gamma_.rows()); }
  int p2() const noexcept { return static_cast<int>(cgrid_.rows()); }
  int k() const noexcept { return static_cast<int>(gamma_.cols()); }
  int dimension() const noexcept { return 2 * p1() + p2(); }

  JordanTuple to_tuple() const;

 private:
  Matrix gamma_;
  Matrix cgrid_;
};

/// Diagonals of one block of T^m: leading = gamma^m and d = (d_1, ..., d_{dim-1}).
struct DiagonalProfile {
  double leading = 1.0;
  std::vector<double> d;
};

/// C(m, j) as a double; zero when m < j. Exact whenever the value fits in 128
/// bits. Throws std::overflow_error if it exceeds the double range.
double binomial(std::uint64_t m, unsigned j);

/// prod_nu gammas[nu]^m[nu], evaluated in the log domain when direct
/// multiplication could overflow.
double signed_power_product(std::span<const double> gammas, const MultiIndex& m);

/// (Jrd(dim, gamma))^m.
Matrix block_power(int dim, double gamma, std::uint64_t m);

/// d_1 = sum_nu m_nu / gamma_nu.
double diag_d1(std::span<const double> gammas, const MultiIndex& m);

/// d_2 = ((d_1)^2 - sum_nu m_nu / gamma_nu^2) / 2.
double diag_d2(std::span<const double> gammas, const MultiIndex& m);

DiagonalProfile tuple_block_diagonals(std::span<const double> gammas, int dim, const MultiIndex& m);

/// T^m y through the per-block closed form.
Vector tuple_power_apply(const JordanTuple& tuple, const MultiIndex& m, const Vector& y);

/// T^m y through explicit dense operator matrices and repeated squaring. No
/// closed form is used; each block carries a power-of-two exponent so that
/// multi-indices in the hundreds of millions stay within double range.
Vector naive_power_apply(const JordanTuple& tuple, const MultiIndex& m, const Vector& y);

/// V(m, Gamma, C) = ((gamma^(1))^m, sum m/gamma^(1), ..., (c^(1))^m, ...).
Vector v_vector(const MultiIndex& m, const EigenGrid& grid);

/// The n x k linearization: rows log|gamma^(b)| and 1/gamma^(b) per 2-block,
/// then log|c^(b)| per 1-block. Requires p1 >= 1.
Matrix build_L(const EigenGrid& grid);

/// The vector w with zeros at positions 1, 3, ..., 2p1-1 (1-based) and ones
/// elsewhere. T^m w = v_to_orbit(V(m)).
Vector hypercyclic_vector(int p1, int p2);

/// Maps V-coordinates to orbit coordinates of w:
/// (P, D) per 2-block becomes (P * D, P); 1-block entries are unchanged.
Vector v_to_orbit(const Vector& v, int p1, int p2);

/// Inverse of v_to_orbit. Needs a nonzero second coordinate in every 2-block.
Vector orbit_to_v(const Vector& orbit, int p1, int p2);

}  // namespace hypertuple
