#include "hypertuple/jordan_core.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hypertuple/errors.hpp"

namespace hypertuple {

namespace {

void require_nonzero(std::span<const double> gammas, const char* where) {
  for (double g : gammas) {
    if (g == 0.0 || !std::isfinite(g)) {
      throw DomainError(std::string(where) + ": eigenvalues must be finite and nonzero");
    }
  }
}

void require_same_length(std::span<const double> gammas, const MultiIndex& m, const char* where) {
  if (gammas.size() != m.size()) {
    throw ShapeError(std::string(where) + ": expected " + std::to_string(gammas.size()) +
                     " exponents, got " + std::to_string(m.size()));
  }
}

std::span<const double> row_span(const Matrix& grid, Eigen::Index row) {
  return {grid.data() + row * grid.cols(), static_cast<std::size_t>(grid.cols())};
}

}  // namespace

BlockStructure::BlockStructure(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ShapeError("BlockStructure: at least one block is required");
  offsets_.reserve(dims_.size());
  for (int d : dims_) {
    if (d < 1) throw ShapeError("BlockStructure: block dimensions must be positive");
    offsets_.push_back(dimension_);
    dimension_ += d;
    if (dimension_ > kMaxDimension) {
      throw ShapeError("BlockStructure: total dimension exceeds " + std::to_string(kMaxDimension));
    }
  }
}

MultiIndex MultiIndex::from_signed(std::span<const std::int64_t> m) {
  std::vector<std::uint64_t> out;
  out.reserve(m.size());
  for (auto v : m) {
    if (v < 0) throw DomainError("MultiIndex: entries must be non-negative");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return MultiIndex(std::move(out));
}

bool MultiIndex::is_zero() const noexcept {
  return std::all_of(m_.begin(), m_.end(), [](std::uint64_t v) { return v == 0; });
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.size() != size()) throw ShapeError("MultiIndex: length mismatch in sum");
  std::vector<std::uint64_t> out(m_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += other.m_[i];
  return MultiIndex(std::move(out));
}

JordanTuple::JordanTuple(BlockStructure structure, Matrix eigenvalues)
    : structure_(std::move(structure)), eigenvalues_(std::move(eigenvalues)) {
  if (eigenvalues_.rows() != structure_.block_count()) {
    throw ShapeError("JordanTuple: eigenvalue grid must have one row per block");
  }
  if (eigenvalues_.cols() < 1) throw ShapeError("JordanTuple: at least one operator is required");
  require_nonzero({eigenvalues_.data(), static_cast<std::size_t>(eigenvalues_.size())}, "JordanTuple");
}

std::vector<double> JordanTuple::block_eigenvalues(int b) const {
  auto row = row_span(eigenvalues_, b);
  return {row.begin(), row.end()};
}

Matrix JordanTuple::operator_matrix(int nu) const {
  if (nu < 0 || nu >= k()) throw ShapeError("operator_matrix: operator index out of range");
  const int n = dimension();
  Matrix t = Matrix::Zero(n, n);
  for (int b = 0; b < structure_.block_count(); ++b) {
    const int off = structure_.offset(b);
    const int dim = structure_.dims()[static_cast<std::size_t>(b)];
    for (int i = 0; i < dim; ++i) {
      t(off + i, off + i) = eigenvalues_(b, nu);
      if (i + 1 < dim) t(off + i, off + i + 1) = 1.0;
    }
  }
  return t;
}

EigenGrid::EigenGrid(Matrix gamma, Matrix cgrid) : gamma_(std::move(gamma)), cgrid_(std::move(cgrid)) {
  if (gamma_.rows() == 0 && cgrid_.rows() == 0) throw ShapeError("EigenGrid: no blocks");
  if (gamma_.rows() == 0) gamma_.resize(0, cgrid_.cols());
  if (cgrid_.rows() == 0) cgrid_.resize(0, gamma_.cols());
  if (gamma_.cols() != cgrid_.cols()) throw ShapeError("EigenGrid: Gamma and C disagree on k");
  if (gamma_.cols() < 1) throw ShapeError("EigenGrid: at least one operator is required");
  if (dimension() > kMaxDimension) throw ShapeError("EigenGrid: dimension exceeds supported envelope");
  require_nonzero({gamma_.data(), static_cast<std::size_t>(gamma_.size())}, "EigenGrid");
  require_nonzero({cgrid_.data(), static_cast<std::size_t>(cgrid_.size())}, "EigenGrid");
}

EigenGrid EigenGrid::from_tuple(const JordanTuple& tuple) {
  const auto& dims = tuple.structure().dims();
  int p1 = 0;
  while (p1 < static_cast<int>(dims.size()) && dims[static_cast<std::size_t>(p1)] == 2) ++p1;
  for (std::size_t b = static_cast<std::size_t>(p1); b < dims.size(); ++b) {
    if (dims[b] != 1) throw ShapeError("EigenGrid: tuple must list 2-blocks then 1-blocks");
  }
  const int p2 = static_cast<int>(dims.size()) - p1;
  return EigenGrid(tuple.eigenvalues().topRows(p1), tuple.eigenvalues().bottomRows(p2));
}

JordanTuple EigenGrid::to_tuple() const {
  std::vector<int> dims(static_cast<std::size_t>(p1()), 2);
  dims.insert(dims.end(), static_cast<std::size_t>(p2()), 1);
  Matrix ev(p1() + p2(), k());
  ev.topRows(p1()) = gamma_;
  ev.bottomRows(p2()) = cgrid_;
  return JordanTuple(BlockStructure(std::move(dims)), std::move(ev));
}

double binomial(std::uint64_t m, unsigned j) {
  if (j > m) return 0.0;
  const std::uint64_t r = std::min<std::uint64_t>(j, m - j);
  __extension__ typedef unsigned __int128 u128;
  constexpr u128 kMax = ~u128{0};
  u128 exact = 1;
  std::uint64_t i = 1;
  for (; i <= r; ++i) {
    const u128 factor = m - r + i;
    if (exact > kMax / factor) break;
    // exact * factor is divisible by i: it equals i * C(m - r + i, i).
    exact = exact * factor / i;
  }
  if (i > r) return static_cast<double>(exact);
  long double approx = static_cast<long double>(exact);
  for (; i <= r; ++i) {
    approx = approx * static_cast<long double>(m - r + i) / static_cast<long double>(i);
    if (approx > static_cast<long double>(DBL_MAX)) {
      throw std::overflow_error("binomial: C(" + std::to_string(m) + ", " + std::to_string(j) +
                                ") exceeds double range");
    }
  }
  return static_cast<double>(approx);
}

double signed_power_product(std::span<const double> gammas, const MultiIndex& m) {
  require_same_length(gammas, m, "signed_power_product");
  require_nonzero(gammas, "signed_power_product");
  bool negative = false;
  double up = 0.0;
  double down = 0.0;
  double log_sum = 0.0;
  for (std::size_t nu = 0; nu < gammas.size(); ++nu) {
    if (m[nu] == 0) continue;
    if (gammas[nu] < 0.0 && (m[nu] & 1u)) negative = !negative;
    const double term = static_cast<double>(m[nu]) * std::log(std::abs(gammas[nu]));
    (term > 0.0 ? up : down) += term;
    log_sum += term;
  }
  double magnitude;
  if (up < 700.0 && down > -700.0) {
    magnitude = 1.0;
    for (std::size_t nu = 0; nu < gammas.size(); ++nu) {
      if (m[nu] != 0) magnitude *= std::pow(std::abs(gammas[nu]), static_cast<double>(m[nu]));
    }
  } else {
    magnitude = std::exp(log_sum);
  }
  return negative ? -magnitude : magnitude;
}

double diag_d1(std::span<const double> gammas, const MultiIndex& m) {
  require_same_length(gammas, m, "diag_d1");
  require_nonzero(gammas, "diag_d1");
  double s = 0.0;
  for (std::size_t nu = 0; nu < gammas.size(); ++nu) s += static_cast<double>(m[nu]) / gammas[nu];
  return s;
}

double diag_d2(std::span<const double> gammas, const MultiIndex& m) {
  const double d1 = diag_d1(gammas, m);
  double s = 0.0;
  for (std::size_t nu = 0; nu < gammas.size(); ++nu) {
    s += static_cast<double>(m[nu]) / (gammas[nu] * gammas[nu]);
  }
  return 0.5 * (d1 * d1 - s);
}

DiagonalProfile tuple_block_diagonals(std::span<const double> gammas, int dim, const MultiIndex& m) {
  require_same_length(gammas, m, "tuple_block_diagonals");
  require_nonzero(gammas, "tuple_block_diagonals");
  if (dim < 1) throw ShapeError("tuple_block_diagonals: block dimension must be positive");

  // Coefficients of prod_nu (sum_beta C(m_nu, beta) (z / gamma_nu)^beta),
  // truncated at degree dim - 1.
  const auto width = static_cast<std::size_t>(dim);
  std::vector<double> poly(width, 0.0);
  poly[0] = 1.0;
  std::vector<double> factor(width);
  std::vector<double> next(width);
  for (std::size_t nu = 0; nu < gammas.size(); ++nu) {
    if (m[nu] == 0) continue;
    for (std::size_t beta = 0; beta < width; ++beta) {
      factor[beta] = binomial(m[nu], static_cast<unsigned>(beta)) *
                     std::pow(gammas[nu], -static_cast<double>(beta));
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < width; ++i) {
      if (poly[i] == 0.0) continue;
      for (std::size_t beta = 0; i + beta < width; ++beta) next[i + beta] += poly[i] * factor[beta];
    }
    poly.swap(next);
  }

  DiagonalProfile out;
  out.leading = signed_power_product(gammas, m);
  out.d.assign(poly.begin() + 1, poly.end());
  return out;
}

Matrix block_power(int dim, double gamma, std::uint64_t m) {
  if (gamma == 0.0) throw DomainError("block_power: zero eigenvalue");
  const double g[] = {gamma};
  const auto profile = tuple_block_diagonals(g, dim, MultiIndex({m}));
  Matrix out = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    out(i, i) = profile.leading;
    for (int j = 1; i + j < dim; ++j) out(i, i + j) = profile.leading * profile.d[static_cast<std::size_t>(j - 1)];
  }
  return out;
}

Vector tuple_power_apply(const JordanTuple& tuple, const MultiIndex& m, const Vector& y) {
  if (y.size() != tuple.dimension()) throw ShapeError("tuple_power_apply: vector length != n");
  if (static_cast<int>(m.size()) != tuple.k()) throw ShapeError("tuple_power_apply: multi-index length != k");
  const auto& s = tuple.structure();
  Vector out(y.size());
  for (int b = 0; b < s.block_count(); ++b) {
    const int off = s.offset(b);
    const int dim = s.dims()[static_cast<std::size_t>(b)];
    const auto gammas = tuple.block_eigenvalues(b);
    const auto profile = tuple_block_diagonals(gammas, dim, m);
    for (int i = 0; i < dim; ++i) {
      double acc = y[off + i];
      for (int j = 1; i + j < dim; ++j) acc += profile.d[static_cast<std::size_t>(j - 1)] * y[off + i + j];
      out[off + i] = profile.leading * acc;
    }
  }
  return out;
}

namespace {

// Dense block-diagonal matrix stored as mantissa * 2^exponent[b] per block.
struct ScaledBlockMatrix {
  Matrix mantissa;
  std::vector<long> exponent;
};

void normalize(ScaledBlockMatrix& a, const BlockStructure& s) {
  for (int b = 0; b < s.block_count(); ++b) {
    const int off = s.offset(b);
    const int dim = s.dims()[static_cast<std::size_t>(b)];
    auto block = a.mantissa.block(off, off, dim, dim);
    const double peak = block.cwiseAbs().maxCoeff();
    if (peak == 0.0 || !std::isfinite(peak)) continue;
    int e = 0;
    std::frexp(peak, &e);
    block *= std::ldexp(1.0, -e);
    a.exponent[static_cast<std::size_t>(b)] += e;
  }
}

ScaledBlockMatrix multiply(const ScaledBlockMatrix& a, const ScaledBlockMatrix& b, const BlockStructure& s) {
  ScaledBlockMatrix out{a.mantissa * b.mantissa, a.exponent};
  for (std::size_t i = 0; i < out.exponent.size(); ++i) out.exponent[i] += b.exponent[i];
  normalize(out, s);
  return out;
}

}  // namespace

Vector naive_power_apply(const JordanTuple& tuple, const MultiIndex& m, const Vector& y) {
  if (y.size() != tuple.dimension()) throw ShapeError("naive_power_apply: vector length != n");
  if (static_cast<int>(m.size()) != tuple.k()) throw ShapeError("naive_power_apply: multi-index length != k");
  const auto& s = tuple.structure();
  const int n = tuple.dimension();
  const auto blocks = static_cast<std::size_t>(s.block_count());

  ScaledBlockMatrix acc{Matrix::Identity(n, n), std::vector<long>(blocks, 0)};
  for (int nu = 0; nu < tuple.k(); ++nu) {
    std::uint64_t e = m[static_cast<std::size_t>(nu)];
    ScaledBlockMatrix base{tuple.operator_matrix(nu), std::vector<long>(blocks, 0)};
    normalize(base, s);
    while (e != 0) {
      if (e & 1u) acc = multiply(acc, base, s);
      e >>= 1;
      if (e != 0) base = multiply(base, base, s);
    }
  }

  Vector out = acc.mantissa * y;
  for (int b = 0; b < s.block_count(); ++b) {
    const int off = s.offset(b);
    const int dim = s.dims()[static_cast<std::size_t>(b)];
    const long e = acc.exponent[static_cast<std::size_t>(b)];
    const int clamped = static_cast<int>(std::clamp<long>(e, -100000, 100000));
    for (int i = 0; i < dim; ++i) out[off + i] = std::ldexp(out[off + i], clamped);
  }
  return out;
}

Vector v_vector(const MultiIndex& m, const EigenGrid& grid) {
  if (static_cast<int>(m.size()) != grid.k()) throw ShapeError("v_vector: multi-index length != k");
  Vector v(grid.dimension());
  for (int b = 0; b < grid.p1(); ++b) {
    const auto row = row_span(grid.gamma(), b);
    v[2 * b] = signed_power_product(row, m);
    v[2 * b + 1] = diag_d1(row, m);
  }
  for (int b = 0; b < grid.p2(); ++b) {
    v[2 * grid.p1() + b] = signed_power_product(row_span(grid.cgrid(), b), m);
  }
  return v;
}

Matrix build_L(const EigenGrid& grid) {
  if (grid.p1() < 1) throw ShapeError("build_L: at least one 2-block is required");
  Matrix l(grid.dimension(), grid.k());
  for (int b = 0; b < grid.p1(); ++b) {
    for (int nu = 0; nu < grid.k(); ++nu) {
      l(2 * b, nu) = std::log(std::abs(grid.gamma()(b, nu)));
      l(2 * b + 1, nu) = 1.0 / grid.gamma()(b, nu);
    }
  }
  for (int b = 0; b < grid.p2(); ++b) {
    for (int nu = 0; nu < grid.k(); ++nu) {
      l(2 * grid.p1() + b, nu) = std::log(std::abs(grid.cgrid()(b, nu)));
    }
  }
  return l;
}

Vector hypercyclic_vector(int p1, int p2) {
  if (p1 < 0 || p2 < 0 || p1 + p2 == 0) throw ShapeError("hypercyclic_vector: invalid shape");
  Vector w = Vector::Ones(2 * p1 + p2);
  for (int b = 0; b < p1; ++b) w[2 * b] = 0.0;
  return w;
}

Vector v_to_orbit(const Vector& v, int p1, int p2) {
  if (v.size() != 2 * p1 + p2) throw ShapeError("v_to_orbit: length != 2 p1 + p2");
  Vector x = v;
  for (int b = 0; b < p1; ++b) {
    x[2 * b] = v[2 * b] * v[2 * b + 1];
    x[2 * b + 1] = v[2 * b];
  }
  return x;
}

Vector orbit_to_v(const Vector& orbit, int p1, int p2) {
  if (orbit.size() != 2 * p1 + p2) throw ShapeError("orbit_to_v: length != 2 p1 + p2");
  Vector v = orbit;
  for (int b = 0; b < p1; ++b) {
    if (orbit[2 * b + 1] == 0.0) throw DomainError("orbit_to_v: zero leading coordinate in a 2-block");
    v[2 * b] = orbit[2 * b + 1];
    v[2 * b + 1] = orbit[2 * b] / orbit[2 * b + 1];
  }
  return v;
}

}  // namespace hypertuple
