#include "hypertuple/serialization.hpp"

#include <string>
#include <vector>

#include "hypertuple/errors.hpp"

namespace hypertuple {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field \"") + key + "\"");
  return *it;
}

double number(const Json& j) {
  if (!j.is_number()) throw ParseError("expected a number, got " + std::string(j.type_name()));
  return j.get<double>();
}

void check_format(const Json& j) {
  const Json& f = field(j, "format");
  if (!f.is_number_integer() || f.get<int>() != kFormatVersion) {
    throw ParseError("unsupported document format (expected " + std::to_string(kFormatVersion) + ")");
  }
}

template <typename Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, Eigen::Index cols_if_empty) {
  if (!j.is_array()) throw ParseError("expected a list of rows");
  if (j.empty()) return Matrix(0, cols_if_empty);
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ParseError("matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = number(j[i][c]);
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("expected a list of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i]);
  return v;
}

Json tuple_to_json(const JordanTuple& tuple) {
  return Json{{"dims", tuple.structure().dims()}, {"k", tuple.k()}, {"eigenvalues", matrix_to_json(tuple.eigenvalues())}};
}

JordanTuple tuple_from_json(const Json& j) {
  return guarded([&] {
    std::vector<int> dims = field(j, "dims").get<std::vector<int>>();
    const int k = field(j, "k").get<int>();
    Matrix eig = matrix_from_json(field(j, "eigenvalues"), k);
    if (eig.cols() != k) throw ParseError("eigenvalue grid does not have k columns");
    return JordanTuple(BlockStructure(std::move(dims)), std::move(eig));
  });
}

Json grid_to_json(const EigenGrid& grid) { return tuple_to_json(grid.to_tuple()); }

EigenGrid grid_from_json(const Json& j) { return EigenGrid::from_tuple(tuple_from_json(j)); }

Json params_to_json(const ConstructionParams& p) {
  return Json{{"n", p.shape.n},
              {"p1", p.shape.p1},
              {"p2", p.shape.p2},
              {"seed", p.seed},
              {"det_tol", p.det_tol},
              {"residual_tol", p.residual_tol},
              {"aux_margin", p.aux_margin},
              {"max_retries", p.max_retries}};
}

ConstructionParams params_from_json(const Json& j) {
  return guarded([&] {
    ConstructionParams p;
    p.shape.n = field(j, "n").get<int>();
    p.shape.p1 = field(j, "p1").get<int>();
    p.shape.p2 = field(j, "p2").get<int>();
    p.seed = field(j, "seed").get<std::uint64_t>();
    p.det_tol = number(field(j, "det_tol"));
    p.residual_tol = number(field(j, "residual_tol"));
    p.aux_margin = number(field(j, "aux_margin"));
    p.max_retries = field(j, "max_retries").get<int>();
    return p;
  });
}

Json realization_to_json(const TupleRealization& r) {
  return Json{{"format", kFormatVersion},
              {"params", params_to_json(r.params)},
              {"a", matrix_to_json(r.usystem.a())},
              {"delta", matrix_to_json(r.usystem.delta())},
              {"coeffs", vector_to_json(r.usystem.coeffs())},
              {"gamma", matrix_to_json(r.grid.gamma())},
              {"c", matrix_to_json(r.grid.cgrid())}};
}

TupleRealization realization_from_json(const Json& j) {
  return guarded([&] {
    check_format(j);
    const ConstructionParams params = params_from_json(field(j, "params"));
    validate_shape(params.shape);
    const Eigen::Index k = params.shape.n + 1;
    USystem sys(params.shape, matrix_from_json(field(j, "a"), k), matrix_from_json(field(j, "delta"), k),
                vector_from_json(field(j, "coeffs")));
    EigenGrid grid(matrix_from_json(field(j, "gamma"), k), matrix_from_json(field(j, "c"), k));
    JordanTuple tuple = grid.to_tuple();
    return TupleRealization{params, std::move(sys), std::move(grid), std::move(tuple)};
  });
}

Json report_to_json(const ConstructionReport& r) {
  return Json{{"base_det", r.base_det},
              {"det", r.det},
              {"residual", r.residual},
              {"min_omit_one_det", r.min_omit_one_det},
              {"aux_margins", r.aux_margins},
              {"max_root_residual", r.max_root_residual},
              {"cn_exponent", r.cn_exponent},
              {"aux_scale", r.aux_scale}};
}

Json checks_to_json(const std::vector<InvariantCheck>& checks) {
  Json out = Json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed;
    out.push_back(Json{{"name", c.name},
                       {"passed", c.passed},
                       {"value", c.value},
                       {"threshold", c.threshold},
                       {"detail", c.detail}});
  }
  return Json{{"format", kFormatVersion}, {"all_passed", all}, {"checks", std::move(out)}};
}

Json result_to_json(const ApproxResult& r) {
  return Json{{"format", kFormatVersion},
              {"m", r.m.values()},
              {"ell", r.ell},
              {"achieved_error", r.achieved_error},
              {"verified", r.verified},
              {"sigma", r.sigma},
              {"perturbed", r.perturbed},
              {"searched_target", vector_to_json(r.searched_target)},
              {"lattice_epsilon", r.lattice_epsilon},
              {"lattice_error", r.lattice_error},
              {"tolerance", r.tolerance},
              {"R", r.R},
              {"r", vector_to_json(r.r)},
              {"Rprime", r.Rprime},
              {"rprime", vector_to_json(r.rprime)}};
}

Json ell_certificate_to_json(const EllCertificate& c) {
  return Json{{"format", kFormatVersion},
              {"kind", "ell"},
              {"y", vector_to_json(c.y)},
              {"target", vector_to_json(c.target)},
              {"required_ell", c.required_ell},
              {"feasible_lower_bound", c.feasible_lower_bound},
              {"infeasible", c.infeasible}};
}

Json cone_certificate_to_json(const ConeCertificate& c, const Matrix& L, const Vector& x) {
  return Json{{"format", kFormatVersion},
              {"kind", "cone"},
              {"L", matrix_to_json(L)},
              {"x", vector_to_json(x)},
              {"margin", c.margin},
              {"preimage", vector_to_json(c.preimage)},
              {"negative_margin", c.negative_margin},
              {"sigma_min", c.sigma_min},
              {"gap_lower_bound", c.gap_lower_bound}};
}

Json block3_gap_to_json(std::span<const double> gammas, const Vector& y, int grid_bound, double gap) {
  return Json{{"format", kFormatVersion},
              {"kind", "block3"},
              {"gammas", std::vector<double>(gammas.begin(), gammas.end())},
              {"y", vector_to_json(y)},
              {"target", vector_to_json(block3_target(y))},
              {"grid_bound", grid_bound},
              {"gap", gap}};
}

}  // namespace hypertuple
