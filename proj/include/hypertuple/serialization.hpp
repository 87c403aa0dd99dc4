#pragma once

// JSON documents for tuples, realizations, search results and certificates.
// Doubles are written with round-trip precision, so parse(dump(x)) == x
// bit for bit. Every top-level document carries "format": 1.

#include <span>
#include <string>

#include "json.hpp"

#include "hypertuple/construction.hpp"
#include "hypertuple/density_search.hpp"
#include "hypertuple/jordan_core.hpp"
#include "hypertuple/obstructions.hpp"

namespace hypertuple {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

Json matrix_to_json(const Matrix& m);
/// A list of equal-length rows. An empty list gives a 0 x cols matrix.
Matrix matrix_from_json(const Json& j, Eigen::Index cols_if_empty = 0);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// {"dims": [...], "k": K, "eigenvalues": [[...], ...]}
Json tuple_to_json(const JordanTuple& tuple);
JordanTuple tuple_from_json(const Json& j);

/// Same document as the tuple it induces (2-blocks first).
Json grid_to_json(const EigenGrid& grid);
EigenGrid grid_from_json(const Json& j);

Json params_to_json(const ConstructionParams& params);
ConstructionParams params_from_json(const Json& j);

/// {"format": 1, "params": {...}, "a", "delta", "coeffs", "gamma", "c"}
Json realization_to_json(const TupleRealization& r);
/// Rebuilds the u-system and tuple from the stored entries without re-running
/// the construction. Throws ParseError on a malformed document.
TupleRealization realization_from_json(const Json& j);

Json report_to_json(const ConstructionReport& report);
Json checks_to_json(const std::vector<InvariantCheck>& checks);

/// {"format": 1, "m": [...], "ell": L, "achieved_error": e, "verified": b, ...}
Json result_to_json(const ApproxResult& result);

Json ell_certificate_to_json(const EllCertificate& cert);
Json cone_certificate_to_json(const ConeCertificate& cert, const Matrix& L, const Vector& x);
Json block3_gap_to_json(std::span<const double> gammas, const Vector& y, int grid_bound, double gap);

}  // namespace hypertuple
