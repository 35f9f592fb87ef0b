#pragma once

// JSON encoding shared by instance files, scenarios and reports.
// Complex numbers are [re, im] pairs; matrices are nested row arrays.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/algebra.hpp"

namespace finsler {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Reads a JSON number field, reporting the field path on failure.
inline const json& require_field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::ConfigInvalid, "missing field '" + where + (where.empty() ? "" : ".") + key + "'");
  }
  return j.at(key);
}

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorKind::ConfigInvalid, "complex number must be [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// `cols` is needed only for matrices with zero rows.
inline CMatrix matrix_from_json(const json& j, std::size_t cols_if_empty = 0) {
  if (!j.is_array()) throw Error(ErrorKind::ConfigInvalid, "matrix must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? cols_if_empty : j[0].size();
  CMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw Error(ErrorKind::ConfigInvalid, "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  require_finite(m);
  return m;
}

inline json algebra_to_json(const FdAlgebra& a) { return json{{"blocks", a.dims()}}; }

inline FdAlgebra algebra_from_json(const json& j, bool allow_zero = false) {
  const json& blocks = j.is_array() ? j : require_field(j, "blocks", "algebra");
  if (!blocks.is_array()) throw Error(ErrorKind::ConfigInvalid, "algebra.blocks must be an array");
  std::vector<std::size_t> dims;
  for (const auto& d : blocks) {
    if (!d.is_number_integer() || d.get<long long>() < 1) {
      throw Error(ErrorKind::ConfigInvalid, "algebra.blocks entries must be positive integers");
    }
    dims.push_back(d.get<std::size_t>());
  }
  if (dims.empty() && !allow_zero) throw Error(ErrorKind::ConfigInvalid, "algebra needs at least one block");
  return FdAlgebra(std::move(dims));
}

inline json element_to_json(const AlgElement& x) {
  json blocks = json::array();
  for (const auto& b : x.blocks()) blocks.push_back(matrix_to_json(b));
  return json{{"algebra", x.algebra().dims()}, {"blocks", blocks}};
}

inline AlgElement element_from_json(const json& j) {
  const FdAlgebra a = algebra_from_json(require_field(j, "algebra", "element"), true);
  const json& blocks = require_field(j, "blocks", "element");
  std::vector<CMatrix> mats;
  for (const auto& b : blocks) mats.push_back(matrix_from_json(b));
  return {a, std::move(mats)};
}

inline json ideal_to_json(const Ideal& i) { return json(i.blocks()); }

inline json hom_to_json(const StarHom& h) {
  json routes = json::array();
  for (const auto& r : h.routes()) {
    json route{{"from", r.from}};
    if (!(r.conjugator == CMatrix::identity(r.conjugator.rows()))) route["conjugator"] = matrix_to_json(r.conjugator);
    routes.push_back(std::move(route));
  }
  return json{{"source", h.source().dims()}, {"target", h.target().dims()}, {"routes", routes}};
}

/// Source and target may be omitted when the caller knows them.
inline StarHom hom_from_json(const json& j, const FdAlgebra* source = nullptr,
                             const FdAlgebra* target = nullptr) {
  const FdAlgebra src = j.contains("source") ? algebra_from_json(j["source"], true)
                        : source            ? *source
                                            : throw Error(ErrorKind::ConfigInvalid, "hom.source missing");
  std::vector<StarHom::Route> routes;
  std::vector<std::size_t> dims;
  for (const auto& r : require_field(j, "routes", "hom")) {
    StarHom::Route route;
    route.from = require_field(r, "from", "hom.routes[]").get<std::size_t>();
    if (route.from >= src.num_blocks()) throw Error(ErrorKind::ConfigInvalid, "hom route out of range");
    if (r.contains("conjugator")) route.conjugator = matrix_from_json(r["conjugator"]);
    dims.push_back(src.dim(route.from));
    routes.push_back(std::move(route));
  }
  FdAlgebra tgt = j.contains("target") ? algebra_from_json(j["target"], true)
                  : target            ? *target
                                      : FdAlgebra(dims);
  return {src, tgt, std::move(routes)};
}

inline json double_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json("nan");
  return json(v);
}

inline double double_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorKind::ConfigInvalid, "expected a number or \"inf\"");
}

}  // namespace finsler
