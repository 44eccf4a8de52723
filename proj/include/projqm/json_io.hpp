#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "projqm/frame_function.hpp"
#include "projqm/linalg.hpp"
#include "projqm/projective.hpp"
#include "projqm/requantize.hpp"

namespace projqm {

using json = nlohmann::json;

/// Shared matrix wire format:
/// {"dim": n, "re": [[...]], "im": [[...]]}; bipartite operators add
/// "dims": [n, m]. All numbers are IEEE-754 doubles.
inline json matrix_to_json(const ComplexMatrix& m,
                           const std::optional<Dims>& dims = {}) {
  json j;
  j["dim"] = m.rows();
  json re = json::array(), im = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (Index k = 0; k < m.cols(); ++k) {
      rrow.push_back(m(i, k).real());
      irow.push_back(m(i, k).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  if (dims) j["dims"] = {dims->first, dims->second};
  return j;
}

namespace detail {

inline void require_field(const json& j, const char* field) {
  if (!j.contains(field))
    throw std::invalid_argument(std::string("missing field '") + field + "'");
}

inline RealMatrix real_part_from_json(const json& j, const char* field,
                                      Index n) {
  require_field(j, field);
  const json& rows = j.at(field);
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n)
    throw std::invalid_argument(std::string("field '") + field +
                                "': expected array of " + std::to_string(n) +
                                " rows");
  RealMatrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = rows.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      throw std::invalid_argument(
          std::string("field '") + field + "' row " + std::to_string(i) +
          ": expected " + std::to_string(n) + " numbers");
    for (Index k = 0; k < n; ++k) {
      const json& cell = row.at(static_cast<std::size_t>(k));
      if (!cell.is_number())
        throw std::invalid_argument(std::string("field '") + field + "' entry (" +
                                    std::to_string(i) + ", " +
                                    std::to_string(k) + ") is not a number");
      const double v = cell.get<double>();
      if (!std::isfinite(v))
        throw std::invalid_argument(std::string("field '") + field + "' entry (" +
                                    std::to_string(i) + ", " +
                                    std::to_string(k) + ") is not finite");
      out(i, k) = v;
    }
  }
  return out;
}

}  // namespace detail

inline ComplexMatrix matrix_from_json(const json& j) {
  detail::require_field(j, "dim");
  if (!j.at("dim").is_number_integer() || j.at("dim").get<Index>() < 1)
    throw std::invalid_argument("field 'dim' must be a positive integer");
  const Index n = j.at("dim").get<Index>();
  const RealMatrix re = detail::real_part_from_json(j, "re", n);
  const RealMatrix im = detail::real_part_from_json(j, "im", n);
  ComplexMatrix out(n, n);
  out.real() = re;
  out.imag() = im;
  return out;
}

inline std::optional<Dims> dims_from_json(const json& j) {
  if (!j.contains("dims")) return std::nullopt;
  const json& d = j.at("dims");
  if (!d.is_array() || d.size() != 2 || !d.at(0).is_number_integer() ||
      !d.at(1).is_number_integer())
    throw std::invalid_argument("field 'dims' must be an [n, m] integer pair");
  const Dims dims(d.at(0).get<Index>(), d.at(1).get<Index>());
  if (j.contains("dim") && dims.total() != j.at("dim").get<Index>())
    throw std::invalid_argument(
        "field 'dims' is inconsistent with field 'dim'");
  return dims;
}

inline json frame_function_to_json(const FrameFunction& f) {
  json j = matrix_to_json(f.backing(), f.dims());
  j["kappa"] = f.kappa();
  return j;
}

inline FrameFunction frame_function_from_json(const json& j) {
  const ComplexMatrix backing = matrix_from_json(j);
  detail::require_field(j, "kappa");
  const double kappa = j.at("kappa").get<double>();
  const std::optional<Dims> dims = dims_from_json(j);
  if (dims) return FrameFunction(backing, kappa, *dims);
  return FrameFunction(backing, kappa);
}

inline json estimate_to_json(const MCEstimate& e) {
  json j;
  if (e.value.imag() == 0.0)
    j["value"] = e.value.real();
  else
    j["value"] = {{"re", e.value.real()}, {"im", e.value.imag()}};
  j["std_error"] = e.std_error;
  j["n_samples"] = e.n_samples;
  j["seed"] = e.seed;
  return j;
}

inline json operator_estimate_to_json(const OperatorEstimate& e) {
  json j;
  j["estimate"] = matrix_to_json(e.estimate);
  j["entry_std_error"] = matrix_to_json(e.entry_std_error.cast<Complex>());
  j["propagated_error"] = e.propagated_error();
  j["n_samples"] = e.n_samples;
  j["seed"] = e.seed;
  return j;
}

}  // namespace projqm
