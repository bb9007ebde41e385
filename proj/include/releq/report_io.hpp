#pragma once

// JSON encoding of solver, verification and diagnostic reports.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "releq/diagnostics.hpp"

namespace releq {

namespace detail {

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

inline Vec json_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(where + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Mat json_mat(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InputError(where + " must be a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Mat m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vec row = json_vec(j[static_cast<std::size_t>(i)], where);
    if (i == 0) m.resize(rows, row.size());
    if (row.size() != m.cols()) throw InputError(where + " rows differ in length");
    m.row(i) = row.transpose();
  }
  return m;
}

/// Reports must contain finite numbers only.
inline double finite(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::max(); }

}  // namespace detail

inline json to_json(const REReport& r) {
  json j;
  j["seed_index"] = r.seed_index;
  j["x"] = detail::vec_json(r.candidate.x);
  j["xi"] = detail::vec_json(r.candidate.xi.xi);
  if (r.candidate.g.size()) j["g"] = detail::mat_json(r.candidate.g);
  j["mu"] = detail::vec_json(r.mu.mu);
  json res = json::object();
  for (const auto& [k, v] : r.residuals) res[k] = detail::finite(v);
  j["residuals"] = res;
  j["primary"] = r.primary;
  j["isotropy_ok"] = r.isotropy_ok;
  j["reduced_hessian_condition"] = detail::finite(r.reduced_hessian_condition);
  j["energy"] = detail::finite(r.energy);
  j["converged"] = r.converged;
  j["validated"] = r.validated;
  j["iterations"] = r.iterations;
  j["continuum"] = r.continuum;
  j["members"] = r.members;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

/// Reads the candidate fields of a report; the residual entries are not
/// trusted and get recomputed by whoever consumes the candidate.
inline REReport report_from_json(const json& j) {
  if (!j.is_object() || !j.contains("xi")) throw InputError("report entry must be an object with 'xi'");
  REReport r;
  r.candidate.x = j.contains("x") ? detail::json_vec(j["x"], "x") : Vec(0);
  r.candidate.xi = {detail::json_vec(j["xi"], "xi")};
  if (j.contains("g")) r.candidate.g = detail::json_mat(j["g"], "g");
  if (j.contains("mu")) r.mu = {detail::json_vec(j["mu"], "mu")};
  r.seed_index = j.value("seed_index", 0);
  r.validated = j.value("validated", false);
  r.converged = j.value("converged", false);
  return r;
}

inline json to_json(const ScanResult& s) {
  json j;
  json arr = json::array();
  int validated = 0;
  for (const auto& r : s.reports) {
    arr.push_back(to_json(r));
    if (r.validated) ++validated;
  }
  j["reports"] = arr;
  j["validated_count"] = validated;
  j["seeds_tried"] = s.seeds_tried;
  j["failures"] = s.failures;
  j["failure_messages"] = s.failure_messages;
  return j;
}

inline json to_json(const VerifyReport& v) {
  json j;
  j["passed"] = v.passed;
  j["h"] = v.coarse.h;
  j["coarse_max_residual"] = detail::finite(v.coarse.max_norm);
  j["fine_max_residual"] = detail::finite(v.fine.max_norm);
  j["coarse_max_absolute"] = detail::finite(v.coarse.max_absolute);
  j["nodes"] = v.coarse.residuals.size();
  if (v.order) j["estimated_order"] = detail::finite(*v.order);
  j["exact_discrete"] = v.exact_discrete;
  if (v.ep_constancy) j["ep_constancy"] = detail::finite(*v.ep_constancy);
  if (!v.message.empty()) j["message"] = v.message;
  return j;
}

inline json to_json(const SaariReport& s) {
  json j;
  j["naive_variation"] = detail::finite(s.naive_variation);
  j["refined_variation"] = detail::finite(s.refined_variation);
  j["naive_formula_defect"] = detail::finite(s.naive_formula_defect);
  j["refined_formula_defect"] = detail::finite(s.refined_formula_defect);
  j["period"] = detail::finite(s.period);
  j["samples"] = s.samples;
  return j;
}

}  // namespace releq
