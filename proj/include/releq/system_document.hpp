#pragma once

// JSON system documents: strict schema, binding of parameters, and the
// load-time checks (algebra consistency, metric symmetry, invertibility of
// the momentum block on sample points).

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "releq/model.hpp"

namespace releq {

using json = nlohmann::json;

/// Outcome of one named load-time check.
struct ValidationCheck {
  std::string name;
  bool ok = true;
  double value = 0.0;
  double threshold = 0.0;
  std::string message;
};

inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr double kCommutatorTolerance = 1e-10;
inline constexpr double kConditionLimit = 1e12;

namespace detail {

inline std::string sci(double v, int digits = 1) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v);
  return buf;
}

inline void require_keys(const json& doc, const std::set<std::string>& required,
                         const std::set<std::string>& optional, const std::string& where) {
  if (!doc.is_object()) throw SchemaError(where + " must be a JSON object");
  for (const auto& k : required)
    if (!doc.contains(k)) throw SchemaError(where + ": missing key '" + k + "'");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!required.count(it.key()) && !optional.count(it.key()))
      throw SchemaError(where + ": unknown key '" + it.key() + "'");
}

inline double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where + " must be a number");
  return j.get<double>();
}

inline int as_positive_int(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() <= 0 || j.get<long long>() > 64)
    throw SchemaError(where + " must be a positive integer");
  return j.get<int>();
}

inline Expression as_expression(const json& j, const std::string& where) {
  if (j.is_number()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
    return parse_expression(buf);
  }
  if (!j.is_string()) throw SchemaError(where + " must be an expression string or a number");
  try {
    return parse_expression(j.get<std::string>());
  } catch (const ParseError& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

inline ScalarField bind_field(const Expression& e, const std::vector<std::string>& vars,
                              const std::map<std::string, double>& params, const std::string& where) {
  try {
    return {e, e.compile(vars, params)};
  } catch (const SchemaError& err) {
    throw SchemaError(where + ": " + err.what());
  }
}

inline std::vector<ScalarField> field_matrix(const json& j, int rows, int cols, const std::vector<std::string>& vars,
                                             const std::map<std::string, double>& params, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw SchemaError(where + " must be an array of " + std::to_string(rows) + " rows");
  std::vector<ScalarField> out;
  for (int i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw SchemaError(where + " row " + std::to_string(i + 1) + " must have " + std::to_string(cols) + " entries");
    for (int k = 0; k < cols; ++k) {
      const std::string w = where + "[" + std::to_string(i + 1) + "][" + std::to_string(k + 1) + "]";
      out.push_back(bind_field(as_expression(row[static_cast<std::size_t>(k)], w), vars, params, w));
    }
  }
  return out;
}

inline std::vector<std::string> names(const std::string& stem, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

inline Mat numeric_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw SchemaError(where + " must be a non-empty square matrix");
  const auto n = static_cast<Eigen::Index>(j.size());
  Mat M(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw SchemaError(where + " must be a square matrix");
    for (Eigen::Index k = 0; k < n; ++k) M(i, k) = as_number(row[static_cast<std::size_t>(k)], where);
  }
  return M;
}

inline void record(std::vector<ValidationCheck>* log, ValidationCheck c) {
  const bool ok = c.ok;
  const std::string name = c.name, msg = c.message;
  if (log) log->push_back(std::move(c));
  if (!ok) throw ValidationError(name, msg);
}

inline Algebra parse_algebra(const json& j, std::vector<ValidationCheck>* log) {
  Algebra alg;
  if (j.is_string()) {
    alg = algebras::by_name(j.get<std::string>());
  } else {
    require_keys(j, {"structure_constants", "generators"}, {"labels", "name"}, "algebra");
    const auto& sc = j["structure_constants"];
    if (!sc.is_array() || sc.empty()) throw SchemaError("algebra.structure_constants must be an r x r x r array");
    const int r = static_cast<int>(sc.size());
    StructureConstants C(r);
    for (int c = 0; c < r; ++c) {
      const auto& slab = sc[static_cast<std::size_t>(c)];
      if (!slab.is_array() || static_cast<int>(slab.size()) != r)
        throw SchemaError("algebra.structure_constants must be an r x r x r array");
      for (int a = 0; a < r; ++a) {
        const auto& row = slab[static_cast<std::size_t>(a)];
        if (!row.is_array() || static_cast<int>(row.size()) != r)
          throw SchemaError("algebra.structure_constants must be an r x r x r array");
        for (int b = 0; b < r; ++b)
          C.set_raw(c, a, b, as_number(row[static_cast<std::size_t>(b)], "algebra.structure_constants entry"));
      }
    }
    if (j.contains("labels")) {
      const auto& lab = j["labels"];
      if (!lab.is_array() || static_cast<int>(lab.size()) != r)
        throw SchemaError("algebra.labels must list one name per basis element");
      for (const auto& s : lab) {
        if (!s.is_string()) throw SchemaError("algebra.labels entries must be strings");
        C.labels.push_back(s.get<std::string>());
      }
    }
    const auto& gens = j["generators"];
    if (!gens.is_array() || static_cast<int>(gens.size()) != r)
      throw SchemaError("algebra.generators must list one matrix per basis element");
    std::vector<Mat> mats;
    for (const auto& g : gens) mats.push_back(numeric_matrix(g, "algebra.generators entry"));
    const bool anti = C.is_antisymmetric();
    record(log, {"antisymmetry", anti, 0.0, 0.0,
                 anti ? "structure constants antisymmetric" : "structure constants are not antisymmetric in a,b"});
    MatrixGroupRep rep;
    try {
      rep = MatrixGroupRep(std::move(mats));
    } catch (const DimensionError& e) {
      throw SchemaError(std::string("algebra.generators: ") + e.what());
    }
    alg = {j.value("name", std::string("custom")), std::move(C), std::move(rep)};
  }
  const double jac = jacobi_defect(alg.constants);
  record(log, {"jacobi", jac <= kJacobiTolerance, jac, kJacobiTolerance,
               "jacobi defect " + sci(jac) + (jac <= kJacobiTolerance ? " within " : " exceeds ") + "1e-12"});
  const double com = alg.rep.commutator_defect(alg.constants);
  record(log, {"commutator", com <= kCommutatorTolerance, com, kCommutatorTolerance,
               "commutator defect " + sci(com) + (com <= kCommutatorTolerance ? " within " : " exceeds ") + "1e-10"});
  return alg;
}

inline std::optional<Box> parse_domain(const json& doc, int n) {
  if (!doc.contains("domain")) return std::nullopt;
  const auto& d = doc["domain"];
  if (!d.is_object()) throw SchemaError("domain must map coordinate names to [lo, hi]");
  Box box{Vec::Constant(n, -std::numeric_limits<double>::infinity()),
          Vec::Constant(n, std::numeric_limits<double>::infinity())};
  for (auto it = d.begin(); it != d.end(); ++it) {
    int idx = -1;
    for (int i = 0; i < n; ++i)
      if (it.key() == "x" + std::to_string(i + 1)) idx = i;
    if (idx < 0) throw SchemaError("domain: unknown coordinate '" + it.key() + "'");
    const auto& iv = it.value();
    if (!iv.is_array() || iv.size() != 2) throw SchemaError("domain." + it.key() + " must be [lo, hi]");
    box.lo[idx] = as_number(iv[0], "domain bound");
    box.hi[idx] = as_number(iv[1], "domain bound");
    if (!(box.lo[idx] < box.hi[idx])) throw SchemaError("domain." + it.key() + " must have lo < hi");
  }
  return box;
}

/// Base-coordinate sample points: a grid over the declared domain (or over
/// [0.1, 1.9]^n for unbounded coordinates).
inline std::vector<Vec> base_samples(const std::optional<Box>& box, int n) {
  std::vector<Vec> out;
  if (n == 0) {
    out.emplace_back(Vec(0));
    return out;
  }
  Vec lo = Vec::Constant(n, 0.1), hi = Vec::Constant(n, 1.9);
  if (box)
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(box->lo[i])) lo[i] = box->lo[i];
      if (std::isfinite(box->hi[i])) hi[i] = box->hi[i];
      if (!std::isfinite(box->lo[i]) && std::isfinite(box->hi[i])) lo[i] = hi[i] - 1.8;
      if (std::isfinite(box->lo[i]) && !std::isfinite(box->hi[i])) hi[i] = lo[i] + 1.8;
    }
  if (n <= 4) {
    const int per = n <= 2 ? 7 : 4;
    const int total = static_cast<int>(std::pow(per, n));
    for (int k = 0; k < total; ++k) {
      Vec x(n);
      int rem = k;
      for (int i = 0; i < n; ++i) {
        const int j = rem % per;
        rem /= per;
        x[i] = lo[i] + (hi[i] - lo[i]) * j / (per - 1);
      }
      out.push_back(x);
    }
  } else {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 128; ++k) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
      out.push_back(x);
    }
  }
  return out;
}

/// Deterministic algebra sample points used to probe l(xi).
inline std::vector<Vec> algebra_samples(int r) {
  std::vector<Vec> out;
  out.push_back(Vec::Zero(r));
  for (int a = 0; a < r; ++a) out.push_back(Vec::Unit(r, a));
  out.push_back(Vec::Ones(r) / std::sqrt(static_cast<double>(r)));
  std::mt19937_64 rng(977);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int k = 0; k < 12; ++k) {
    Vec v(r);
    for (int a = 0; a < r; ++a) v[a] = nd(rng);
    out.push_back(v);
  }
  return out;
}

inline std::string point_string(const Vec& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", x[i]);
    s += buf;
  }
  return s + ")";
}

/// sigma_max / sigma_min, +inf when singular.
inline double condition_number(const Mat& M) {
  if (M.size() == 0) return 1.0;
  const Vec s = Eigen::JacobiSVD<Mat>(M).singularValues();
  const double smax = s[0], smin = s[s.size() - 1];
  if (!(smax > 0.0) || !(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

template <class BlockAt>
void check_momentum_block(const std::vector<Vec>& points, const BlockAt& block, std::vector<ValidationCheck>* log) {
  double worst = 1.0;
  Vec where;
  for (const auto& p : points) {
    double cond;
    try {
      cond = condition_number(block(p));
    } catch (const DomainError& e) {
      record(log, {"sample_domain", false, 0.0, 0.0,
                   std::string("evaluation failed at sample ") + point_string(p) + ": " + e.what()});
      continue;
    }
    if (!(cond <= worst)) {
      worst = cond;
      where = p;
    }
    if (!(cond <= kConditionLimit)) break;
  }
  const bool ok = worst <= kConditionLimit;
  record(log, {"momentum_block", ok, std::isfinite(worst) ? worst : 0.0, kConditionLimit,
               ok ? "momentum block condition " + sci(worst) + " within 1e12"
                  : "momentum block singular at " + point_string(where) + " (condition " +
                        (std::isfinite(worst) ? sci(worst) : std::string("inf")) + ")"});
}

inline void check_symmetric(const std::vector<Vec>& points, const std::vector<ScalarField>& f, int n,
                            const std::string& label, std::vector<ValidationCheck>* log) {
  double worst = 0.0;
  for (const auto& p : points) {
    Mat M;
    try {
      M = eval_matrix(f, n, n, p);
    } catch (const DomainError& e) {
      record(log, {"sample_domain", false, 0.0, 0.0,
                   std::string("evaluation failed at sample ") + point_string(p) + ": " + e.what()});
    }
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    worst = std::max(worst, (M - M.transpose()).cwiseAbs().maxCoeff() / scale);
  }
  const bool ok = worst <= 1e-12;
  record(log, {"metric_symmetry", ok, worst, 1e-12,
               label + (ok ? " symmetric" : " is not symmetric (defect " + sci(worst) + ")")});
}

inline FDScheme parse_fd(const json& doc) {
  FDScheme s;
  if (doc.contains("fd")) {
    const auto& f = doc["fd"];
    require_keys(f, {}, {"step_scale", "hessian_step_scale", "richardson"}, "fd");
    if (f.contains("step_scale")) s.step_scale = as_number(f["step_scale"], "fd.step_scale");
    if (f.contains("hessian_step_scale")) s.hessian_step_scale = as_number(f["hessian_step_scale"], "fd.hessian_step_scale");
    if (f.contains("richardson")) {
      if (!f["richardson"].is_boolean()) throw SchemaError("fd.richardson must be a boolean");
      s.richardson = f["richardson"].get<bool>();
    }
    s.check();
  }
  return with_env_override(s);
}

}  // namespace detail

/// Builds and validates a system model from a parsed document. Every check
/// that runs is appended to `log` (when given); the first failing check
/// raises ValidationError, schema problems raise SchemaError.
inline SystemModel load_system(const json& doc, std::vector<ValidationCheck>* log = nullptr) {
  using namespace detail;
  if (!doc.is_object()) throw SchemaError("system document must be a JSON object");
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw SchemaError("missing key 'kind'");
  const std::string kind = doc["kind"].get<std::string>();
  const std::set<std::string> common = {"kind", "algebra", "name", "description", "parameters", "fd"};
  auto with = [&](std::set<std::string> extra) {
    extra.insert(common.begin(), common.end());
    return extra;
  };
  if (kind == "lie_group")
    require_keys(doc, {"kind", "algebra", "l"}, with({}), "system");
  else if (kind == "simple_mechanical")
    require_keys(doc, {"kind", "algebra", "n", "g_ij", "g_ab", "V"}, with({"A", "domain"}), "system");
  else if (kind == "trivialized")
    require_keys(doc, {"kind", "algebra", "n", "lagrangian"}, with({"domain"}), "system");
  else
    throw SchemaError("unknown kind '" + kind + "'");

  std::map<std::string, double> params;
  if (doc.contains("parameters")) {
    const auto& p = doc["parameters"];
    if (!p.is_object()) throw SchemaError("parameters must be an object of name: number");
    for (auto it = p.begin(); it != p.end(); ++it) params[it.key()] = as_number(it.value(), "parameter " + it.key());
  }
  const std::string name = doc.value("name", kind);
  const FDScheme fd = parse_fd(doc);
  record(log, {"schema", true, 0.0, 0.0, "document is schema-valid"});

  Algebra alg = parse_algebra(doc["algebra"], log);
  const int r = alg.dim();

  auto guard_params = [&](const std::vector<std::string>& vars) {
    for (const auto& v : vars)
      if (params.count(v)) throw SchemaError("parameter '" + v + "' shadows a coordinate name");
  };

  if (kind == "lie_group") {
    const auto vars = names("xi", r);
    guard_params(vars);
    LieGroupSystem sys{std::move(alg), bind_field(as_expression(doc["l"], "l"), vars, params, "l"), std::nullopt};
    sys.quadratic = detect_quadratic([&](const Vec& z) { return sys.l(z); }, r);
    check_momentum_block(algebra_samples(r), [&](const Vec& xi) { return sys.hessian(xi, fd); }, log);
    return SystemModel(name, std::move(sys), fd, params);
  }

  const int n = as_positive_int(doc["n"], "n");
  if (kind == "simple_mechanical") {
    const auto vars = names("x", n);
    guard_params(vars);
    SimpleMechanicalSystem sys;
    sys.algebra = std::move(alg);
    sys.n = n;
    sys.g_ij = field_matrix(doc["g_ij"], n, n, vars, params, "g_ij");
    sys.g_ab = field_matrix(doc["g_ab"], r, r, vars, params, "g_ab");
    if (doc.contains("A")) sys.A = field_matrix(doc["A"], r, n, vars, params, "A");
    sys.V = bind_field(as_expression(doc["V"], "V"), vars, params, "V");
    sys.domain = parse_domain(doc, n);
    const auto pts = base_samples(sys.domain, n);
    check_symmetric(pts, sys.g_ij, n, "g_ij", log);
    check_symmetric(pts, sys.g_ab, r, "g_ab", log);
    for (const auto& p : pts) {
      try {
        (void)sys.V(p);
      } catch (const DomainError& e) {
        record(log, {"sample_domain", false, 0.0, 0.0,
                     "V undefined at sample " + point_string(p) + ": " + e.what()});
      }
    }
    check_momentum_block(pts, [&](const Vec& x) { return detail::eval_matrix(sys.g_ab, r, r, x); }, log);
    return SystemModel(name, std::move(sys), fd, params);
  }

  std::vector<std::string> vars = names("x", n);
  for (auto& v : names("v", n)) vars.push_back(v);
  for (auto& w : names("w", r)) vars.push_back(w);
  guard_params(vars);
  TrivializedSystem sys;
  sys.algebra = std::move(alg);
  sys.n = n;
  sys.lagrangian_field = bind_field(as_expression(doc["lagrangian"], "lagrangian"), vars, params, "lagrangian");
  sys.domain = parse_domain(doc, n);
  std::vector<Vec> pts;
  for (const auto& x : base_samples(sys.domain, n))
    for (const Vec& w : {Vec(Vec::Zero(r)), Vec(Vec::Constant(r, 0.5))}) {
      Vec z(n + r);
      z << x, w;
      pts.push_back(z);
    }
  check_momentum_block(
      pts,
      [&](const Vec& z) {
        const Vec x = z.head(n);
        return hess_fd([&](const Vec& w) { return sys.lagrangian(x, Vec::Zero(n), w); }, Vec(z.tail(r)), fd);
      },
      log);
  return SystemModel(name, std::move(sys), fd, params);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline SystemModel load_system_file(const std::string& path, std::vector<ValidationCheck>* log = nullptr) {
  return load_system(read_json_file(path), log);
}

}  // namespace releq
