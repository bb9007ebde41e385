#pragma once

// Command implementations behind the releq executable. Each command returns
// its exit code together with the text destined for stdout/stderr so the
// commands can be driven from tests without spawning processes.
//
// Exit codes: 0 ok, 2 input error, 3 validation failure, 4 no solution,
// 5 verification failure, 6 integration failure.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "releq/report_io.hpp"

namespace releq::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kValidationFailure = 3,
  kNoSolution = 4,
  kVerificationFailure = 5,
  kIntegrationFailure = 6,
};

struct RunConfig {
  std::string command;
  std::string system_path;
  std::string report_path;
  std::optional<std::vector<double>> mu;
  std::optional<std::vector<double>> xi;
  bool free = false;
  int seeds = 50;
  std::uint64_t rng = 1;
  double tol = 1e-10;
  std::optional<double> T;
  std::optional<double> h;
  int every = 1;
  std::string format = "json";
  bool require_solution = false;
};

struct CommandResult {
  int exit_code = kOk;
  std::string output;
  std::string error;
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline CommandResult fail(int code, const std::string& msg) { return {code, "", msg + "\n"}; }

/// Runs fn, mapping library errors to exit codes.
template <class Fn>
CommandResult guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    return fail(kValidationFailure, std::string("validation failed (") + e.check() + "): " + e.what());
  } catch (const IntegrationError& e) {
    return fail(kIntegrationFailure, std::string("integration failed: ") + e.what());
  } catch (const SolverError& e) {
    return fail(kNoSolution, std::string("solver failed: ") + e.what());
  } catch (const Error& e) {
    return fail(kInputError, std::string("error: ") + e.what());
  } catch (const json::exception& e) {
    return fail(kInputError, std::string("error: ") + e.what());
  }
}

inline std::vector<REReport> read_reports(const std::string& path) {
  const json doc = read_json_file(path);
  const json* arr = &doc;
  if (doc.is_object()) {
    if (!doc.contains("reports")) throw InputError("report file has no 'reports' array");
    arr = &doc["reports"];
  }
  if (!arr->is_array()) throw InputError("report file must contain an array of reports");
  std::vector<REReport> out;
  for (const auto& j : *arr) out.push_back(report_from_json(j));
  if (out.empty()) throw InputError("report file contains no candidates");
  return out;
}

inline void check_candidate(const SystemModel& sys, const REReport& r, std::size_t index) {
  if (r.candidate.x.size() != sys.base_dim() || r.candidate.xi.xi.size() != sys.dim())
    throw InputError("report entry " + std::to_string(index) + " does not match the system dimensions");
}

}  // namespace detail

inline CommandResult cmd_validate(const RunConfig& cfg) {
  std::vector<ValidationCheck> checks;
  json out;
  out["command"] = "validate";
  out["system_path"] = cfg.system_path;
  auto emit = [&](bool ok) {
    json arr = json::array();
    for (const auto& c : checks)
      arr.push_back({{"name", c.name}, {"ok", c.ok}, {"value", releq::detail::finite(c.value)},
                     {"threshold", c.threshold}, {"message", c.message}});
    out["checks"] = arr;
    out["ok"] = ok;
    return detail::dump(out);
  };
  try {
    const SystemModel sys = load_system_file(cfg.system_path, &checks);
    out["system"] = sys.name();
    out["kind"] = kind_name(sys.kind());
    return {kOk, emit(true), ""};
  } catch (const ValidationError& e) {
    return {kValidationFailure, emit(false), std::string(e.what()) + "\n"};
  } catch (const Error& e) {
    return {kInputError, "", std::string("error: ") + e.what() + "\n"};
  }
}

inline CommandResult cmd_find(const RunConfig& cfg) {
  return detail::guarded([&]() -> CommandResult {
    const SystemModel sys = load_system_file(cfg.system_path);
    const int modes = (cfg.mu ? 1 : 0) + (cfg.xi ? 1 : 0) + (cfg.free ? 1 : 0);
    if (modes != 1) return detail::fail(kInputError, "error: find needs exactly one of --mu, --xi, --free");
    ScanSpec spec;
    spec.seeds = cfg.seeds;
    spec.rng = cfg.rng;
    spec.tol = cfg.tol;
    json head;
    head["command"] = "find";
    head["system"] = sys.name();
    head["kind"] = kind_name(sys.kind());
    if (cfg.mu) {
      spec.mode = ScanMode::fixed_mu;
      spec.mu = detail::to_vec(*cfg.mu);
      head["mu"] = *cfg.mu;
    } else if (cfg.xi) {
      spec.mode = ScanMode::fixed_xi;
      spec.xi = detail::to_vec(*cfg.xi);
      head["xi"] = *cfg.xi;
    } else {
      spec.mode = ScanMode::free;
    }
    head["mode"] = mode_name(spec.mode);
    head["rng"] = cfg.rng;
    head["seeds"] = cfg.seeds;
    head["tol"] = cfg.tol;
    const ScanResult res = scan_seeds(sys, spec);
    json body = to_json(res);
    for (auto it = body.begin(); it != body.end(); ++it) head[it.key()] = it.value();
    const int validated = body["validated_count"].get<int>();

    std::string text;
    if (cfg.format == "csv") {
      std::ostringstream os;
      os << "seed_index";
      for (int i = 1; i <= sys.base_dim(); ++i) os << ",x" << i;
      for (int a = 1; a <= sys.dim(); ++a) os << ",xi" << a;
      for (int a = 1; a <= sys.dim(); ++a) os << ",mu" << a;
      os << ",energy,validated,isotropy_ok,continuum,members,reduced_hessian_condition,residual_max\n";
      for (const auto& r : res.reports) {
        double worst = 0.0;
        for (const auto& [k, v] : r.residuals) worst = std::max(worst, v);
        os << r.seed_index;
        for (Eigen::Index i = 0; i < r.candidate.x.size(); ++i) os << ',' << detail::num(r.candidate.x[i]);
        for (Eigen::Index a = 0; a < r.candidate.xi.xi.size(); ++a) os << ',' << detail::num(r.candidate.xi.xi[a]);
        for (Eigen::Index a = 0; a < r.mu.mu.size(); ++a) os << ',' << detail::num(r.mu.mu[a]);
        os << ',' << detail::num(r.energy) << ',' << r.validated << ',' << r.isotropy_ok << ',' << r.continuum << ','
           << r.members << ',' << detail::num(releq::detail::finite(r.reduced_hessian_condition)) << ','
           << detail::num(worst) << '\n';
      }
      text = os.str();
    } else {
      text = detail::dump(head);
    }
    if (cfg.require_solution && validated == 0) return {kNoSolution, text, "no validated relative equilibrium found\n"};
    return {kOk, text, ""};
  });
}

inline CommandResult cmd_verify(const RunConfig& cfg) {
  return detail::guarded([&]() -> CommandResult {
    const SystemModel sys = load_system_file(cfg.system_path);
    const auto reports = detail::read_reports(cfg.report_path);
    VerifyOptions opt;
    if (cfg.h) opt.h = *cfg.h;
    if (cfg.T) opt.ep_T = *cfg.T;
    json out;
    out["command"] = "verify";
    out["system"] = sys.name();
    json arr = json::array();
    bool all = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      detail::check_candidate(sys, reports[i], i);
      const VerifyReport v = verify_relative_equilibrium(sys, reports[i], opt);
      json j = to_json(v);
      j["index"] = i;
      j["xi"] = releq::detail::vec_json(reports[i].candidate.xi.xi);
      j["x"] = releq::detail::vec_json(reports[i].candidate.x);
      arr.push_back(j);
      all = all && v.passed;
    }
    out["results"] = arr;
    out["passed"] = all;
    if (cfg.format == "csv") {
      std::ostringstream os;
      os << "index,passed,estimated_order,coarse_max_residual,fine_max_residual,ep_constancy\n";
      for (const auto& j : arr)
        os << j["index"].get<std::size_t>() << ',' << j["passed"].get<bool>() << ','
           << (j.contains("estimated_order") ? detail::num(j["estimated_order"].get<double>()) : "") << ','
           << detail::num(j["coarse_max_residual"].get<double>()) << ','
           << detail::num(j["fine_max_residual"].get<double>()) << ','
           << (j.contains("ep_constancy") ? detail::num(j["ep_constancy"].get<double>()) : "") << '\n';
      return {all ? kOk : kVerificationFailure, os.str(), all ? "" : "verification failed\n"};
    }
    return {all ? kOk : kVerificationFailure, detail::dump(out), all ? "" : "verification failed\n"};
  });
}

inline CommandResult cmd_integrate(const RunConfig& cfg) {
  return detail::guarded([&]() -> CommandResult {
    const SystemModel sys = load_system_file(cfg.system_path);
    if (!sys.lie_group()) return detail::fail(kInputError, "error: integrate requires lie_group system");
    if (!cfg.xi) return detail::fail(kInputError, "error: integrate needs --xi0");
    const double T = cfg.T.value_or(10.0), h = cfg.h.value_or(1e-3);
    const int every = std::max(1, cfg.every);
    const auto& l = *sys.lie_group();
    const auto body = ep_integrate(sys, {detail::to_vec(*cfg.xi)}, T, h);
    const auto group = reconstruct(sys.algebra().rep, body);
    const auto mu = spatial_momentum(sys, body, group);
    const int r = sys.dim();
    const bool casimir = sys.algebra().name == "so3";
    auto eps = [&](std::size_t k) { return body.xi[k].dot(body.p[k]) - l.value(body.xi[k]); };
    double de = 0.0, dm = 0.0, dc = 0.0;
    const double e0 = eps(0), c0 = body.p[0].norm();
    for (std::size_t k = 0; k < body.times.size(); ++k) {
      de = std::max(de, std::abs(eps(k) - e0));
      dm = std::max(dm, (mu[k].mu - mu[0].mu).norm());
      dc = std::max(dc, std::abs(body.p[k].norm() - c0));
    }
    json summary;
    summary["steps"] = body.times.size() - 1;
    summary["h"] = body.times.size() > 1 ? body.times[1] : 0.0;
    summary["T"] = T;
    summary["energy_drift"] = de;
    summary["momentum_drift"] = dm;
    if (casimir) summary["casimir_drift"] = dc;

    std::vector<std::string> cols{"t"};
    for (int a = 1; a <= r; ++a) cols.push_back("xi" + std::to_string(a));
    for (int a = 1; a <= r; ++a) cols.push_back("p" + std::to_string(a));
    for (int a = 1; a <= r; ++a) cols.push_back("mu" + std::to_string(a));
    cols.push_back("energy");
    auto row = [&](std::size_t k) {
      std::vector<double> v{body.times[k]};
      for (int a = 0; a < r; ++a) v.push_back(body.xi[k][a]);
      for (int a = 0; a < r; ++a) v.push_back(body.p[k][a]);
      for (int a = 0; a < r; ++a) v.push_back(mu[k].mu[a]);
      v.push_back(eps(k));
      return v;
    };
    const std::size_t N = body.times.size();
    if (cfg.format == "csv") {
      std::ostringstream os;
      for (auto it = summary.begin(); it != summary.end(); ++it) os << "# " << it.key() << " = " << it.value() << '\n';
      for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
      os << '\n';
      for (std::size_t k = 0; k < N; ++k) {
        if (k % static_cast<std::size_t>(every) != 0 && k + 1 != N) continue;
        const auto v = row(k);
        for (std::size_t c = 0; c < v.size(); ++c) os << (c ? "," : "") << detail::num(v[c]);
        os << '\n';
      }
      return {kOk, os.str(), ""};
    }
    json out;
    out["command"] = "integrate";
    out["system"] = sys.name();
    out["columns"] = cols;
    json rows = json::array();
    for (std::size_t k = 0; k < N; ++k)
      if (k % static_cast<std::size_t>(every) == 0 || k + 1 == N) rows.push_back(row(k));
    out["rows"] = rows;
    out["summary"] = summary;
    return {kOk, detail::dump(out), ""};
  });
}

inline CommandResult cmd_saari(const RunConfig& cfg) {
  return detail::guarded([&]() -> CommandResult {
    const SystemModel sys = load_system_file(cfg.system_path);
    const auto reports = detail::read_reports(cfg.report_path);
    json out;
    out["command"] = "saari";
    out["system"] = sys.name();
    out["note"] = "naive_variation is a diagnostic of the locked inertia along the orbit and is not expected to vanish";
    json arr = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      detail::check_candidate(sys, reports[i], i);
      json j = to_json(saari_scan(sys, reports[i], cfg.T.value_or(0.0)));
      j["index"] = i;
      j["xi"] = releq::detail::vec_json(reports[i].candidate.xi.xi);
      arr.push_back(j);
    }
    out["results"] = arr;
    if (cfg.format == "csv") {
      std::ostringstream os;
      os << "index,naive_variation,refined_variation,naive_formula_defect,refined_formula_defect,period\n";
      for (const auto& j : arr)
        os << j["index"].get<std::size_t>() << ',' << detail::num(j["naive_variation"].get<double>()) << ','
           << detail::num(j["refined_variation"].get<double>()) << ','
           << detail::num(j["naive_formula_defect"].get<double>()) << ','
           << detail::num(j["refined_formula_defect"].get<double>()) << ','
           << detail::num(j["period"].get<double>()) << '\n';
      return {kOk, os.str(), ""};
    }
    return {kOk, detail::dump(out), ""};
  });
}

inline CommandResult run(const RunConfig& cfg) {
  if (cfg.format != "json" && cfg.format != "csv") return detail::fail(kInputError, "error: --format must be json or csv");
  if (cfg.command == "validate") return cmd_validate(cfg);
  if (cfg.command == "find") return cmd_find(cfg);
  if (cfg.command == "verify") return cmd_verify(cfg);
  if (cfg.command == "integrate") return cmd_integrate(cfg);
  if (cfg.command == "saari") return cmd_saari(cfg);
  return detail::fail(kInputError, "error: unknown command '" + cfg.command + "'");
}

}  // namespace releq::cli
