#pragma once

// Residuals for the three relative-equilibrium criteria, a damped Newton
// solver, seed scanning with deduplication, and cross-validation.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "releq/systems.hpp"

namespace releq {

/// A point (x, 0, xi) of TM; g is informational (empty = identity).
struct Candidate {
  Vec x;
  AlgebraVector xi;
  Mat g;
};

/// Lewis criterion: [grad_x L_xi(x) ; C^c_ab xi^a mu_c] with mu the momentum at
/// (x, 0, xi). Zero exactly at relative equilibria.
inline Vec lewis_residual(const SystemModel& sys, const Candidate& cand) {
  const int n = sys.base_dim(), r = sys.dim();
  if (cand.x.size() != n) throw DimensionError("lewis_residual: base dimension mismatch");
  require_dim(sys.algebra().constants, cand.xi.xi, "lewis_residual");
  Vec out(n + r);
  if (n > 0) {
    const Mat e;
    out.head(n) = grad_fd([&](const Vec& y) { return locked_lagrangian(sys, y, e, cand.xi); }, cand.x, sys.fd());
  }
  const Vec mu = detail::body_momentum(sys, cand.x, Vec::Zero(n), cand.xi.xi);
  out.tail(r) = isotropy_residual(sys.algebra().constants, cand.xi, {mu}).mu;
  return out;
}

/// result_a = C^c_ab xi^b dl/dxi^c.
inline Vec ep_stationarity_residual(const SystemModel& sys, const AlgebraVector& xi) {
  const auto& l = detail::require_lie(sys, "ep_stationarity_residual");
  const auto& C = sys.algebra().constants;
  require_dim(C, xi.xi, "ep_stationarity_residual");
  const Vec p = l.gradient(xi.xi, sys.fd());
  const int r = C.dim();
  Vec out = Vec::Zero(r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c) out[a] += C(c, a, b) * xi.xi[b] * p[c];
  return out;
}

/// grad_x V^mu.
inline Vec amended_gradient_residual(const SystemModel& sys, const Vec& x, const MomentumVector& mu) {
  detail::require_simple(sys, "amended_gradient_residual");
  return grad_fd([&](const Vec& y) { return amended_potential(sys, y, mu); }, x, sys.fd());
}

namespace detail {

/// Derivatives of 1/2 mu^T K(x, g)^{-1} mu along g = exp(s^a E_a) at s = 0,
/// where K(x, g) is the locked inertia at g.
inline Vec group_amended_gradient(const SystemModel& sys, const Mat& G, const Vec& mu) {
  const auto& rep = sys.algebra().rep;
  const int r = sys.dim();
  const auto lu = G.partialPivLu();
  auto f = [&](const Vec& s) {
    const Mat Ad = adjoint_matrix(rep, exp_matrix(rep.hat(s)));
    const Vec m = Ad.transpose() * mu;
    return 0.5 * m.dot(lu.solve(m));
  };
  return grad_fd(f, Vec::Zero(r), sys.fd());
}

}  // namespace detail

/// Energy criterion on the momentum level set.
///  lie_group: result_b = gbar^{ac} C^d_bc mu_d gbar_ae xi^e (candidate xi).
///  simple_mechanical: [reduced Hessian . v (v = 0 at candidates); grad_x V^mu;
///    group-direction derivatives of V^mu].
/// Not available for trivialized systems (returns an empty vector).
inline Vec energy_criterion_residual(const SystemModel& sys, const Candidate& cand, const MomentumVector& mu) {
  const auto& C = sys.algebra().constants;
  require_dim(C, mu.mu, "energy_criterion_residual");
  const int r = sys.dim();
  if (auto* l = sys.lie_group()) {
    require_dim(C, cand.xi.xi, "energy_criterion_residual");
    const Mat H = l->hessian(cand.xi.xi, sys.fd());
    if (!(detail::condition_number(H) <= kConditionLimit)) throw DomainError("momentum block singular");
    const Vec deps = H * cand.xi.xi;
    const Vec z = H.partialPivLu().solve(deps);
    Vec out = Vec::Zero(r);
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        for (int d = 0; d < r; ++d) out[b] += C(d, b, c) * mu.mu[d] * z[c];
    return out;
  }
  if (auto* s = sys.simple()) {
    const int n = s->n;
    Vec out(2 * n + r);
    out.head(n).setZero();  // reduced Hessian acting on v = 0
    out.segment(n, n) = amended_gradient_residual(sys, cand.x, mu);
    out.tail(r) = detail::group_amended_gradient(sys, s->locked(cand.x), mu.mu);
    return out;
  }
  return Vec(0);
}

/// Solves dl/dxi(xi) = Ad*_g mu by Newton's method.
inline AlgebraVector xi_for_momentum(const SystemModel& sys, const Mat& g, const MomentumVector& mu) {
  const auto& l = detail::require_lie(sys, "xi_for_momentum");
  require_dim(sys.algebra().constants, mu.mu, "xi_for_momentum");
  const Vec target = detail::is_identity(g) ? mu.mu : coadjoint_transport(sys.algebra().rep, g, mu).mu;
  const double tol = 1e-12 * std::max(1.0, target.norm());
  Vec xi = Vec::Zero(sys.dim());
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    const Vec F = l.gradient(xi, sys.fd()) - target;
    const double nf = F.norm();
    if (nf <= tol) return {xi};
    if (!(nf < best)) {
      if (best <= 1e3 * tol) return {xi};
      throw SolverError("xi_for_momentum: Newton stalled at residual " + detail::sci(nf, 3));
    }
    best = nf;
    const Mat H = l.hessian(xi, sys.fd());
    if (!(detail::condition_number(H) <= kConditionLimit)) throw SolverError("xi_for_momentum: singular Hessian");
    xi -= H.partialPivLu().solve(F);
  }
  throw SolverError("xi_for_momentum: no convergence");
}

struct NewtonOptions {
  double tol = 1e-10;
  int max_iterations = 100;
  int polish_steps = 3;
  double rank_cutoff = 1e-8;
  FDScheme fd;
};

struct NewtonResult {
  Vec z;
  Vec residual;
  double norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;
};

/// Damped Newton on F(z) = 0 (least squares when overdetermined). Jacobian
/// by finite differences; the step is the minimum-norm solution with
/// singular values below rank_cutoff * s_max dropped, so directions along
/// which F is constant (symmetry orbits) get no step; backtracking by halving.
template <class Residual>
NewtonResult solve_newton(const Residual& F, Vec z0, const NewtonOptions& opt = {}) {
  NewtonResult res;
  res.z = std::move(z0);
  try {
    res.residual = F(res.z);
  } catch (const DomainError& e) {
    res.message = std::string("seed outside domain: ") + e.what();
    return res;
  }
  res.norm = res.residual.norm();

  auto step = [&](const Vec& z, const Vec& Fz) -> Vec {
    const Mat J = jacobian_fd(F, z, opt.fd);
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(opt.rank_cutoff);
    return svd.solve(-Fz);
  };

  auto try_step = [&](const Vec& dz, double max_halvings, bool require_factor2) {
    double lambda = 1.0;
    for (int k = 0; k <= max_halvings; ++k, lambda *= 0.5) {
      const Vec z = res.z + lambda * dz;
      Vec Fz;
      try {
        Fz = F(z);
      } catch (const DomainError&) {
        continue;
      }
      if (!Fz.allFinite()) continue;
      const double nz = Fz.norm();
      if (require_factor2 ? nz <= 0.5 * res.norm : nz < res.norm) {
        res.z = z;
        res.residual = Fz;
        res.norm = nz;
        return true;
      }
      if (require_factor2) return false;
    }
    return false;
  };

  try {
    for (; res.iterations < opt.max_iterations; ++res.iterations) {
      if (res.norm <= opt.tol) break;
      const Vec dz = step(res.z, res.residual);
      if (!dz.allFinite()) {
        res.message = "non-finite Newton step";
        return res;
      }
      if (!try_step(dz, 40, false)) {
        res.message = "line search failed to reduce the residual";
        return res;
      }
    }
  } catch (const DomainError& e) {
    res.message = std::string("domain exit: ") + e.what();
    return res;
  }
  if (res.norm > opt.tol) {
    res.message = "maximum iterations reached";
    return res;
  }
  res.converged = true;
  for (int k = 0; k < opt.polish_steps && res.norm > 0.0; ++k) {
    try {
      if (!try_step(step(res.z, res.residual), 0, true)) break;
    } catch (const DomainError&) {
      break;
    }
  }
  return res;
}

enum class ScanMode { fixed_mu, fixed_xi, free };

inline const char* mode_name(ScanMode m) {
  switch (m) {
    case ScanMode::fixed_mu: return "fixed_mu";
    case ScanMode::fixed_xi: return "fixed_xi";
    case ScanMode::free: return "free";
  }
  return "?";
}

struct ScanSpec {
  ScanMode mode = ScanMode::free;
  Vec mu;  // fixed_mu
  Vec xi;  // fixed_xi
  int seeds = 50;
  std::uint64_t rng = 1;
  double tol = 1e-10;
};

/// Validation tolerance relative to the convergence tolerance.
inline constexpr double kValidationFactor = 10.0;
inline constexpr double kDedupeDistance = 1e-6;
inline constexpr int kContinuumMembers = 20;
inline constexpr double kContinuumEnergyBand = 1e-9;

struct REReport {
  Candidate candidate;
  MomentumVector mu;
  std::map<std::string, double> residuals;
  std::string primary;
  bool isotropy_ok = false;
  double reduced_hessian_condition = 1.0;
  double energy = 0.0;
  bool converged = false;
  bool validated = false;
  int iterations = 0;
  int seed_index = 0;
  bool continuum = false;
  int members = 1;
  std::string message;
};

struct ScanResult {
  std::vector<REReport> reports;
  int seeds_tried = 0;
  int failures = 0;
  std::vector<std::string> failure_messages;
};

/// Every applicable criterion evaluated at the report's candidate.
inline std::map<std::string, double> cross_validate(const SystemModel& sys, const REReport& rep) {
  std::map<std::string, double> out;
  const auto& c = rep.candidate;
  const Candidate at_e{c.x, c.xi, Mat()};
  try {
    out["lewis"] = lewis_residual(sys, at_e).norm();
    const Vec mu = detail::body_momentum(sys, c.x, Vec::Zero(sys.base_dim()), c.xi.xi);
    if (sys.lie_group()) {
      out["energy"] = energy_criterion_residual(sys, at_e, {mu}).norm();
      out["ep_stationarity"] = ep_stationarity_residual(sys, c.xi).norm();
    } else if (sys.simple()) {
      out["energy"] = energy_criterion_residual(sys, at_e, {mu}).norm();
      out["amended_gradient"] = amended_gradient_residual(sys, c.x, {mu}).norm();
    }
  } catch (const Error& e) {
    out["evaluation_failed"] = 1.0;
  }
  return out;
}

namespace detail {

struct SeedBox {
  Vec lo, hi;
};

inline SeedBox seed_box(const SystemModel& sys) {
  const int n = sys.base_dim();
  SeedBox b{Vec::Constant(n, 0.1), Vec::Constant(n, 1.9)};
  if (auto* d = sys.domain(); d && *d) {
    const Box& box = **d;
    for (int i = 0; i < n; ++i) {
      const bool flo = std::isfinite(box.lo[i]), fhi = std::isfinite(box.hi[i]);
      if (flo) b.lo[i] = box.lo[i];
      if (fhi) b.hi[i] = box.hi[i];
      if (!flo && fhi) b.lo[i] = b.hi[i] - 1.8;
      if (flo && !fhi) b.hi[i] = b.lo[i] + 1.8;
    }
  }
  return b;
}

/// Base seeds: an interior grid when n = 1, uniform random otherwise.
inline std::vector<Vec> base_seeds(const SystemModel& sys, int count, std::mt19937_64& rng) {
  const int n = sys.base_dim();
  const SeedBox b = seed_box(sys);
  std::vector<Vec> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    Vec x(n);
    if (n == 1)
      x[0] = b.lo[0] + (b.hi[0] - b.lo[0]) * (k + 0.5) / count;
    else
      for (int i = 0; i < n; ++i) x[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * u(rng);
    out.push_back(x);
  }
  return out;
}

inline Vec normal_vec(int r, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(r);
  for (int a = 0; a < r; ++a) v[a] = nd(rng);
  return v;
}

inline Vec unit_vec(int r, std::mt19937_64& rng) {
  for (;;) {
    Vec v = normal_vec(r, rng);
    if (v.norm() > 1e-8) return v / v.norm();
  }
}

inline Vec concat(const Vec& a, const Vec& b) {
  Vec z(a.size() + b.size());
  z << a, b;
  return z;
}

inline void finish_report(const SystemModel& sys, REReport& rep, double tol) {
  const int n = sys.base_dim();
  const auto& c = rep.candidate;
  const MomentumVector body{body_momentum(sys, c.x, Vec::Zero(n), c.xi.xi)};
  const double iso = isotropy_residual(sys.algebra().constants, c.xi, body).mu.norm();
  // reports carrying a group element state the spatial momentum
  rep.mu = is_identity(c.g) ? body : coadjoint_transport(sys.algebra().rep, inverse(c.g), body);
  rep.isotropy_ok = iso <= tol;
  const TrivializedState st{c.x, Mat(), Vec::Zero(n), c.xi.xi};
  rep.energy = energy(sys, st);
  rep.reduced_hessian_condition = reduced_hessian_condition(hessian_blocks(sys, st));
  const double primary = rep.residuals.count("primary") ? rep.residuals["primary"] : 0.0;
  rep.residuals = cross_validate(sys, rep);
  rep.residuals["primary"] = primary;
  rep.residuals["isotropy"] = iso;
  bool ok = rep.converged && !rep.residuals.count("evaluation_failed");
  for (const auto& [k, v] : rep.residuals)
    if (k != "primary" && !(v <= kValidationFactor * tol)) ok = false;
  rep.validated = ok;
}

inline std::vector<REReport> dedupe(std::vector<REReport> in) {
  std::vector<REReport> out;
  for (auto& r : in) {
    const Vec z = concat(r.candidate.x, r.candidate.xi.xi);
    bool dup = false;
    for (const auto& k : out)
      if ((concat(k.candidate.x, k.candidate.xi.xi) - z).norm() <= kDedupeDistance) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(std::move(r));
  }
  return out;
}

/// Collapses groups of >= 20 reports sharing the same energy into one
/// representative flagged as a continuum.
inline std::vector<REReport> collapse_continua(std::vector<REReport> in) {
  std::vector<bool> taken(in.size(), false);
  std::vector<REReport> out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (taken[i]) continue;
    std::vector<std::size_t> group{i};
    for (std::size_t j = i + 1; j < in.size(); ++j)
      if (!taken[j] && std::abs(in[j].energy - in[i].energy) <= kContinuumEnergyBand) group.push_back(j);
    if (static_cast<int>(group.size()) >= kContinuumMembers) {
      for (auto j : group) taken[j] = true;
      REReport rep = in[i];
      rep.continuum = true;
      rep.members = static_cast<int>(group.size());
      out.push_back(std::move(rep));
    } else {
      taken[i] = true;
      out.push_back(in[i]);
    }
  }
  std::sort(out.begin(), out.end(), [](const REReport& a, const REReport& b) { return a.seed_index < b.seed_index; });
  return out;
}

}  // namespace detail

/// Runs the solver from a family of seeds in the requested mode, then
/// deduplicates and cross-validates. Results are ordered by seed index.
inline ScanResult scan_seeds(const SystemModel& sys, const ScanSpec& spec) {
  const int n = sys.base_dim(), r = sys.dim();
  const auto& alg = sys.algebra();
  ScanResult out;
  std::mt19937_64 rng(spec.rng);
  NewtonOptions opt;
  opt.tol = spec.tol;
  opt.fd = sys.fd();
  if (spec.mode == ScanMode::fixed_mu && spec.mu.size() != r)
    throw DimensionError("fixed_mu: expected " + std::to_string(r) + " momentum components");
  if (spec.mode == ScanMode::fixed_xi && spec.xi.size() != r)
    throw DimensionError("fixed_xi: expected " + std::to_string(r) + " velocity components");
  const int count = std::max(1, spec.seeds);

  std::vector<REReport> found;
  auto fail = [&](int k, const std::string& msg) {
    ++out.failures;
    out.failure_messages.push_back("seed " + std::to_string(k) + ": " + msg);
  };
  auto accept = [&](REReport rep) {
    detail::finish_report(sys, rep, spec.tol);
    found.push_back(std::move(rep));
  };

  if (auto* l = sys.lie_group()) {
    if (spec.mode == ScanMode::fixed_xi) {
      out.seeds_tried = 1;
      REReport rep;
      rep.candidate = {Vec(0), {spec.xi}, Mat()};
      const double res = ep_stationarity_residual(sys, rep.candidate.xi).norm();
      rep.residuals["primary"] = res;
      rep.converged = res <= spec.tol;
      rep.primary = "ep_stationarity";
      if (!rep.converged) rep.message = "given xi is not stationary";
      accept(std::move(rep));
    } else if (spec.mode == ScanMode::free) {
      const bool normalize = l->homogeneous_quadratic();
      auto F = [&](const Vec& z) {
        const Vec ep = ep_stationarity_residual(sys, {z});
        if (!normalize) return ep;
        Vec f(r + 1);
        f << ep, z.squaredNorm() - 1.0;
        return f;
      };
      for (int k = 0; k < count; ++k) {
        ++out.seeds_tried;
        const auto nr = solve_newton(F, detail::unit_vec(r, rng), opt);
        if (!nr.converged) {
          fail(k, nr.message);
          continue;
        }
        REReport rep;
        rep.candidate = {Vec(0), {nr.z}, Mat()};
        rep.converged = true;
        rep.iterations = nr.iterations;
        rep.seed_index = k;
        rep.primary = "ep_stationarity";
        rep.residuals["primary"] = ep_stationarity_residual(sys, {nr.z}).norm();
        accept(std::move(rep));
      }
    } else {
      const MomentumVector mu{spec.mu};
      auto xi_of = [&](const Vec& eta) { return xi_for_momentum(sys, exp_matrix(alg.rep.hat(eta)), mu); };
      auto F = [&](const Vec& eta) {
        const Mat g = exp_matrix(alg.rep.hat(eta));
        const AlgebraVector xi = xi_for_momentum(sys, g, mu);
        const MomentumVector body = coadjoint_transport(alg.rep, g, mu);
        return energy_criterion_residual(sys, {Vec(0), xi, Mat()}, body);
      };
      for (int k = 0; k < count; ++k) {
        ++out.seeds_tried;
        const Vec eta0 = k == 0 ? Vec(Vec::Zero(r)) : Vec(0.8 * detail::normal_vec(r, rng));
        NewtonResult nr;
        try {
          nr = solve_newton(F, eta0, opt);
        } catch (const SolverError& e) {
          fail(k, e.what());
          continue;
        }
        if (!nr.converged) {
          fail(k, nr.message);
          continue;
        }
        REReport rep;
        rep.candidate = {Vec(0), xi_of(nr.z), exp_matrix(alg.rep.hat(nr.z))};
        rep.converged = true;
        rep.iterations = nr.iterations;
        rep.seed_index = k;
        rep.primary = "energy";
        rep.residuals["primary"] = nr.norm;
        accept(std::move(rep));
      }
    }
  } else {
    const bool simple = sys.simple() != nullptr;
    const bool abelian = alg.constants.is_abelian();
    const auto xs = detail::base_seeds(sys, count, rng);
    for (int k = 0; k < count; ++k) {
      ++out.seeds_tried;
      REReport rep;
      rep.seed_index = k;
      NewtonResult nr;
      try {
        if (spec.mode == ScanMode::fixed_xi) {
          const AlgebraVector xi{spec.xi};
          nr = solve_newton([&](const Vec& x) { return lewis_residual(sys, {x, xi, Mat()}); }, xs[k], opt);
          rep.candidate = {nr.z, xi, Mat()};
          rep.primary = "lewis";
        } else if (spec.mode == ScanMode::free) {
          auto F = [&](const Vec& z) { return lewis_residual(sys, {z.head(n), {z.tail(r)}, Mat()}); };
          nr = solve_newton(F, detail::concat(xs[k], detail::normal_vec(r, rng)), opt);
          rep.candidate = {nr.z.head(n), {nr.z.tail(r)}, Mat()};
          rep.primary = "lewis";
        } else if (simple) {
          const auto& s = *sys.simple();
          const MomentumVector mu{spec.mu};
          if (abelian) {
            nr = solve_newton([&](const Vec& x) { return amended_gradient_residual(sys, x, mu); }, xs[k], opt);
            const Vec x = nr.z;
            if (nr.converged) rep.candidate = {x, {s.locked(x).partialPivLu().solve(mu.mu)}, Mat()};
          } else {
            // amended potential on the level set, in base and group directions
            auto Vmu = [&](const Vec& z) {
              const Mat g = exp_matrix(alg.rep.hat(z.tail(r)));
              return amended_potential(sys, z.head(n), coadjoint_transport(alg.rep, g, mu));
            };
            auto F = [&](const Vec& z) { return grad_fd(Vmu, z, sys.fd()); };
            const Vec eta0 = k == 0 ? Vec(Vec::Zero(r)) : Vec(0.8 * detail::normal_vec(r, rng));
            nr = solve_newton(F, detail::concat(xs[k], eta0), opt);
            if (nr.converged) {
              const Vec x = nr.z.head(n);
              const Mat g = exp_matrix(alg.rep.hat(nr.z.tail(r)));
              const Vec body = coadjoint_transport(alg.rep, g, mu).mu;
              rep.candidate = {x, {s.locked(x).partialPivLu().solve(body)}, g};
            }
          }
          rep.primary = "amended_gradient";
        } else {
          const Vec mu = spec.mu;
          auto F = [&](const Vec& z) {
            const Vec x = z.head(n), xi = z.tail(r);
            return detail::concat(lewis_residual(sys, {x, {xi}, Mat()}),
                                  detail::body_momentum(sys, x, Vec::Zero(n), xi) - mu);
          };
          nr = solve_newton(F, detail::concat(xs[k], detail::normal_vec(r, rng)), opt);
          rep.candidate = {nr.z.head(n), {nr.z.tail(r)}, Mat()};
          rep.primary = "lewis";
        }
      } catch (const Error& e) {
        fail(k, e.what());
        continue;
      }
      if (!nr.converged) {
        fail(k, nr.message);
        continue;
      }
      rep.converged = true;
      rep.iterations = nr.iterations;
      rep.residuals["primary"] = nr.norm;
      try {
        accept(std::move(rep));
      } catch (const Error& e) {
        fail(k, e.what());
      }
    }
  }
  out.reports = detail::collapse_continua(detail::dedupe(std::move(found)));
  return out;
}

}  // namespace releq
