#pragma once

// Euler-Poincare integration, group reconstruction, chart Lagrangians and
// the discrete-action residual used to verify candidate motions without
// going through any of the reduced criteria.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "releq/equilibria.hpp"

namespace releq {

struct BodyTrajectory {
  std::vector<double> times;
  std::vector<Vec> xi;
  std::vector<Vec> p;
  std::vector<Vec> xi_dot;
};

struct GroupTrajectory {
  std::vector<double> times;
  std::vector<Mat> g;
};

namespace detail {

inline Vec ep_rhs(const SystemModel& sys, const LieGroupSystem& l, const Vec& xi) {
  const auto& C = sys.algebra().constants;
  const int r = C.dim();
  const Vec p = l.gradient(xi, sys.fd());
  Vec rhs = Vec::Zero(r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c) rhs[a] -= C(c, a, b) * xi[b] * p[c];
  const Mat H = l.hessian(xi, sys.fd());
  if (!(condition_number(H) <= kConditionLimit))
    throw IntegrationError("momentum block singular along the trajectory");
  return H.partialPivLu().solve(rhs);
}

}  // namespace detail

/// Classical RK4 on d/dt(dl/dxi) = -ad*_xi(dl/dxi), solved for xi_dot. The
/// step is adjusted to T / round(T / h) so the last sample lands on T.
inline BodyTrajectory ep_integrate(const SystemModel& sys, const AlgebraVector& xi0, double T, double h,
                                   double xi_bound = 1e8) {
  const auto& l = detail::require_lie(sys, "ep_integrate");
  require_dim(sys.algebra().constants, xi0.xi, "ep_integrate");
  if (!(T > 0.0) || !(h > 0.0) || !std::isfinite(T) || !std::isfinite(h))
    throw IntegrationError("ep_integrate: T and h must be positive");
  const long steps = std::max(1L, std::lround(T / h));
  const double dt = T / static_cast<double>(steps);
  BodyTrajectory tr;
  tr.times.reserve(static_cast<std::size_t>(steps + 1));
  Vec xi = xi0.xi;
  auto f = [&](const Vec& z) { return detail::ep_rhs(sys, l, z); };
  Vec k1 = f(xi);
  for (long k = 0;; ++k) {
    tr.times.push_back(static_cast<double>(k) * dt);
    tr.xi.push_back(xi);
    tr.p.push_back(l.gradient(xi, sys.fd()));
    tr.xi_dot.push_back(k1);
    if (k == steps) break;
    const Vec k2 = f(xi + 0.5 * dt * k1);
    const Vec k3 = f(xi + 0.5 * dt * k2);
    const Vec k4 = f(xi + dt * k3);
    xi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!xi.allFinite() || xi.norm() > xi_bound)
      throw IntegrationError("ep_integrate: |xi| left the admissible bound at t = " +
                             std::to_string(static_cast<double>(k + 1) * dt));
    k1 = f(xi);
  }
  return tr;
}

/// g_{k+1} = g_k exp(h xi^(t_k + h/2)), with the midpoint value taken from
/// the cubic Hermite interpolant of the samples. Starts at g0 (identity by
/// default).
inline GroupTrajectory reconstruct(const MatrixGroupRep& rep, const BodyTrajectory& tr, const Mat& g0 = Mat()) {
  GroupTrajectory out;
  if (tr.times.empty()) return out;
  if (tr.xi.size() != tr.times.size() || tr.xi_dot.size() != tr.times.size())
    throw DimensionError("reconstruct: sample counts disagree");
  Mat g = g0.size() ? g0 : rep.identity();
  out.times = tr.times;
  out.g.reserve(tr.times.size());
  out.g.push_back(g);
  for (std::size_t k = 0; k + 1 < tr.times.size(); ++k) {
    const double h = tr.times[k + 1] - tr.times[k];
    if (!(h > 0.0)) throw DimensionError("reconstruct: times must be strictly increasing");
    const Vec mid = 0.5 * (tr.xi[k] + tr.xi[k + 1]) + h / 8.0 * (tr.xi_dot[k] - tr.xi_dot[k + 1]);
    g = g * exp_matrix(h * rep.hat(mid));
    out.g.push_back(g);
    if ((k + 1) % 512 == 0 || k + 2 == tr.times.size()) {
      const double res = membership_residual(rep, g);
      if (!(res <= kMembershipTolerance))
        throw IntegrationError("reconstruct: group membership residual " + detail::sci(res) + " exceeded");
    }
  }
  return out;
}

/// mu(t) = Ad*_{g(t)^-1} p(t); constant along solutions.
inline std::vector<MomentumVector> spatial_momentum(const SystemModel& sys, const BodyTrajectory& body,
                                                    const GroupTrajectory& group) {
  if (body.times.size() != group.times.size()) throw DimensionError("spatial_momentum: trajectories not aligned");
  std::vector<MomentumVector> out;
  out.reserve(body.times.size());
  for (std::size_t k = 0; k < body.times.size(); ++k)
    out.push_back(coadjoint_transport(sys.algebra().rep, detail::inverse(group.g[k]), {body.p[k]}));
  return out;
}

/// L in the chart (x, theta) with g = exp(theta^): spatial velocity from
/// dexp, body velocity exp(-ad_theta) of that, plus A(x) xdot for simple
/// mechanical systems.
inline double chart_lagrangian(const SystemModel& sys, const Vec& x, const Vec& theta, const Vec& xdot,
                               const Vec& theta_dot) {
  const auto& C = sys.algebra().constants;
  const AlgebraVector spatial = dexp(C, {theta}, {theta_dot});
  Vec w = exp_matrix(-ad_matrix(C, theta)) * spatial.xi;
  if (auto* s = sys.simple(); s && s->has_connection()) w += s->connection(x) * xdot;
  return sys.lagrangian(x, xdot, w);
}

struct OracleReport {
  double h = 0.0;
  std::vector<double> residuals;  // one per interior node, relative to the force scale
  double max_norm = 0.0;
  double max_absolute = 0.0;  // largest residual before scaling
};

struct OracleOptions {
  /// FD step for the node derivatives, as a fraction of h.
  double step_fraction = 1e-3;
  /// Below this force scale residuals are reported unscaled.
  double scale_floor = 1e-8;
};

/// Midpoint discrete action residual: for each interior node
///   r_k = (1/h) d/dq_k h [L(q_{k-1/2}, (q_k - q_{k-1})/h) + L(q_{k+1/2}, (q_{k+1} - q_k)/h)]
/// with q_{k-1/2} the average of neighbours. O(h^2) on true solutions.
///
/// On a solution the momentum rate balances dL/dq, which splits into the
/// potential force (dL/dq at zero velocity) and a velocity dependent part.
/// ||r_k|| is divided by the larger of the two at the node so that one
/// threshold works for slow and fast orbits alike.
template <class LChart>
OracleReport discrete_el_residual(const LChart& L, const std::vector<Vec>& q, double h,
                                  const OracleOptions& opt = {}) {
  if (q.size() < 3) throw DimensionError("discrete_el_residual: need at least 3 samples");
  if (!(h > 0.0)) throw DomainError("discrete_el_residual: spacing must be positive");
  OracleReport rep;
  rep.h = h;
  const FDScheme fd{opt.step_fraction, opt.step_fraction, true};
  for (std::size_t k = 1; k + 1 < q.size(); ++k) {
    const Vec &qm = q[k - 1], &q0 = q[k], &qp = q[k + 1];
    auto S = [&](const Vec& u) {
      const Vec y = q0 + h * u;
      return h * (L(Vec(0.5 * (qm + y)), Vec((y - qm) / h)) + L(Vec(0.5 * (y + qp)), Vec((qp - y) / h)));
    };
    const double r = (grad_fd(S, Vec::Zero(q0.size()), fd) / (h * h)).norm();

    const Vec mm = 0.5 * (qm + q0), mp = 0.5 * (q0 + qp), vm = (q0 - qm) / h, vp = (qp - q0) / h;
    const Vec zero = Vec::Zero(q0.size());
    auto dq = [&](const Vec& m, const Vec& v) { return grad_fd([&](const Vec& y) { return L(y, v); }, m); };
    const Vec force = 0.5 * (dq(mm, vm) + dq(mp, vp));
    const Vec potential = 0.5 * (dq(mm, zero) + dq(mp, zero));
    const double scale = std::max(potential.norm(), (force - potential).norm());
    const double rel = scale > opt.scale_floor ? r / scale : r;

    rep.residuals.push_back(rel);
    rep.max_norm = std::max(rep.max_norm, rel);
    rep.max_absolute = std::max(rep.max_absolute, r);
  }
  return rep;
}

/// Variant taking sample times; rejects non-uniform spacing.
template <class LChart>
OracleReport discrete_el_residual(const LChart& L, const std::vector<double>& t, const std::vector<Vec>& q,
                                  const OracleOptions& opt = {}) {
  if (t.size() != q.size() || t.size() < 3) throw DimensionError("discrete_el_residual: need matching samples");
  const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs((t[k] - t[k - 1]) - h) > 1e-9 * h) throw DomainError("discrete_el_residual: non-uniform spacing");
  return discrete_el_residual(L, q, h, opt);
}

/// Fixed invertible distortion q = psi(u) = u + a sin(P u + phi) of chart
/// coordinates (P a cyclic shift). Relative-equilibrium curves are straight
/// lines in canonical charts, where the discrete residual vanishes
/// identically; verifying in a distorted chart exercises the full equations.
struct ChartDistortion {
  double amplitude = 0.2;
  double phase = 0.7;

  Vec shifted(const Vec& u) const {
    const auto d = u.size();
    Vec s(d);
    for (Eigen::Index i = 0; i < d; ++i) s[i] = u[(i + 1) % d] + phase;
    return s;
  }
  Vec map(const Vec& u) const { return u + amplitude * shifted(u).array().sin().matrix(); }
  Vec tangent(const Vec& u, const Vec& du) const {
    const auto d = u.size();
    const Vec c = shifted(u).array().cos().matrix();
    Vec out = du;
    for (Eigen::Index i = 0; i < d; ++i) out[i] += amplitude * c[i] * du[(i + 1) % d];
    return out;
  }
  Vec inverse(const Vec& q) const {
    Vec u = q;
    for (int it = 0; it < 200; ++it) {
      const Vec next = q - amplitude * shifted(u).array().sin().matrix();
      const double d = (next - u).cwiseAbs().maxCoeff();
      u = next;
      if (d <= 1e-16 * std::max(1.0, q.cwiseAbs().maxCoeff())) break;
    }
    return u;
  }
};

struct VerifyOptions {
  double oracle_T = 1.0;
  double h = 1e-2;  // coarse grid; the fine grid uses h / 2
  double ep_T = 10.0;
  double ep_h = 1e-3;
  double order_lo = 1.8;
  double order_hi = 2.2;
  double max_residual = 1e-2;
  double ep_tolerance = 1e-9;
  double exact_floor = 1e-11;
  OracleOptions oracle;
};

struct VerifyReport {
  OracleReport coarse;
  OracleReport fine;
  std::optional<double> order;
  bool exact_discrete = false;
  std::optional<double> ep_constancy;  // lie_group only
  bool passed = false;
  std::string message;
};

namespace detail {

/// Oracle residual along t -> (x, exp(t xi)) on [0, T] with step h, using
/// windows in which the chart is re-centred by left translation.
inline OracleReport re_oracle(const SystemModel& sys, const Candidate& cand, double T, double h,
                              const OracleOptions& opt) {
  const int n = sys.base_dim(), r = sys.dim();
  const Vec& xi = cand.xi.xi;
  const double speed = xi.norm();
  const double window = speed > 0.0 ? 0.5 / speed : T;
  const long m = std::max(2L, static_cast<long>(std::floor(window / h + 1e-9)));
  const ChartDistortion psi;
  auto L = [&](const Vec& u, const Vec& du) {
    const Vec q = psi.map(u), dq = psi.tangent(u, du);
    return chart_lagrangian(sys, q.head(n), q.tail(r), dq.head(n), dq.tail(r));
  };
  OracleReport total;
  total.h = h;
  const long nodes = std::max(1L, std::lround(T / h) - 1);
  // After left translation every window is the same chart curve
  // theta(t) = (t - t_s) xi, so one window's residuals tile the span.
  std::vector<Vec> samples;
  for (long j = 0; j <= m; ++j) {
    Vec q(n + r);
    q << cand.x, static_cast<double>(j) * h * xi;
    samples.push_back(psi.inverse(q));
  }
  const OracleReport w = discrete_el_residual(L, samples, h, opt);
  long done = 0;
  while (done < nodes) {
    for (double v : w.residuals) {
      if (done >= nodes) break;
      total.residuals.push_back(v);
      total.max_norm = std::max(total.max_norm, v);
      ++done;
    }
  }
  return total;
}

}  // namespace detail

/// Checks that t -> (x, exp(t xi)) solves the unreduced equations: discrete
/// action residual on two grids with its convergence order, plus (for
/// lie_group systems) constancy of the Euler-Poincare flow from xi.
inline VerifyReport verify_relative_equilibrium(const SystemModel& sys, const REReport& report,
                                                const VerifyOptions& opt = {}) {
  VerifyReport out;
  const Candidate cand{report.candidate.x, report.candidate.xi, Mat()};
  if (cand.x.size() != sys.base_dim()) throw DimensionError("verify: candidate base dimension mismatch");
  require_dim(sys.algebra().constants, cand.xi.xi, "verify");
  try {
    out.coarse = detail::re_oracle(sys, cand, opt.oracle_T, opt.h, opt.oracle);
    out.fine = detail::re_oracle(sys, cand, opt.oracle_T, 0.5 * opt.h, opt.oracle);
  } catch (const DomainError& e) {
    out.message = std::string("chart windowing failure: ") + e.what();
    return out;
  }
  bool ok;
  if (out.coarse.max_norm <= opt.exact_floor && out.fine.max_norm <= opt.exact_floor) {
    out.exact_discrete = true;
    ok = true;
  } else {
    const double order = std::log2(out.coarse.max_norm / out.fine.max_norm);
    out.order = std::isfinite(order) ? order : 0.0;
    ok = *out.order >= opt.order_lo && *out.order <= opt.order_hi && out.coarse.max_norm <= opt.max_residual;
    if (!ok) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "oracle residual %.3e, order %.3f outside [%.1f, %.1f]",
                    out.coarse.max_norm, *out.order, opt.order_lo, opt.order_hi);
      out.message = buf;
    }
  }
  if (sys.lie_group()) {
    try {
      const auto tr = ep_integrate(sys, cand.xi, opt.ep_T, opt.ep_h);
      double worst = 0.0;
      for (const auto& v : tr.xi) worst = std::max(worst, (v - cand.xi.xi).norm());
      out.ep_constancy = worst;
      if (!(worst <= opt.ep_tolerance)) {
        ok = false;
        if (out.message.empty()) out.message = "Euler-Poincare flow drifts by " + detail::sci(worst, 3);
      }
    } catch (const IntegrationError& e) {
      ok = false;
      out.message = e.what();
    }
  }
  out.passed = ok;
  return out;
}

}  // namespace releq
