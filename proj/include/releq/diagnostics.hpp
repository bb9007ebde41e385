#pragma once

// Locked-inertia diagnostics along relative-equilibrium orbits (naive and
// refined Saari quantities), bi-invariance and momentum equivariance checks.

#include <functional>
#include <numbers>
#include <vector>

#include "releq/dynamics.hpp"

namespace releq {

/// Derivative of a quantity at t = 0 along the orbit, analytic and by FD.
template <class T>
struct OrbitDerivative {
  T analytic;
  T fd;
  double defect = 0.0;  // max |analytic - fd|
};

namespace detail {

/// Base point of a report's orbit: its x and group element (identity if none).
inline Mat orbit_start(const SystemModel& sys, const Mat& g) {
  return g.size() ? g : sys.algebra().rep.identity();
}

/// Locked inertia at exp(t xi^) g0, x fixed.
inline Mat inertia_along(const SystemModel& sys, const Vec& x, const Mat& g0, const AlgebraVector& xi, double t) {
  const Mat g = exp_matrix(t * sys.algebra().rep.hat(xi.xi)) * g0;
  return locked_inertia(sys, x, g, xi);
}

inline constexpr double kOrbitFdStep = 1e-5;

}  // namespace detail

/// xi~(g_bc) = -(xi^a C^d_ab g_dc + xi^a C^d_ac g_bd), with the FD derivative
/// of the locked inertia along t -> exp(t xi^) g.
inline OrbitDerivative<Mat> naive_saari_derivative(const SystemModel& sys, const Vec& x, const Mat& g,
                                                   const AlgebraVector& xi) {
  const Mat g0 = detail::orbit_start(sys, g);
  const Mat K = locked_inertia(sys, x, g0, xi);
  const Mat ad = ad_matrix(sys.algebra().constants, xi.xi);
  OrbitDerivative<Mat> out;
  out.analytic = -(ad.transpose() * K + K * ad);
  const double s = detail::kOrbitFdStep;
  out.fd = (detail::inertia_along(sys, x, g0, xi, s) - detail::inertia_along(sys, x, g0, xi, -s)) / (2.0 * s);
  out.defect = (out.analytic - out.fd).cwiseAbs().maxCoeff();
  return out;
}

/// xi~(g_bc xi^c) = -C^d_ab g_cd xi^a xi^c; vanishes exactly when
/// g(xi, [xi, eta]) = 0 for all eta.
inline OrbitDerivative<Vec> refined_saari_derivative(const SystemModel& sys, const Vec& x, const Mat& g,
                                                     const AlgebraVector& xi) {
  const Mat g0 = detail::orbit_start(sys, g);
  const Mat K = locked_inertia(sys, x, g0, xi);
  const Mat ad = ad_matrix(sys.algebra().constants, xi.xi);
  OrbitDerivative<Vec> out;
  out.analytic = -(ad.transpose() * (K * xi.xi));
  const double s = detail::kOrbitFdStep;
  out.fd = (detail::inertia_along(sys, x, g0, xi, s) * xi.xi - detail::inertia_along(sys, x, g0, xi, -s) * xi.xi) /
           (2.0 * s);
  out.defect = (out.analytic - out.fd).cwiseAbs().maxCoeff();
  return out;
}

struct SaariReport {
  double naive_variation = 0.0;    // max_t max-entry |K(t) - K(0)|
  double refined_variation = 0.0;  // max_t max-entry |K(t) xi - K(0) xi|
  double naive_formula_defect = 0.0;
  double refined_formula_defect = 0.0;
  double period = 0.0;
  int samples = 0;
};

/// Samples the locked inertia along exp(t xi^) m for t in [0, T] (T <= 0
/// means one period 2 pi / |xi|). The orbit starts at the report's base
/// point with g = e, where its xi is the generating velocity.
inline SaariReport saari_scan(const SystemModel& sys, const REReport& report, double T = 0.0, int samples = 200) {
  const auto& c = report.candidate;
  const Mat g0 = sys.algebra().rep.identity();
  const double speed = c.xi.xi.norm();
  SaariReport out;
  out.period = T > 0.0 ? T : (speed > 0.0 ? 2.0 * std::numbers::pi / speed : 1.0);
  out.samples = samples;
  const Mat K0 = locked_inertia(sys, c.x, g0, c.xi);
  const Vec m0 = K0 * c.xi.xi;
  for (int k = 1; k <= samples; ++k) {
    const double t = out.period * k / samples;
    const Mat K = detail::inertia_along(sys, c.x, g0, c.xi, t);
    out.naive_variation = std::max(out.naive_variation, (K - K0).cwiseAbs().maxCoeff());
    out.refined_variation = std::max(out.refined_variation, (K * c.xi.xi - m0).cwiseAbs().maxCoeff());
  }
  out.naive_formula_defect = naive_saari_derivative(sys, c.x, g0, c.xi).defect;
  out.refined_formula_defect = refined_saari_derivative(sys, c.x, g0, c.xi).defect;
  return out;
}

/// max over samples and a of |xi^c C^b_ca p_b(xi)|; zero iff l is bi-invariant.
inline double bi_invariance_defect(const SystemModel& sys, const std::vector<AlgebraVector>& samples) {
  const auto& l = detail::require_lie(sys, "bi_invariance_defect");
  const auto& C = sys.algebra().constants;
  const int r = C.dim();
  double worst = 0.0;
  for (const auto& xi : samples) {
    require_dim(C, xi.xi, "bi_invariance_defect");
    const Vec p = l.gradient(xi.xi, sys.fd());
    for (int a = 0; a < r; ++a) {
      double s = 0.0;
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c) s += xi.xi[c] * C(b, c, a) * p[b];
      worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

struct EquivarianceSample {
  int a = 0;  // generator index of the flow exp(s E_a)
  AlgebraVector xi;
};

/// Momentum at the state (g, body velocity xi).
using MomentumMap = std::function<Vec(const SystemModel&, const Mat& g, const Vec& xi)>;

inline Vec spatial_momentum_at(const SystemModel& sys, const Mat& g, const Vec& xi) {
  return momentum(sys, {Vec(0), g, Vec(0), xi}).mu;
}

/// max |d/ds p_b(exp(s E_a), xi)|_{s=0} + C^c_ab p_c(xi)|: the FD derivative of
/// the momentum along the tangent-lifted flow of E_a against the coadjoint
/// identity.
inline double equivariance_defect(const SystemModel& sys, const std::vector<EquivarianceSample>& samples,
                                  const MomentumMap& p = spatial_momentum_at) {
  detail::require_lie(sys, "equivariance_defect");
  const auto& C = sys.algebra().constants;
  const auto& rep = sys.algebra().rep;
  const int r = C.dim();
  const double s = detail::kOrbitFdStep;
  double worst = 0.0;
  for (const auto& smp : samples) {
    const Vec Ea = Vec::Unit(r, smp.a);
    const Vec d = (p(sys, exp_matrix(s * rep.hat(Ea)), smp.xi.xi) - p(sys, exp_matrix(-s * rep.hat(Ea)), smp.xi.xi)) /
                  (2.0 * s);
    const Vec p0 = p(sys, rep.identity(), smp.xi.xi);
    for (int b = 0; b < r; ++b) {
      double expect = 0.0;
      for (int c = 0; c < r; ++c) expect -= C(c, smp.a, b) * p0[c];
      worst = std::max(worst, std::abs(d[b] - expect));
    }
  }
  return worst;
}

}  // namespace releq
