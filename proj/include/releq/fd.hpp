#pragma once

// Central finite differences. Every derivative the library takes goes
// through these routines so a single FDScheme controls the accuracy.

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>

#include "releq/errors.hpp"
#include "releq/liealg.hpp"

namespace releq {

struct FDScheme {
  double step_scale = 1e-6;          // first derivatives
  double hessian_step_scale = 1e-4;  // second derivatives and Jacobians
  bool richardson = false;

  void check() const {
    auto ok = [](double s) { return s > 0.0 && s < 1e-2; };
    if (!ok(step_scale) || !ok(hessian_step_scale))
      throw SchemaError("finite-difference step scale must lie in (0, 1e-2)");
  }
};

/// Applies the RELEQ_FD_STEP environment override to the first-derivative step.
inline FDScheme with_env_override(FDScheme s) {
  if (const char* env = std::getenv("RELEQ_FD_STEP")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0') throw SchemaError(std::string("RELEQ_FD_STEP is not a number: ") + env);
    s.step_scale = v;
    s.check();
  }
  return s;
}

namespace detail {

inline double fd_value(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite value on finite-difference stencil");
  return v;
}

inline double step_for(double scale, double xi) { return scale * std::max(1.0, std::abs(xi)); }

}  // namespace detail

/// Gradient of a scalar field by central differences.
template <class F>
Vec grad_fd(const F& f, const Vec& x, const FDScheme& s = {}) {
  const auto n = x.size();
  Vec g(n);
  Vec y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = detail::step_for(s.step_scale, x[i]);
    auto central = [&](double hh) {
      y[i] = x[i] + hh;
      const double fp = detail::fd_value(f(y));
      y[i] = x[i] - hh;
      const double fm = detail::fd_value(f(y));
      y[i] = x[i];
      return (fp - fm) / (2.0 * hh);
    };
    const double d1 = central(h);
    g[i] = s.richardson ? (4.0 * central(0.5 * h) - d1) / 3.0 : d1;
  }
  return g;
}

/// Jacobian of a vector field by central differences (hessian_step_scale).
template <class F>
Mat jacobian_fd(const F& f, const Vec& x, const FDScheme& s = {}) {
  const auto n = x.size();
  Vec y = x;
  Mat J;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = detail::step_for(s.hessian_step_scale, x[i]);
    auto central = [&](double hh) {
      y[i] = x[i] + hh;
      const Vec fp = f(y);
      y[i] = x[i] - hh;
      const Vec fm = f(y);
      y[i] = x[i];
      if (!fp.allFinite() || !fm.allFinite()) throw DomainError("non-finite value on finite-difference stencil");
      return Vec((fp - fm) / (2.0 * hh));
    };
    Vec col = central(h);
    if (s.richardson) col = (4.0 * central(0.5 * h) - col) / 3.0;
    if (i == 0) J.resize(col.size(), n);
    J.col(i) = col;
  }
  return J;
}

/// Hessian by central second differences. Only i <= j is computed and then
/// mirrored, so the result is exactly symmetric.
template <class F>
Mat hess_fd(const F& f, const Vec& x, const FDScheme& s = {}) {
  const auto n = x.size();
  Mat H(n, n);
  Vec y = x;
  const double f0 = detail::fd_value(f(x));
  auto at = [&](Eigen::Index i, double hi, Eigen::Index j, double hj) {
    y[i] += hi;
    y[j] += hj;
    const double v = detail::fd_value(f(y));
    y[i] = x[i];
    y[j] = x[j];
    return v;
  };
  auto diag = [&](Eigen::Index i, double h) {
    return (at(i, h, i, 0.0) - 2.0 * f0 + at(i, -h, i, 0.0)) / (h * h);
  };
  auto mixed = [&](Eigen::Index i, double hi, Eigen::Index j, double hj) {
    return (at(i, hi, j, hj) - at(i, hi, j, -hj) - at(i, -hi, j, hj) + at(i, -hi, j, -hj)) / (4.0 * hi * hj);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = detail::step_for(s.hessian_step_scale, x[i]);
    double d = diag(i, hi);
    if (s.richardson) d = (4.0 * diag(i, 0.5 * hi) - d) / 3.0;
    H(i, i) = d;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double hj = detail::step_for(s.hessian_step_scale, x[j]);
      double m = mixed(i, hi, j, hj);
      if (s.richardson) m = (4.0 * mixed(i, 0.5 * hi, j, 0.5 * hj) - m) / 3.0;
      H(i, j) = m;
      H(j, i) = m;
    }
  }
  return H;
}

/// Exact quadratic model f(x) = c + b.x + 1/2 x^T H x.
struct QuadraticModel {
  double c = 0.0;
  Vec b;
  Mat H;

  double value(const Vec& x) const { return c + b.dot(x) + 0.5 * x.dot(H * x); }
  Vec gradient(const Vec& x) const { return b + H * x; }
  bool homogeneous() const { return c == 0.0 && b.cwiseAbs().maxCoeff() == 0.0; }
};

/// Recovers f as a quadratic from unit-step samples around the origin and
/// checks the fit at a few other points. Returns nothing when f is not
/// quadratic (or not defined at the probes).
template <class F>
std::optional<QuadraticModel> detect_quadratic(const F& f, int dim) {
  try {
    QuadraticModel q;
    q.c = f(Vec::Zero(dim));
    q.b.resize(dim);
    q.H.resize(dim, dim);
    auto e = [dim](int i) { return Vec::Unit(dim, i); };
    for (int i = 0; i < dim; ++i) {
      const double fp = f(e(i)), fm = f(-e(i));
      q.b[i] = 0.5 * (fp - fm);
      q.H(i, i) = fp + fm - 2.0 * q.c;
    }
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) {
        const double v = 0.25 * (f(e(i) + e(j)) - f(e(i) - e(j)) - f(-e(i) + e(j)) + f(-e(i) - e(j)));
        q.H(i, j) = v;
        q.H(j, i) = v;
      }
    const double probes[][3] = {{0.3, -0.7, 1.1}, {-1.7, 0.4, 0.9}, {2.3, 1.9, -0.6}, {0.05, -2.9, -1.3}};
    for (const auto& p : probes) {
      Vec x(dim);
      for (int i = 0; i < dim; ++i) x[i] = p[i % 3] * (1.0 + 0.37 * (i / 3));
      const double fx = f(x);
      if (std::abs(fx - q.value(x)) > 1e-12 * std::max(1.0, std::abs(fx))) return std::nullopt;
    }
    // snap rounding noise from decimal coefficients
    if (std::abs(q.c) < 1e-15) q.c = 0.0;
    for (int i = 0; i < dim; ++i)
      if (std::abs(q.b[i]) < 1e-15) q.b[i] = 0.0;
    return q;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace releq
