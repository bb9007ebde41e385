#pragma once

// Invariant quantities on system models: momentum, energy, Routhians,
// locked Lagrangian and inertia, amended and augmented potentials, Hessian
// blocks and the curvature of a connection.

#include <string>
#include <vector>

#include "releq/model.hpp"
#include "releq/system_document.hpp"

namespace releq {

namespace detail {

inline const SimpleMechanicalSystem& require_simple(const SystemModel& sys, const char* op) {
  if (auto* s = sys.simple()) return *s;
  throw SchemaError(std::string(op) + " requires a simple_mechanical system");
}

inline const LieGroupSystem& require_lie(const SystemModel& sys, const char* op) {
  if (auto* l = sys.lie_group()) return *l;
  throw SchemaError(std::string(op) + " requires a lie_group system");
}

inline bool is_identity(const Mat& g) { return g.size() == 0 || g.isIdentity(0.0); }

inline Mat inverse(const Mat& g) { return g.partialPivLu().inverse(); }

/// Ad_{g^-1} as a matrix; identity when g is empty.
inline Mat ad_inverse(const SystemModel& sys, const Mat& g) {
  if (g.size() == 0) return Mat::Identity(sys.dim(), sys.dim());
  return adjoint_matrix(sys.algebra().rep, inverse(g));
}

/// dl/dw at (x, v, w).
inline Vec body_momentum(const SystemModel& sys, const Vec& x, const Vec& v, const Vec& w) {
  if (auto* l = sys.lie_group()) return l->gradient(w, sys.fd());
  if (auto* s = sys.simple()) return s->locked(x) * w;
  const auto& t = *sys.trivialized();
  return grad_fd([&](const Vec& z) { return t.lagrangian(x, v, z); }, w, sys.fd());
}

/// d^2 L / dw dw at (x, v, w).
inline Mat momentum_block(const SystemModel& sys, const Vec& x, const Vec& v, const Vec& w) {
  if (auto* l = sys.lie_group()) return l->hessian(w, sys.fd());
  if (auto* s = sys.simple()) return s->locked(x);
  const auto& t = *sys.trivialized();
  return hess_fd([&](const Vec& z) { return t.lagrangian(x, v, z); }, w, sys.fd());
}

inline void check_state(const SystemModel& sys, const TrivializedState& st) {
  if (st.x.size() != sys.base_dim() || st.v.size() != sys.base_dim() || st.w.size() != sys.dim())
    throw DimensionError("state dimensions do not match the system");
  if (st.g.size() != 0 && membership_residual(sys.algebra().rep, st.g) > kMembershipTolerance)
    throw DomainError("state group element is not in the represented group");
}

}  // namespace detail

/// Conserved momentum. At g = e this is dL/dw; otherwise the spatial value
/// Ad*_{g^-1} of the body momentum.
inline MomentumVector momentum(const SystemModel& sys, const TrivializedState& st) {
  detail::check_state(sys, st);
  const Vec body = detail::body_momentum(sys, st.x, st.v, st.w);
  if (detail::is_identity(st.g)) return {body};
  return coadjoint_transport(sys.algebra().rep, detail::inverse(st.g), {body});
}

/// E = v.dL/dv + w.dL/dw - L.
inline double energy(const SystemModel& sys, const TrivializedState& st) {
  detail::check_state(sys, st);
  if (auto* l = sys.lie_group()) return st.w.dot(l->gradient(st.w, sys.fd())) - l->value(st.w);
  if (auto* s = sys.simple())
    return 0.5 * st.v.dot(s->base_metric(st.x) * st.v) + 0.5 * st.w.dot(s->locked(st.x) * st.w) +
           s->potential(st.x);
  const auto& t = *sys.trivialized();
  const int n = t.n;
  Vec z(n + t.dim());
  z << st.v, st.w;
  const auto L = [&](const Vec& q) { return t.lagrangian(st.x, q.head(n), q.tail(t.dim())); };
  return z.dot(grad_fd(L, z, sys.fd())) - L(z);
}

/// R = L - w^a p_a (body pairing).
inline double routhian(const SystemModel& sys, const TrivializedState& st) {
  detail::check_state(sys, st);
  const Vec p = detail::body_momentum(sys, st.x, st.v, st.w);
  return sys.lagrangian(st.x, st.v, st.w) - st.w.dot(p);
}

/// V^mu = V + 1/2 mu^T g_ab^{-1} mu.
inline double amended_potential(const SystemModel& sys, const Vec& x, const MomentumVector& mu) {
  const auto& s = detail::require_simple(sys, "amended_potential");
  require_dim(sys.algebra().constants, mu.mu, "amended_potential");
  const Mat G = s.locked(x);
  const auto lu = G.partialPivLu();
  if (!(detail::condition_number(G) <= kConditionLimit)) throw DomainError("momentum block singular");
  return s.potential(x) + 0.5 * mu.mu.dot(lu.solve(mu.mu));
}

/// V_xi = V - 1/2 xi^T g_ab xi.
inline double augmented_potential(const SystemModel& sys, const Vec& x, const AlgebraVector& xi) {
  const auto& s = detail::require_simple(sys, "augmented_potential");
  require_dim(sys.algebra().constants, xi.xi, "augmented_potential");
  return s.potential(x) - 0.5 * xi.xi.dot(s.locked(x) * xi.xi);
}

/// R^mu = 1/2 g_ij v^i v^j - V^mu.
inline double restricted_routhian(const SystemModel& sys, const Vec& x, const Vec& v, const MomentumVector& mu) {
  const auto& s = detail::require_simple(sys, "restricted_routhian");
  return 0.5 * v.dot(s.base_metric(x) * v) - amended_potential(sys, x, mu);
}

/// L evaluated on the fundamental field of xi at (x, g): l(x, 0, Ad_{g^-1} xi).
inline double locked_lagrangian(const SystemModel& sys, const Vec& x, const Mat& g, const AlgebraVector& xi) {
  require_dim(sys.algebra().constants, xi.xi, "locked_lagrangian");
  const Vec w = detail::is_identity(g) ? xi.xi : Vec(detail::ad_inverse(sys, g) * xi.xi);
  return sys.lagrangian(x, Vec::Zero(sys.base_dim()), w);
}

/// Locked inertia at (x, g): Ad_{g^-1}^T G Ad_{g^-1}, where G is the momentum
/// block evaluated at the locked body velocity Ad_{g^-1} xi (velocity-free for
/// simple mechanical and quadratic systems).
inline Mat locked_inertia(const SystemModel& sys, const Vec& x, const Mat& g, const AlgebraVector& xi) {
  require_dim(sys.algebra().constants, xi.xi, "locked_inertia");
  const Mat Ai = detail::ad_inverse(sys, g);
  const Vec w = Ai * xi.xi;
  const Mat G = detail::momentum_block(sys, x, Vec::Zero(sys.base_dim()), w);
  Mat K = Ai.transpose() * G * Ai;
  return 0.5 * (K + K.transpose());
}

struct HessianBlocks {
  Mat g_ij;
  Mat g_ia;
  Mat g_ab;
};

/// Second derivatives of L in the fiber variables (v, w).
inline HessianBlocks hessian_blocks(const SystemModel& sys, const TrivializedState& st) {
  detail::check_state(sys, st);
  const int n = sys.base_dim(), r = sys.dim();
  if (auto* l = sys.lie_group()) return {Mat(0, 0), Mat(0, r), l->hessian(st.w, sys.fd())};
  if (auto* s = sys.simple()) return {s->base_metric(st.x), Mat::Zero(n, r), s->locked(st.x)};
  const auto& t = *sys.trivialized();
  Vec z(n + r);
  z << st.v, st.w;
  const Mat H = hess_fd([&](const Vec& q) { return t.lagrangian(st.x, q.head(n), q.tail(r)); }, z, sys.fd());
  return {H.topLeftCorner(n, n), H.topRightCorner(n, r), H.bottomRightCorner(r, r)};
}

/// g_ij - g_ia g^{ab} g_jb.
inline Mat reduced_hessian(const HessianBlocks& b) {
  if (!(detail::condition_number(b.g_ab) <= kConditionLimit)) throw DomainError("momentum block singular");
  const Mat red = b.g_ij - b.g_ia * b.g_ab.partialPivLu().solve(b.g_ia.transpose());
  return 0.5 * (red + red.transpose());
}

/// Condition number of the reduced Hessian, 1 when the base is empty;
/// capped at max double so reports stay finite.
inline double reduced_hessian_condition(const HessianBlocks& b) {
  if (b.g_ij.size() == 0) return 1.0;
  const double c = detail::condition_number(reduced_hessian(b));
  return std::isfinite(c) ? c : std::numeric_limits<double>::max();
}

/// R^a_ij = d_i A^a_j - d_j A^a_i + C^a_bc A^b_i A^c_j; result[a](i, j).
inline std::vector<Mat> curvature_from_connection(const SystemModel& sys, const Vec& x) {
  const auto& s = detail::require_simple(sys, "curvature_from_connection");
  const int n = s.n, r = s.dim();
  if (!s.has_connection()) return std::vector<Mat>(static_cast<std::size_t>(r), Mat::Zero(n, n));
  const auto& C = sys.algebra().constants;
  const Mat A = s.connection(x);
  // dA[a](j, i) = d_i A^a_j
  std::vector<Mat> dA(static_cast<std::size_t>(r), Mat(n, n));
  for (int a = 0; a < r; ++a)
    for (int j = 0; j < n; ++j) {
      const Vec g = grad_fd([&](const Vec& y) { return s.A[static_cast<std::size_t>(a * n + j)](y); }, x, sys.fd());
      dA[static_cast<std::size_t>(a)].row(j) = g.transpose();
    }
  std::vector<Mat> R(static_cast<std::size_t>(r), Mat::Zero(n, n));
  for (int a = 0; a < r; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double v = dA[static_cast<std::size_t>(a)](j, i) - dA[static_cast<std::size_t>(a)](i, j);
        for (int b = 0; b < r; ++b)
          for (int c = 0; c < r; ++c) v += C(a, b, c) * A(b, i) * A(c, j);
        R[static_cast<std::size_t>(a)](i, j) = v;
        R[static_cast<std::size_t>(a)](j, i) = -v;
      }
  return R;
}

}  // namespace releq
