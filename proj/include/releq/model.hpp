#pragma once

// The three system variants and the state type they are evaluated on.
//
//  LieGroupSystem          reduced Lagrangian l(xi) on the algebra
//  SimpleMechanicalSystem  L = 1/2 g_ij v^i v^j + 1/2 g_ab w^a w^b - V(x), g_ia = 0
//  TrivializedSystem       general invariant l(x, v, w) in a product chart
//
// Group velocities are stored in body form w = Ad_{g^-1}(spatial).

#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "releq/expression.hpp"
#include "releq/fd.hpp"
#include "releq/liealg.hpp"

namespace releq {

enum class SystemKind { lie_group, simple_mechanical, trivialized };

inline const char* kind_name(SystemKind k) {
  switch (k) {
    case SystemKind::lie_group: return "lie_group";
    case SystemKind::simple_mechanical: return "simple_mechanical";
    case SystemKind::trivialized: return "trivialized";
  }
  return "?";
}

/// Axis-aligned box on the base coordinates.
struct Box {
  Vec lo, hi;

  bool contains(const Vec& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    return true;
  }
};

/// Parsed source plus its compiled form.
struct ScalarField {
  Expression source;
  CompiledExpression code;

  double operator()(std::span<const double> vars) const { return code(vars); }
  double operator()(const Vec& vars) const { return code(std::span<const double>(vars.data(), vars.size())); }
};

namespace detail {

inline void check_domain(const std::optional<Box>& box, const Vec& x) {
  if (box && !box->contains(x)) {
    std::string s = "point (";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", x[i]);
      s += buf;
    }
    throw DomainError(s + ") outside the declared domain");
  }
}

inline Mat eval_matrix(const std::vector<ScalarField>& f, int rows, int cols, const Vec& x) {
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = f[static_cast<std::size_t>(i * cols + j)](x);
  return M;
}

}  // namespace detail

struct LieGroupSystem {
  Algebra algebra;
  ScalarField l;  // variables xi1..xir
  std::optional<QuadraticModel> quadratic;

  int dim() const { return algebra.dim(); }
  double value(const Vec& xi) const { return quadratic ? quadratic->value(xi) : l(xi); }
  bool homogeneous_quadratic() const { return quadratic && quadratic->homogeneous(); }

  /// dl/dxi; exact for quadratic l.
  Vec gradient(const Vec& xi, const FDScheme& fd) const {
    if (quadratic) return quadratic->gradient(xi);
    return grad_fd([this](const Vec& z) { return l(z); }, xi, fd);
  }

  /// gbar_ab = d^2 l / dxi^a dxi^b.
  Mat hessian(const Vec& xi, const FDScheme& fd) const {
    if (quadratic) return quadratic->H;
    return hess_fd([this](const Vec& z) { return l(z); }, xi, fd);
  }
};

struct SimpleMechanicalSystem {
  Algebra algebra;
  int n = 0;
  std::vector<ScalarField> g_ij;  // n*n, row major, variables x1..xn
  std::vector<ScalarField> g_ab;  // r*r
  std::vector<ScalarField> A;     // r*n or empty
  ScalarField V;
  std::optional<Box> domain;

  int dim() const { return algebra.dim(); }
  bool has_connection() const { return !A.empty(); }
  void check_domain(const Vec& x) const { detail::check_domain(domain, x); }

  Mat base_metric(const Vec& x) const {
    check_domain(x);
    Mat M = detail::eval_matrix(g_ij, n, n, x);
    return 0.5 * (M + M.transpose());
  }
  Mat locked(const Vec& x) const {
    check_domain(x);
    Mat M = detail::eval_matrix(g_ab, dim(), dim(), x);
    return 0.5 * (M + M.transpose());
  }
  Mat connection(const Vec& x) const {
    check_domain(x);
    if (A.empty()) return Mat::Zero(dim(), n);
    return detail::eval_matrix(A, dim(), n, x);
  }
  double potential(const Vec& x) const {
    check_domain(x);
    return V(x);
  }
  double lagrangian(const Vec& x, const Vec& v, const Vec& w) const {
    return 0.5 * v.dot(base_metric(x) * v) + 0.5 * w.dot(locked(x) * w) - potential(x);
  }
};

struct TrivializedSystem {
  Algebra algebra;
  int n = 0;
  ScalarField lagrangian_field;  // variables x1..xn, v1..vn, w1..wr
  std::optional<Box> domain;

  int dim() const { return algebra.dim(); }
  void check_domain(const Vec& x) const { detail::check_domain(domain, x); }

  double lagrangian(const Vec& x, const Vec& v, const Vec& w) const {
    check_domain(x);
    Vec z(2 * n + dim());
    z << x, v, w;
    return lagrangian_field(z);
  }
};

class SystemModel {
 public:
  using Variant = std::variant<LieGroupSystem, SimpleMechanicalSystem, TrivializedSystem>;

  SystemModel(std::string name, Variant data, FDScheme fd, std::map<std::string, double> parameters = {})
      : name_(std::move(name)), data_(std::move(data)), fd_(fd), parameters_(std::move(parameters)) {}

  const std::string& name() const noexcept { return name_; }
  const FDScheme& fd() const noexcept { return fd_; }
  const std::map<std::string, double>& parameters() const noexcept { return parameters_; }
  const Variant& data() const noexcept { return data_; }

  SystemKind kind() const { return static_cast<SystemKind>(data_.index()); }

  const Algebra& algebra() const {
    return std::visit([](const auto& s) -> const Algebra& { return s.algebra; }, data_);
  }
  int dim() const { return algebra().dim(); }

  /// Base dimension n (0 for lie_group systems).
  int base_dim() const {
    if (auto* s = simple()) return s->n;
    if (auto* t = trivialized()) return t->n;
    return 0;
  }

  const std::optional<Box>* domain() const {
    if (auto* s = simple()) return &s->domain;
    if (auto* t = trivialized()) return &t->domain;
    return nullptr;
  }

  const LieGroupSystem* lie_group() const { return std::get_if<LieGroupSystem>(&data_); }
  const SimpleMechanicalSystem* simple() const { return std::get_if<SimpleMechanicalSystem>(&data_); }
  const TrivializedSystem* trivialized() const { return std::get_if<TrivializedSystem>(&data_); }

  /// L(x, v, w) at g = e in the product chart.
  double lagrangian(const Vec& x, const Vec& v, const Vec& w) const {
    if (auto* l = lie_group()) return l->value(w);
    if (auto* s = simple()) return s->lagrangian(x, v, w);
    return trivialized()->lagrangian(x, v, w);
  }

 private:
  std::string name_;
  Variant data_;
  FDScheme fd_;
  std::map<std::string, double> parameters_;
};

/// A point (x, g, v, w) of TM in the product chart.
struct TrivializedState {
  Vec x;
  Mat g;  // empty means identity
  Vec v;
  Vec w;  // body algebra velocity
};

inline TrivializedState make_state(const SystemModel& sys, Vec x, Vec v, Vec w) {
  if (x.size() != sys.base_dim() || v.size() != sys.base_dim())
    throw DimensionError("state base dimension mismatch");
  if (w.size() != sys.dim()) throw DimensionError("state algebra dimension mismatch");
  return {std::move(x), Mat(), std::move(v), std::move(w)};
}

}  // namespace releq
