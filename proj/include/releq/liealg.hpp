#pragma once

// Lie-algebra and matrix-Lie-group numerics: structure constants, brackets,
// (co)adjoint actions, the matrix exponential and its derivative.
//
// Conventions. Structure constants are stored as C^c_ab with [E_a, E_b] =
// C^c_ab E_c. Algebra elements carry contravariant components xi^a, momenta
// carry covariant components mu_a. Ad_g xi is the coordinate vector of
// g xi^ g^{-1}; Ad*_g mu is its transpose action, <Ad*_g mu, eta> = <mu, Ad_g eta>.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "releq/errors.hpp"

namespace releq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Element of the Lie algebra in the basis {E_a}.
struct AlgebraVector {
  Vec xi;
};

/// Element of the dual algebra (momentum) in the dual basis.
struct MomentumVector {
  Vec mu;
};

class StructureConstants {
 public:
  StructureConstants() = default;

  /// Zero constants of dimension r (the abelian algebra R^r).
  explicit StructureConstants(int r) : dim_(r), c_(static_cast<std::size_t>(r * r * r), 0.0) {
    if (r <= 0) throw DimensionError("algebra dimension must be positive");
  }

  int dim() const noexcept { return dim_; }

  /// C^c_ab.
  double operator()(int c, int a, int b) const { return c_[index(c, a, b)]; }

  /// Sets C^c_ab = value and C^c_ba = -value.
  void set(int c, int a, int b, double value) {
    c_[index(c, a, b)] = value;
    c_[index(c, b, a)] = -value;
  }

  /// Raw write without the antisymmetric mirror; used by loaders that then
  /// call check_antisymmetry().
  void set_raw(int c, int a, int b, double value) { c_[index(c, a, b)] = value; }

  bool is_antisymmetric() const {
    for (int c = 0; c < dim_; ++c)
      for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b)
          if ((*this)(c, a, b) != -(*this)(c, b, a)) return false;
    return true;
  }

  bool is_abelian() const {
    for (double v : c_)
      if (v != 0.0) return false;
    return true;
  }

  std::vector<std::string> labels;

 private:
  std::size_t index(int c, int a, int b) const {
    return static_cast<std::size_t>((c * dim_ + a) * dim_ + b);
  }

  int dim_ = 0;
  std::vector<double> c_;
};

inline void require_dim(const StructureConstants& C, const Vec& v, const char* what) {
  if (v.size() != C.dim())
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(C.dim()) +
                         ", got " + std::to_string(v.size()));
}

/// Matrix of ad_theta: (ad_theta)^c_b = C^c_ab theta^a.
inline Mat ad_matrix(const StructureConstants& C, const Vec& theta) {
  require_dim(C, theta, "ad_matrix");
  const int r = C.dim();
  Mat ad = Mat::Zero(r, r);
  for (int c = 0; c < r; ++c)
    for (int b = 0; b < r; ++b) {
      double s = 0.0;
      for (int a = 0; a < r; ++a) s += C(c, a, b) * theta[a];
      ad(c, b) = s;
    }
  return ad;
}

inline AlgebraVector bracket(const StructureConstants& C, const AlgebraVector& xi,
                             const AlgebraVector& eta) {
  require_dim(C, xi.xi, "bracket");
  require_dim(C, eta.xi, "bracket");
  const int r = C.dim();
  Vec out = Vec::Zero(r);
  for (int c = 0; c < r; ++c) {
    double s = 0.0;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) s += C(c, a, b) * xi.xi[a] * eta.xi[b];
    out[c] = s;
  }
  return {out};
}

/// result_b = C^c_ab xi^a mu_c; vanishes iff xi lies in the isotropy algebra of mu.
inline MomentumVector isotropy_residual(const StructureConstants& C, const AlgebraVector& xi,
                                        const MomentumVector& mu) {
  require_dim(C, xi.xi, "isotropy_residual");
  require_dim(C, mu.mu, "isotropy_residual");
  const int r = C.dim();
  Vec out = Vec::Zero(r);
  for (int b = 0; b < r; ++b) {
    double s = 0.0;
    for (int a = 0; a < r; ++a)
      for (int c = 0; c < r; ++c) s += C(c, a, b) * xi.xi[a] * mu.mu[c];
    out[b] = s;
  }
  return {out};
}

/// Max-norm of the cyclic Jacobi sum C^e_ab C^d_ec + C^e_bc C^d_ea + C^e_ca C^d_eb.
inline double jacobi_defect(const StructureConstants& C) {
  const int r = C.dim();
  double worst = 0.0;
  for (int d = 0; d < r; ++d)
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c) {
          double s = 0.0;
          for (int e = 0; e < r; ++e)
            s += C(e, a, b) * C(d, e, c) + C(e, b, c) * C(d, e, a) + C(e, c, a) * C(d, e, b);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

/// Matrix exponential by scaling and squaring around an order-12 Taylor core.
/// The squaring count brings the 1-norm of the scaled matrix to at most 0.5.
inline Mat exp_matrix(const Mat& M) {
  if (M.rows() != M.cols()) throw DimensionError("exp_matrix: matrix is not square");
  if (!M.allFinite()) throw DomainError("exp_matrix: non-finite entry");
  const auto n = M.rows();
  if (n == 0) return M;

  const double norm = M.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Mat A = M / std::ldexp(1.0, squarings);

  constexpr int kOrder = 12;
  const Mat I = Mat::Identity(n, n);
  Mat T = I;
  for (int k = kOrder; k >= 1; --k) T = I + (A * T) / static_cast<double>(k);
  for (int s = 0; s < squarings; ++s) T = T * T;
  return T;
}

/// A faithful matrix realization of the group: generators E^_a with
/// [E^_a, E^_b] = C^c_ab E^_c.
class MatrixGroupRep {
 public:
  MatrixGroupRep() = default;

  explicit MatrixGroupRep(std::vector<Mat> generators) : generators_(std::move(generators)) {
    if (generators_.empty()) throw DimensionError("representation needs at least one generator");
    n_ = static_cast<int>(generators_.front().rows());
    for (const auto& E : generators_)
      if (E.rows() != n_ || E.cols() != n_)
        throw DimensionError("representation generators must all be square of the same size");
    Mat basis(n_ * n_, static_cast<Eigen::Index>(generators_.size()));
    for (std::size_t a = 0; a < generators_.size(); ++a)
      basis.col(static_cast<Eigen::Index>(a)) = Eigen::Map<const Vec>(generators_[a].data(), n_ * n_);
    basis_ = basis;
    qr_ = Eigen::ColPivHouseholderQR<Mat>(basis_);
    if (qr_.rank() != static_cast<Eigen::Index>(generators_.size()))
      throw ValidationError("generators", "representation generators are linearly dependent");
  }

  int size() const noexcept { return n_; }
  int dim() const noexcept { return static_cast<int>(generators_.size()); }
  const std::vector<Mat>& generators() const noexcept { return generators_; }
  Mat identity() const { return Mat::Identity(n_, n_); }

  /// xi^ = xi^a E^_a.
  Mat hat(const Vec& xi) const {
    if (xi.size() != dim()) throw DimensionError("hat: dimension mismatch");
    Mat M = Mat::Zero(n_, n_);
    for (int a = 0; a < dim(); ++a) M += xi[a] * generators_[static_cast<std::size_t>(a)];
    return M;
  }

  struct Expansion {
    Vec coords;
    double residual;  // max entry of M - coords^a E^_a, relative to max(1, |M|)
  };

  /// Least-squares coordinates of M in the generator span.
  Expansion expand(const Mat& M) const {
    if (M.rows() != n_ || M.cols() != n_) throw DimensionError("expand: matrix size mismatch");
    const Vec m = Eigen::Map<const Vec>(M.data(), n_ * n_);
    Vec coords = qr_.solve(m);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double res = (basis_ * coords - m).cwiseAbs().maxCoeff() / scale;
    return {std::move(coords), res};
  }

  /// max_{a,b} |[E^_a, E^_b] - C^c_ab E^_c|.
  double commutator_defect(const StructureConstants& C) const {
    if (C.dim() != dim()) throw DimensionError("commutator_defect: dimension mismatch");
    double worst = 0.0;
    for (int a = 0; a < dim(); ++a)
      for (int b = 0; b < dim(); ++b) {
        const auto& Ea = generators_[static_cast<std::size_t>(a)];
        const auto& Eb = generators_[static_cast<std::size_t>(b)];
        Mat D = Ea * Eb - Eb * Ea;
        for (int c = 0; c < dim(); ++c) D -= C(c, a, b) * generators_[static_cast<std::size_t>(c)];
        worst = std::max(worst, D.cwiseAbs().maxCoeff());
      }
    return worst;
  }

 private:
  int n_ = 0;
  std::vector<Mat> generators_;
  Mat basis_;
  Eigen::ColPivHouseholderQR<Mat> qr_;
};

/// Re-expansion residual above which a matrix is not treated as a group element.
inline constexpr double kMembershipTolerance = 1e-8;

/// Structure constants together with a matrix realization of the group.
struct Algebra {
  std::string name;
  StructureConstants constants;
  MatrixGroupRep rep;

  int dim() const noexcept { return constants.dim(); }
};

/// Ad_g xi: coordinates of g xi^ g^{-1}.
inline AlgebraVector adjoint(const MatrixGroupRep& rep, const Mat& g, const AlgebraVector& xi) {
  const Mat conj = g * rep.hat(xi.xi) * g.partialPivLu().inverse();
  auto [coords, res] = rep.expand(conj);
  if (!(res <= kMembershipTolerance))
    throw DomainError("adjoint: re-expansion residual " + std::to_string(res) +
                      " exceeds tolerance; matrix is not in the represented group");
  return {std::move(coords)};
}

/// Matrix of Ad_g in the generator basis (column b = Ad_g E_b).
inline Mat adjoint_matrix(const MatrixGroupRep& rep, const Mat& g) {
  const int r = rep.dim();
  const Mat ginv = g.partialPivLu().inverse();
  Mat A(r, r);
  for (int b = 0; b < r; ++b) {
    auto [coords, res] = rep.expand(g * rep.generators()[static_cast<std::size_t>(b)] * ginv);
    if (!(res <= kMembershipTolerance))
      throw DomainError("adjoint: re-expansion residual " + std::to_string(res) +
                        " exceeds tolerance; matrix is not in the represented group");
    A.col(b) = coords;
  }
  return A;
}

/// Largest generator re-expansion residual of g; small iff g normalizes the
/// represented algebra.
inline double membership_residual(const MatrixGroupRep& rep, const Mat& g) {
  const Mat ginv = g.partialPivLu().inverse();
  double worst = 0.0;
  for (const auto& E : rep.generators()) worst = std::max(worst, rep.expand(g * E * ginv).residual);
  return worst;
}

/// Ad*_g mu = (Ad_g)^T mu.
inline MomentumVector coadjoint_transport(const MatrixGroupRep& rep, const Mat& g,
                                          const MomentumVector& mu) {
  if (mu.mu.size() != rep.dim()) throw DimensionError("coadjoint_transport: dimension mismatch");
  return {adjoint_matrix(rep, g).transpose() * mu.mu};
}

/// Right-trivialized derivative of exp: sum_k (ad_theta)^k delta / (k+1)!.
/// Satisfies d/dt exp(theta + t delta) exp(theta)^{-1} |_{t=0} = (result)^.
inline AlgebraVector dexp(const StructureConstants& C, const AlgebraVector& theta,
                          const AlgebraVector& delta) {
  require_dim(C, delta.xi, "dexp");
  const Mat ad = ad_matrix(C, theta.xi);
  const double ad_norm = ad.size() ? Eigen::JacobiSVD<Mat>(ad).singularValues()[0] : 0.0;
  if (ad_norm >= 2.0 * std::numbers::pi)
    throw DomainError("dexp: |ad_theta| = " + std::to_string(ad_norm) +
                      " outside the series convergence radius 2*pi");
  Vec term = delta.xi;
  Vec sum = term;
  for (int k = 1; k < 200; ++k) {
    term = ad * term / static_cast<double>(k + 1);
    sum += term;
    if (term.norm() < 1e-15 * std::max(1.0, sum.norm())) break;
  }
  return {sum};
}

namespace algebras {

/// R^k realized as unipotent translations in (k+1)x(k+1) matrices.
inline Algebra abelian(int k) {
  std::vector<Mat> gens;
  for (int a = 0; a < k; ++a) {
    Mat E = Mat::Zero(k + 1, k + 1);
    E(a, k) = 1.0;
    gens.push_back(E);
  }
  StructureConstants C(k);
  for (int a = 0; a < k; ++a) C.labels.push_back("t" + std::to_string(a + 1));
  return {"abelian" + std::to_string(k), std::move(C), MatrixGroupRep(std::move(gens))};
}

/// so(2) ~ R realized by plane rotations.
inline Algebra so2() {
  Mat J(2, 2);
  J << 0, -1, 1, 0;
  StructureConstants C(1);
  C.labels = {"rot"};
  return {"so2", std::move(C), MatrixGroupRep({J})};
}

inline Mat so3_hat(const Vec& w) {
  Mat W(3, 3);
  W << 0, -w[2], w[1], w[2], 0, -w[0], -w[1], w[0], 0;
  return W;
}

/// so(3): C^c_ab = epsilon_abc, E^_a = hat(e_a).
inline Algebra so3() {
  StructureConstants C(3);
  C.set(2, 0, 1, 1.0);
  C.set(0, 1, 2, 1.0);
  C.set(1, 2, 0, 1.0);
  C.labels = {"e1", "e2", "e3"};
  std::vector<Mat> gens;
  for (int a = 0; a < 3; ++a) gens.push_back(so3_hat(Vec::Unit(3, a)));
  return {"so3", std::move(C), MatrixGroupRep(std::move(gens))};
}

/// se(2): basis (J, Px, Py) with [J,Px] = Py, [J,Py] = -Px, [Px,Py] = 0.
inline Algebra se2() {
  StructureConstants C(3);
  C.set(2, 0, 1, 1.0);
  C.set(1, 0, 2, -1.0);
  C.labels = {"rot", "px", "py"};
  Mat J = Mat::Zero(3, 3), Px = Mat::Zero(3, 3), Py = Mat::Zero(3, 3);
  J(0, 1) = -1;
  J(1, 0) = 1;
  Px(0, 2) = 1;
  Py(1, 2) = 1;
  return {"se2", std::move(C), MatrixGroupRep({J, Px, Py})};
}

/// Heisenberg h(3): [e1, e2] = e3, e3 central.
inline Algebra heisenberg() {
  StructureConstants C(3);
  C.set(2, 0, 1, 1.0);
  C.labels = {"p", "q", "z"};
  Mat E1 = Mat::Zero(3, 3), E2 = Mat::Zero(3, 3), E3 = Mat::Zero(3, 3);
  E1(0, 1) = 1;
  E2(1, 2) = 1;
  E3(0, 2) = 1;
  return {"heisenberg", std::move(C), MatrixGroupRep({E1, E2, E3})};
}

/// Looks up a builtin by name: so2, so3, se2, heisenberg, abelian<k>.
inline Algebra by_name(const std::string& name) {
  if (name == "so2") return so2();
  if (name == "so3") return so3();
  if (name == "se2") return se2();
  if (name == "heisenberg") return heisenberg();
  if (name.rfind("abelian", 0) == 0) {
    const std::string digits = name.substr(7);
    if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
      const int k = std::stoi(digits);
      if (k >= 1 && k <= 64) return abelian(k);
    }
  }
  throw SchemaError("unknown builtin algebra '" + name + "'");
}

}  // namespace algebras

}  // namespace releq
