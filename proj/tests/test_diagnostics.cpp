#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace releq;
using testing_support::from_json;
using testing_support::max_abs;
using testing_support::random_vec;
using testing_support::shipped;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

REReport report_for(const Vec& x, const Vec& xi) {
  REReport r;
  r.candidate = {x, {xi}, Mat()};
  return r;
}

const char* kAbelian = R"j({"kind": "lie_group", "algebra": "abelian2", "l": "0.5*(xi1^2 + 3*xi2^2)"})j";

std::vector<AlgebraVector> unit_samples(int r, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<AlgebraVector> out;
  for (int k = 0; k < count; ++k) {
    Vec v(r);
    for (int a = 0; a < r; ++a) v[a] = nd(rng);
    out.push_back({v.normalized()});
  }
  return out;
}

}  // namespace

TEST(Saari, RigidBodyAboutE3) {
  const auto rb = shipped("rigidbody.json");
  const auto s = saari_scan(rb, report_for(Vec(0), v3(0, 0, 1)));
  EXPECT_LE(s.refined_variation, 1e-9);
  EXPECT_GE(s.naive_variation, 0.9);
  EXPECT_NEAR(s.period, 2 * std::numbers::pi, 1e-15);
  EXPECT_EQ(s.samples, 200);
}

TEST(Saari, ConjugatedInertiaOracle) {
  // Along exp(t e3), g_11(t) = cos^2 t + 2 sin^2 t, so the largest change
  // over a period is exactly 1.
  const auto rb = shipped("rigidbody.json");
  const auto s = saari_scan(rb, report_for(Vec(0), v3(0, 0, 1)), 0.0, 400);
  EXPECT_NEAR(s.naive_variation, 1.0, 1e-12);
}

TEST(Saari, AbelianAndIsotropicCasesAreConstant) {
  const auto k = shipped("kepler.json");
  auto s = saari_scan(k, report_for(v1(1), v1(1)));
  EXPECT_LE(s.naive_variation, 1e-12);
  EXPECT_LE(s.refined_variation, 1e-12);
  const auto iso = shipped("isotropic_body.json");
  s = saari_scan(iso, report_for(Vec(0), v3(0.3, -0.2, 0.9)));
  EXPECT_LE(s.naive_variation, 1e-12);
  EXPECT_LE(s.refined_variation, 1e-12);
}

TEST(Saari, FormulasMatchOrbitDifferences) {
  std::mt19937_64 rng(70);
  const auto two = from_json(R"j({"kind": "simple_mechanical", "algebra": "so3", "n": 1, "g_ij": [["1"]],
    "g_ab": [["1 + x1^2", "0.2", "0"], ["0.2", "2", "0.1*x1"], ["0", "0.1*x1", "3"]], "V": "x1^2"})j");
  const SystemModel systems[] = {shipped("rigidbody.json"), shipped("heisenberg.json"), shipped("isotropic_body.json"),
                                 shipped("kepler.json"), shipped("spherical_pendulum.json"), two};
  for (const auto& s : systems) {
    const auto& rep = s.algebra().rep;
    for (int k = 0; k < 10; ++k) {
      const Vec x = random_vec(s.base_dim(), rng, 0.5, 1.5);
      const Mat g = exp_matrix(rep.hat(random_vec(s.dim(), rng)));
      const AlgebraVector xi{random_vec(s.dim(), rng)};
      EXPECT_LE(naive_saari_derivative(s, x, g, xi).defect, 1e-6) << s.name();
      EXPECT_LE(refined_saari_derivative(s, x, g, xi).defect, 1e-6) << s.name();
    }
  }
}

TEST(Saari, RefinedDerivativeVanishesAtRelativeEquilibria) {
  const auto rb = shipped("rigidbody.json");
  for (const auto& r : scan_seeds(rb, ScanSpec{ScanMode::free, Vec(), Vec(), 100, 7, 1e-10}).reports)
    EXPECT_LE(max_abs(refined_saari_derivative(rb, Vec(), Mat(), r.candidate.xi).analytic), 1e-9);
  const auto k = shipped("kepler.json");
  EXPECT_LE(max_abs(refined_saari_derivative(k, v1(1), Mat(), {v1(1)}).analytic), 1e-9);
}

TEST(Saari, CentralVelocityGivesZeroNaiveDerivative) {
  const auto h = shipped("heisenberg.json");
  EXPECT_EQ(max_abs(naive_saari_derivative(h, Vec(), Mat(), {v3(0, 0, 2.5)}).analytic), 0.0);
  const auto a = from_json(kAbelian);
  Vec xi(2);
  xi << 0.4, -1.3;
  EXPECT_EQ(max_abs(naive_saari_derivative(a, Vec(), Mat(), {xi}).analytic), 0.0);
}

TEST(BiInvariance, Cases) {
  const auto samples = unit_samples(3, 50, 71);
  const auto iso = shipped("isotropic_body.json");
  EXPECT_LE(bi_invariance_defect(iso, samples), 1e-12);
  for (const auto& xi : samples) EXPECT_LE(ep_stationarity_residual(iso, xi).norm(), 1e-10);
  EXPECT_GT(bi_invariance_defect(shipped("rigidbody.json"), samples), 0.5);
  Vec d(3);
  d << 1, 1, 0;
  EXPECT_NEAR(bi_invariance_defect(shipped("rigidbody.json"), {{d / std::sqrt(2.0)}}), 0.5, 1e-9);
  EXPECT_EQ(bi_invariance_defect(from_json(kAbelian), unit_samples(2, 10, 72)), 0.0);
}

TEST(Equivariance, RigidBodyAndAbelian) {
  std::mt19937_64 rng(73);
  std::vector<EquivarianceSample> samples;
  for (int k = 0; k < 20; ++k) samples.push_back({k % 3, {random_vec(3, rng, -2, 2)}});
  const auto rb = shipped("rigidbody.json");
  EXPECT_LE(equivariance_defect(rb, samples), 1e-6);
  EXPECT_LE(equivariance_defect(shipped("heisenberg.json"), samples), 1e-6);
  std::vector<EquivarianceSample> ab;
  for (int k = 0; k < 10; ++k) ab.push_back({k % 2, {random_vec(2, rng)}});
  EXPECT_LE(equivariance_defect(from_json(kAbelian), ab), 1e-12);
}

TEST(Equivariance, BrokenTransportIsDetected) {
  std::mt19937_64 rng(74);
  std::vector<EquivarianceSample> samples;
  for (int k = 0; k < 20; ++k) samples.push_back({k % 3, {random_vec(3, rng, -2, 2)}});
  const auto rb = shipped("rigidbody.json");
  const MomentumMap no_transport = [](const SystemModel& s, const Mat&, const Vec& xi) {
    return s.lie_group()->gradient(xi, s.fd());
  };
  EXPECT_GT(equivariance_defect(rb, samples, no_transport), 1e-2);
}

TEST(Equivariance, RequiresLieGroupSystem) {
  EXPECT_THROW(equivariance_defect(shipped("kepler.json"), {}), SchemaError);
}
