#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace releq;
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

}  // namespace

TEST(EpIntegrate, ConservationOnTumblingBody) {
  const auto rb = shipped("rigidbody.json");
  const auto body = ep_integrate(rb, {v3(1, 0.01, 0)}, 10.0, 1e-3);
  ASSERT_EQ(body.times.size(), 10001u);
  EXPECT_DOUBLE_EQ(body.times.back(), 10.0);
  const auto group = reconstruct(rb.algebra().rep, body);
  const auto mu = spatial_momentum(rb, body, group);
  const double e0 = rb.lie_group()->value(body.xi[0]);
  const double c0 = body.p[0].norm();
  double de = 0, dm = 0, dc = 0;
  for (std::size_t k = 0; k < body.times.size(); ++k) {
    de = std::max(de, std::abs(rb.lie_group()->value(body.xi[k]) - e0));
    dm = std::max(dm, (mu[k].mu - mu[0].mu).norm());
    dc = std::max(dc, std::abs(body.p[k].norm() - c0));
  }
  EXPECT_LE(de, 1e-9);
  EXPECT_LE(dm, 1e-8);
  EXPECT_LE(dc, 1e-9);
}

TEST(EpIntegrate, MatchesReferenceSolution) {
  // Halving the step moves the endpoint by the RK4 error only.
  const auto rb = shipped("rigidbody.json");
  const Vec a = ep_integrate(rb, {v3(1, 0.5, 0.2)}, 2.0, 1e-2).xi.back();
  const Vec b = ep_integrate(rb, {v3(1, 0.5, 0.2)}, 2.0, 5e-3).xi.back();
  EXPECT_LT((a - b).norm(), 1e-7);
}

TEST(EpIntegrate, FixedPointStaysPut) {
  for (const char* f : {"rigidbody.json", "heisenberg.json"}) {
    const auto s = shipped(f);
    const Vec xi0 = Vec::Unit(s.dim(), s.dim() - 1);
    ASSERT_LE(ep_stationarity_residual(s, {xi0}).norm(), 1e-10);
    const auto tr = ep_integrate(s, {xi0}, 10.0, 1e-3);
    double worst = 0;
    for (const auto& x : tr.xi) worst = std::max(worst, (x - xi0).norm());
    EXPECT_LE(worst, 1e-9) << f;
  }
}

TEST(EpIntegrate, Errors) {
  EXPECT_THROW(ep_integrate(shipped("kepler.json"), {v1(1)}, 1.0, 0.1), SchemaError);
  EXPECT_THROW(ep_integrate(shipped("rigidbody.json"), {v3(1, 0, 0)}, -1.0, 0.1), IntegrationError);
  // d2l/dxi2^2 = 2 - 0.6 xi2^2 vanishes at the start
  const auto soft = testing_support::from_json(
      R"j({"kind": "lie_group", "algebra": "so3", "l": "0.5*(xi1^2 + 2*xi2^2 + 3*xi3^2) - 0.05*xi2^4"})j");
  EXPECT_THROW(ep_integrate(soft, {v3(1, std::sqrt(10.0 / 3.0), 1)}, 1.0, 1e-2), IntegrationError);
  // a tumbling body at |xi| = 1.5 leaves a bound of 1
  EXPECT_THROW(ep_integrate(shipped("rigidbody.json"), {v3(1, 1, 0.5)}, 1.0, 1e-2, 1.0), IntegrationError);
}

TEST(Reconstruct, ConstantVelocityIsExact) {
  const auto rb = shipped("rigidbody.json");
  const auto& rep = rb.algebra().rep;
  const Vec xi = v3(0, 0, 1);
  const auto body = ep_integrate(rb, {xi}, 3.0, 1e-2);
  const auto group = reconstruct(rep, body);
  for (std::size_t k = 0; k < body.times.size(); ++k)
    EXPECT_LT(max_abs(Mat(group.g[k] - exp_matrix(body.times[k] * rep.hat(xi)))), 1e-12);
}

TEST(Reconstruct, StartsAtGivenElement) {
  const auto rb = shipped("rigidbody.json");
  const auto& rep = rb.algebra().rep;
  const Mat g0 = exp_matrix(rep.hat(v3(0.2, 0.1, -0.3)));
  const auto group = reconstruct(rep, ep_integrate(rb, {v3(0, 1, 0)}, 1.0, 1e-2), g0);
  EXPECT_EQ(max_abs(Mat(group.g[0] - g0)), 0.0);
  EXPECT_LT(max_abs(Mat(group.g.back() - g0 * exp_matrix(rep.hat(v3(0, 1, 0))))), 1e-12);
}

TEST(DiscreteOracle, FreeParticleIsExact) {
  auto L = [](const Vec& q, const Vec& qd) { return 0.5 * qd.squaredNorm() + 0.0 * q[0]; };
  std::vector<Vec> q;
  for (int k = 0; k < 20; ++k) q.push_back(v3(1, -2, 0.5) + 0.5 * k * v3(0.3, 1, -2));
  OracleOptions opt;
  opt.step_fraction = 1e-2;
  EXPECT_LE(discrete_el_residual(L, q, 0.5, opt).max_norm, 1e-12);
}

TEST(DiscreteOracle, HarmonicOscillatorConvergesAtSecondOrder) {
  auto L = [](const Vec& q, const Vec& qd) { return 0.5 * qd.squaredNorm() - 0.5 * q.squaredNorm(); };
  auto sample = [](double h) {
    std::vector<double> t;
    std::vector<Vec> q;
    for (int k = 0; k <= static_cast<int>(std::lround(1.0 / h)); ++k) {
      t.push_back(k * h);
      q.push_back(v1(std::cos(k * h)));
    }
    return std::make_pair(t, q);
  };
  const auto [t1, q1] = sample(1e-2);
  const auto [t2, q2] = sample(5e-3);
  const double a = discrete_el_residual(L, t1, q1).max_norm, b = discrete_el_residual(L, t2, q2).max_norm;
  EXPECT_NEAR(std::log2(a / b), 2.0, 0.2);
  // a wrong trajectory does not converge
  std::vector<Vec> bad;
  for (const auto& x : q1) bad.push_back(1.05 * x + v1(0.01));
  EXPECT_GT(discrete_el_residual(L, t1, bad).max_norm, 1e-2);
}

TEST(DiscreteOracle, RejectsNonUniformSpacing) {
  auto L = [](const Vec&, const Vec& qd) { return 0.5 * qd.squaredNorm(); };
  EXPECT_THROW(discrete_el_residual(L, {0.0, 0.1, 0.25}, {v1(0), v1(0), v1(0)}), DomainError);
  EXPECT_THROW(discrete_el_residual(L, {v1(0), v1(0)}, 0.1), DimensionError);
}

TEST(ChartDistortion, InverseAndTangent) {
  ChartDistortion d;
  std::mt19937_64 rng(60);
  for (int k = 0; k < 20; ++k) {
    const Vec u = random_vec(3, rng, -3, 3), du = random_vec(3, rng);
    EXPECT_LT(max_abs(Vec(d.inverse(d.map(u)) - u)), 1e-13);
    const double s = 1e-6;
    const Vec fd = (d.map(u + s * du) - d.map(u - s * du)) / (2 * s);
    EXPECT_LT(max_abs(Vec(fd - d.tangent(u, du))), 1e-8);
  }
}

TEST(ChartLagrangian, AgreesWithBodyVelocityAtOrigin) {
  const auto rb = shipped("rigidbody.json");
  const Vec w = v3(0.3, -0.4, 1.2);
  EXPECT_NEAR(chart_lagrangian(rb, Vec(0), Vec::Zero(3), Vec(0), w), rb.lagrangian(Vec(0), Vec(0), w), 1e-15);
}

TEST(Verify, TrueEquilibriaPass) {
  struct Case {
    const char* file;
    Vec x, xi;
  } cases[] = {{"rigidbody.json", Vec(0), v3(0, 0, 1)},
               {"rigidbody.json", Vec(0), v3(-2, 0, 0)},
               {"heisenberg.json", Vec(0), v3(0, 0, 1)},
               {"kepler.json", v1(1), v1(1)},
               {"kepler.json", v1(4), v1(0.125)},
               {"kepler_trivialized.json", v1(1), v1(1)},
               {"spherical_pendulum.json", v1(std::acos(0.5)), v1(std::sqrt(2.0))}};
  for (const auto& c : cases) {
    const auto s = shipped(c.file);
    const auto v = verify_relative_equilibrium(s, report_for(c.x, c.xi));
    EXPECT_TRUE(v.passed) << c.file << ": " << v.message;
    if (v.order) {
      EXPECT_GE(*v.order, 1.8) << c.file;
      EXPECT_LE(*v.order, 2.2) << c.file;
    }
    if (s.lie_group()) {
      ASSERT_TRUE(v.ep_constancy.has_value());
      EXPECT_LE(*v.ep_constancy, 1e-9);
    }
  }
}

TEST(Verify, CorruptedCandidatesFail) {
  const auto k = shipped("kepler.json");
  auto v = verify_relative_equilibrium(k, report_for(v1(1), v1(1.05)));
  EXPECT_FALSE(v.passed);
  EXPECT_GT(v.coarse.max_norm, 1e-2);
  const auto p = shipped("spherical_pendulum.json");
  v = verify_relative_equilibrium(p, report_for(v1(std::acos(0.5)), v1(1.05 * std::sqrt(2.0))));
  EXPECT_FALSE(v.passed);
  EXPECT_GT(v.coarse.max_norm, 1e-2);
  const auto rb = shipped("rigidbody.json");
  v = verify_relative_equilibrium(rb, report_for(Vec(0), v3(0, std::sin(0.05), std::cos(0.05))));
  EXPECT_FALSE(v.passed);
  EXPECT_GT(v.coarse.max_norm, 1e-2);
  ASSERT_TRUE(v.ep_constancy.has_value());
  EXPECT_GT(*v.ep_constancy, 1e-9);
}

TEST(Verify, CartesianKeplerCircularOrbit) {
  // In Cartesian coordinates the circular orbit is curved, so the residual
  // is nonzero and converges at second order; off the orbit it fails.
  auto L = [](const Vec& q, const Vec& qd) { return 0.5 * qd.squaredNorm() + 1.0 / q.norm(); };
  auto orbit = [](double h, double speed) {
    std::vector<Vec> q;
    for (int k = 0; k <= static_cast<int>(std::lround(1.0 / h)); ++k) {
      Vec x(2);
      x << std::cos(speed * k * h), std::sin(speed * k * h);
      q.push_back(x);
    }
    return q;
  };
  const double a = discrete_el_residual(L, orbit(1e-2, 1.0), 1e-2).max_norm;
  const double b = discrete_el_residual(L, orbit(5e-3, 1.0), 5e-3).max_norm;
  EXPECT_NEAR(std::log2(a / b), 2.0, 0.2);
  EXPECT_GT(discrete_el_residual(L, orbit(1e-2, 1.05), 1e-2).max_norm, 1e-2);
}
