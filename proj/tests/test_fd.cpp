#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "support.hpp"

using namespace releq;
using testing_support::max_abs;
using testing_support::random_vec;

namespace {

double rb(const Vec& x) { return 0.5 * (x[0] * x[0] + 2 * x[1] * x[1] + 3 * x[2] * x[2]); }

}  // namespace

TEST(GradFd, Square) {
  Vec x(1);
  x << 3.0;
  EXPECT_NEAR(grad_fd([](const Vec& v) { return v[0] * v[0]; }, x)[0], 6.0, 1e-8);
}

TEST(GradFd, RigidBodyQuadratic) {
  Vec x(3), expect(3);
  x << 0, 0, 1;
  expect << 0, 0, 3;
  EXPECT_LT(max_abs(Vec(grad_fd(rb, x) - expect)), 1e-8);
}

TEST(GradFd, ConstantIsZero) {
  std::mt19937_64 rng(30);
  EXPECT_LT(max_abs(grad_fd([](const Vec&) { return 4.2; }, random_vec(5, rng))), 1e-12);
}

TEST(GradFd, PolynomialsOfDegreeTwo) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 50; ++k) {
    const int n = 4;
    Mat A = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) A.col(i) = random_vec(n, rng, -3, 3);
    const Mat H = A + A.transpose();
    const Vec b = random_vec(n, rng, -3, 3);
    const double c = random_vec(1, rng)[0];
    auto f = [&](const Vec& x) { return c + b.dot(x) + 0.5 * x.dot(H * x); };
    const Vec x = random_vec(n, rng, -5, 5);
    EXPECT_LT(max_abs(Vec(grad_fd(f, x) - (b + H * x))), 1e-7);
  }
}

TEST(HessFd, RigidBodyQuadratic) {
  std::mt19937_64 rng(32);
  const Mat H = hess_fd(rb, random_vec(3, rng));
  EXPECT_LT(max_abs(Mat(H - Vec::LinSpaced(3, 1, 3).asDiagonal().toDenseMatrix())), 1e-5);
  EXPECT_EQ(max_abs(Mat(H - H.transpose())), 0.0);
}

TEST(HessFd, LinearIsZero) {
  std::mt19937_64 rng(33);
  auto f = [](const Vec& x) { return 3 * x[0] - 2 * x[1] + 0.5 * x[2]; };
  EXPECT_LT(max_abs(hess_fd(f, random_vec(3, rng))), 1e-7);
}

TEST(HessFd, RichardsonImprovesNonPolynomial) {
  auto f = [](const Vec& x) { return std::sin(x[0]) * std::exp(x[1]); };
  Vec x(2);
  x << 0.7, 0.3;
  Mat exact(2, 2);
  exact << -std::sin(0.7) * std::exp(0.3), std::cos(0.7) * std::exp(0.3), std::cos(0.7) * std::exp(0.3),
      std::sin(0.7) * std::exp(0.3);
  FDScheme plain, rich;
  plain.hessian_step_scale = rich.hessian_step_scale = 1e-2 * 0.5;
  rich.richardson = true;
  EXPECT_LT(max_abs(Mat(hess_fd(f, x, rich) - exact)), max_abs(Mat(hess_fd(f, x, plain) - exact)));
}

TEST(JacobianFd, LinearMap) {
  Mat A(2, 3);
  A << 1, 2, 3, -1, 0.5, 4;
  std::mt19937_64 rng(34);
  const Mat J = jacobian_fd([&](const Vec& x) { return Vec(A * x); }, random_vec(3, rng));
  EXPECT_LT(max_abs(Mat(J - A)), 1e-8);
}

TEST(GradFd, NonFiniteOnStencilIsDomainError) {
  Vec x(1);
  x << 0.0;
  EXPECT_THROW(grad_fd([](const Vec& v) { return std::log(v[0]); }, x), DomainError);
}

TEST(FdScheme, Bounds) {
  FDScheme s;
  EXPECT_NO_THROW(s.check());
  s.step_scale = 0.5;
  EXPECT_THROW(s.check(), SchemaError);
}

TEST(FdScheme, EnvironmentOverride) {
  ::setenv("RELEQ_FD_STEP", "1e-7", 1);
  EXPECT_DOUBLE_EQ(with_env_override({}).step_scale, 1e-7);
  ::setenv("RELEQ_FD_STEP", "abc", 1);
  EXPECT_THROW(with_env_override({}), SchemaError);
  ::setenv("RELEQ_FD_STEP", "0.5", 1);
  EXPECT_THROW(with_env_override({}), SchemaError);
  ::unsetenv("RELEQ_FD_STEP");
  EXPECT_DOUBLE_EQ(with_env_override({}).step_scale, FDScheme{}.step_scale);
}

TEST(DetectQuadratic, RecognisesAndRejects) {
  const auto q = detect_quadratic(rb, 3);
  ASSERT_TRUE(q.has_value());
  EXPECT_TRUE(q->homogeneous());
  EXPECT_LT(max_abs(Mat(q->H - Vec::LinSpaced(3, 1, 3).asDiagonal().toDenseMatrix())), 1e-15);
  auto shifted = [](const Vec& x) { return rb(x) + x[0] + 1.0; };
  const auto s = detect_quadratic(shifted, 3);
  ASSERT_TRUE(s.has_value());
  EXPECT_FALSE(s->homogeneous());
  EXPECT_FALSE(detect_quadratic([](const Vec& x) { return std::cos(x[0]); }, 3).has_value());
  EXPECT_FALSE(detect_quadratic([](const Vec& x) { return x[0] * x[0] * x[0]; }, 3).has_value());
}
