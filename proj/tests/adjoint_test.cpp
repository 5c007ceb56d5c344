#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "odeflow/adjoint.hpp"
#include "odeflow/models.hpp"
#include "support.hpp"

using odeflow::ErrorCode;
using odeflow::IntegratorConfig;
using odeflow::Matrix;
using odeflow::Vector;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

double numeric_loss(const odeflow::DynamicsModel& m, const Vector& theta, const Vector& x0,
                    const Vector& target, double t, const IntegratorConfig& cfg) {
  return 0.5 * (odeflow::flow_endpoint(m, theta, x0, t, cfg) - target).squaredNorm();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const odeflow::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(AdjointGradient, Linear1DExample) {
  const odeflow::Linear1D m;
  const auto r =
      odeflow::adjoint_gradient(m, v1(0.0), v1(1.0), v1(std::exp(-1.0)), 1.0, IntegratorConfig{});
  EXPECT_NEAR(r.grad[0], 0.6321206, 1e-5);
  EXPECT_NEAR(r.loss, 0.5 * std::pow(1.0 - std::exp(-1.0), 2), 1e-9);
  EXPECT_NEAR(r.x_t[0], 1.0, 1e-15);
}

TEST(AdjointGradient, ZeroResidualGivesZeroGradient) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  const odeflow::TanhLayer m(2);
  Vector theta(6), x0(2);
  for (auto& v : theta) v = n01(rng);
  for (auto& v : x0) v = n01(rng);
  const Vector xt = odeflow::flow_endpoint(m, theta, x0, 1.0, IntegratorConfig{});
  const auto r = odeflow::adjoint_gradient(m, theta, x0, xt, 1.0, IntegratorConfig{});
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_EQ(r.grad, Vector::Zero(6));
}

TEST(AdjointGradient, DiagonalMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  const odeflow::DiagonalLinear m(2);
  const IntegratorConfig cfg{1e-3};
  for (int i = 0; i < 10; ++i) {
    Vector theta(2), x0(2), target(2);
    for (auto& v : theta) v = 0.7 * n01(rng);
    for (auto& v : x0) v = n01(rng);
    for (auto& v : target) v = n01(rng);
    const double t = 1.0;
    const auto r = odeflow::adjoint_gradient(m, theta, x0, target, t, cfg);
    const Vector fd = ref::central_diff(
        [&](const Vector& th) { return numeric_loss(m, th, x0, target, t, cfg); }, theta, 1e-5);
    EXPECT_LE(ref::rel_err(r.grad, fd), 1e-4);
  }
}

TEST(AdjointGradient, TanhMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> ut(0.1, 2.0);
  const odeflow::TanhLayer m(2);
  const IntegratorConfig cfg{1e-3};
  for (int i = 0; i < 10; ++i) {
    Vector theta(6), x0(2), target(2);
    for (auto& v : theta) v = 0.8 * n01(rng);
    for (auto& v : x0) v = n01(rng);
    for (auto& v : target) v = n01(rng);
    const double t = ut(rng);
    const auto r = odeflow::adjoint_gradient(m, theta, x0, target, t, cfg);
    const Vector fd = ref::central_diff(
        [&](const Vector& th) { return numeric_loss(m, th, x0, target, t, cfg); }, theta, 1e-5);
    EXPECT_LE(ref::rel_err(r.grad, fd), 1e-4);
  }
}

TEST(AdjointGradient, Linear1DMatchesClosedForm) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ua(-2.0, 1.0), ut(0.1, 2.0), ux(-2.0, 2.0);
  const odeflow::Linear1D m;
  for (int i = 0; i < 50; ++i) {
    const double a = ua(rng), a_star = ua(rng), t = ut(rng), x0 = ux(rng);
    const auto r = odeflow::adjoint_gradient(m, v1(a), v1(x0), v1(std::exp(a_star * t) * x0), t,
                                             IntegratorConfig{});
    EXPECT_LE(ref::rel_err(r.grad[0], ref::sample_grad(a, a_star, t, x0)), 1e-5);
  }
}

TEST(AdjointGradient, Errors) {
  const odeflow::Linear1D m;
  const IntegratorConfig cfg;
  EXPECT_EQ(code_of([&] { (void)odeflow::adjoint_gradient(m, v1(0), v1(1), v1(1), 0.0, cfg); }),
            ErrorCode::kNonPositiveTime);
  EXPECT_EQ(code_of([&] { (void)odeflow::adjoint_gradient(m, v1(0), v1(1), v1(1), -1.0, cfg); }),
            ErrorCode::kNonPositiveTime);
  EXPECT_EQ(
      code_of([&] { (void)odeflow::adjoint_gradient(m, v1(900), v1(1), v1(1), 1.0, cfg); }),
      ErrorCode::kNonFiniteState);
  EXPECT_EQ(code_of([&] {
              (void)odeflow::adjoint_gradient(m, v1(0), v1(1), Vector::Zero(2), 1.0, cfg);
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(AdjointGradient, BatchRowsAreIndependent) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  const odeflow::DiagonalLinear m(2);
  const Vector theta = (Vector(2) << -0.4, 0.3).finished();
  Matrix x0s(520, 2), stars(520, 2);
  for (Eigen::Index i = 0; i < x0s.size(); ++i) {
    x0s.data()[i] = n01(rng);
    stars.data()[i] = n01(rng);
  }
  const auto batch = odeflow::adjoint_gradient_batch(m, theta, x0s, stars, 1.0, IntegratorConfig{});
  for (Eigen::Index r : {0, 255, 256, 519}) {
    const auto one = odeflow::adjoint_gradient(m, theta, x0s.row(r).transpose(),
                                               stars.row(r).transpose(), 1.0, IntegratorConfig{});
    EXPECT_LE((batch.grads.row(r).transpose() - one.grad).norm(), 1e-13);
    EXPECT_NEAR(batch.losses[r], one.loss, 1e-13);
  }
}

TEST(ForwardSensitivity, Examples) {
  const odeflow::Linear1D m;
  const IntegratorConfig cfg;
  EXPECT_NEAR(odeflow::forward_sensitivity(m, v1(0.0), v1(3.0), 1.0, cfg)(0, 0), 3.0, 1e-6);
  EXPECT_EQ(odeflow::forward_sensitivity(m, v1(0.7), v1(3.0), 0.0, cfg)(0, 0), 0.0);
  EXPECT_NEAR(odeflow::forward_sensitivity(m, v1(-1.0), v1(1.0), 2.0, cfg)(0, 0),
              2.0 * std::exp(-2.0), 1e-6);
}

TEST(ForwardSensitivity, MatchesFiniteDifferenceOfFlow) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  const odeflow::TanhLayer m(2);
  const IntegratorConfig cfg{1e-3};
  Vector theta(6), x0(2);
  for (auto& v : theta) v = 0.8 * n01(rng);
  for (auto& v : x0) v = n01(rng);
  const Matrix s = odeflow::forward_sensitivity(m, theta, x0, 1.3, cfg);
  const Matrix fd = ref::central_jac(
      [&](const Vector& th) { return odeflow::flow_endpoint(m, th, x0, 1.3, cfg); }, theta, 1e-5);
  ASSERT_EQ(s.rows(), 2);
  ASSERT_EQ(s.cols(), 6);
  EXPECT_LE((s - fd).norm(), 1e-7 * (1.0 + fd.norm()));
}

TEST(EmpiricalFisher, Examples) {
  const odeflow::Linear1D m;
  const IntegratorConfig cfg;
  const Matrix two = (Matrix(2, 1) << 1.0, -1.0).finished();
  EXPECT_NEAR(odeflow::empirical_fisher(m, v1(0.0), two, 1.0, cfg)(0, 0), 1.0, 1e-12);
  const Matrix zero = Matrix::Zero(1, 1);
  EXPECT_EQ(odeflow::empirical_fisher(m, v1(0.3), zero, 1.0, cfg)(0, 0), 0.0);
  EXPECT_EQ(code_of([&] { (void)odeflow::empirical_fisher(m, v1(0), Matrix(0, 1), 1.0, cfg); }),
            ErrorCode::kEmptyDataset);
}

TEST(EmpiricalFisher, MonteCarloLimit) {
  const odeflow::Linear1D m;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  Matrix xs(100000, 1);
  for (Eigen::Index i = 0; i < xs.rows(); ++i) xs(i, 0) = n01(rng);
  const double f = odeflow::empirical_fisher(m, v1(-0.5), xs, 1.0, IntegratorConfig{})(0, 0);
  const double want = std::exp(-1.0);  // t^2 sigma^2 e^{2at}
  EXPECT_LE(ref::rel_err(f, want), 0.05);
}

TEST(EmpiricalFisher, SymmetricPsd) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  const odeflow::TanhLayer m(3);
  Vector theta(12);
  for (auto& v : theta) v = 0.6 * n01(rng);
  Matrix xs(300, 3);
  for (Eigen::Index i = 0; i < xs.size(); ++i) xs.data()[i] = n01(rng);
  const Matrix f = odeflow::empirical_fisher(m, theta, xs, 1.0, IntegratorConfig{});
  EXPECT_EQ(f, f.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> es(f);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}
