#include "nclab/control.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nclab/error.hpp"
#include "support/oracles.hpp"

namespace {

using nclab::SystemSpec;

SystemSpec plant(Eigen::MatrixXd a, Eigen::VectorXd b) {
  SystemSpec s;
  s.a_matrix = std::move(a);
  s.input_vector = std::move(b);
  return s;
}

TEST(Deadbeat, DiagonalTwoThree) {
  const SystemSpec s = plant(Eigen::Vector2d(2.0, 3.0).asDiagonal(), Eigen::Vector2d(1.0, 1.0));
  const Eigen::RowVectorXd k = nclab::deadbeat_gain(s);
  ASSERT_EQ(k.size(), 2);
  EXPECT_NEAR(k(0), 4.0, 1e-12);
  EXPECT_NEAR(k(1), -9.0, 1e-12);
  const Eigen::MatrixXd cl = s.a_matrix + s.input_vector * k;
  EXPECT_NEAR(cl.trace(), 0.0, 1e-12);
  EXPECT_NEAR(cl.determinant(), 0.0, 1e-12);
  EXPECT_LT(nclab::closed_loop_spectral_radius(s, k), 1e-8);
}

TEST(Deadbeat, Scalar) {
  const SystemSpec s = plant(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Ones(1));
  EXPECT_NEAR(nclab::deadbeat_gain(s)(0), -2.0, 1e-15);
}

TEST(Deadbeat, NotControllable) {
  const SystemSpec s = plant(Eigen::Vector2d(2.0, 3.0).asDiagonal(), Eigen::Vector2d(1.0, 0.0));
  try {
    nclab::deadbeat_gain(s);
    FAIL();
  } catch (const nclab::Error& e) {
    EXPECT_EQ(e.kind(), nclab::ErrorKind::NotControllable);
  }
}

TEST(Deadbeat, NilpotentClosedLoop) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int n = 1; n <= 4; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::MatrixXd a(n, n);
      Eigen::VectorXd b(n);
      for (int i = 0; i < n; ++i) {
        b(i) = u(rng);
        for (int j = 0; j < n; ++j) a(i, j) = u(rng);
      }
      const SystemSpec s = plant(a, b);
      const Eigen::RowVectorXd k = nclab::deadbeat_gain(s);
      Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
      const Eigen::MatrixXd cl = a + b * k;
      for (int j = 0; j < n; ++j) p = cl * p;
      EXPECT_LT(p.cwiseAbs().maxCoeff(), 1e-8) << "n=" << n;
    }
  }
}

TEST(Gain, UserGainChecked) {
  const SystemSpec s = plant(Eigen::Vector2d(2.0, 3.0).asDiagonal(), Eigen::Vector2d(1.0, 1.0));
  EXPECT_NO_THROW(nclab::check_gain(s, nclab::deadbeat_gain(s)));
  EXPECT_THROW(nclab::check_gain(s, Eigen::RowVector2d(0.0, 0.0)), nclab::Error);
  EXPECT_THROW(nclab::check_gain(s, Eigen::RowVector3d(0.0, 0.0, 0.0)), nclab::Error);
}

TEST(ControlStep, ZeroGainGivesZeroInput) {
  const SystemSpec s = plant(Eigen::Vector2d(1.1, 1.05).asDiagonal(), Eigen::Vector2d(1.0, 1.0));
  auto cs = nclab::ControllerState::start(s, Eigen::RowVector2d::Zero());
  for (int t = 0; t < 20; ++t) EXPECT_EQ(nclab::control_step(cs, Eigen::Vector2d(0.3 * t, -0.1), s).u, 0.0);
}

TEST(ControlStep, PerfectEstimateIsDeadbeat) {
  const SystemSpec s = plant(Eigen::Vector2d(2.0, 3.0).asDiagonal(), Eigen::Vector2d(1.0, 1.0));
  auto cs = nclab::ControllerState::start(s, nclab::deadbeat_gain(s));
  const Eigen::Vector2d x0(0.7, -1.3);
  Eigen::VectorXd x = x0;
  for (int t = 0; t < 2; ++t) {
    const auto out = nclab::control_step(cs, x0, s);
    x = s.a_matrix * x + s.input_vector * out.u;
  }
  EXPECT_LT(x.norm(), 1e-12);
  for (int t = 0; t < 5; ++t) {
    const auto out = nclab::control_step(cs, x0, s);
    x = s.a_matrix * x + s.input_vector * out.u;
    EXPECT_LT(x.norm(), 1e-10);
  }
}

TEST(ControlStep, FrozenEstimateMatchesDirectSum) {
  const SystemSpec s = plant(Eigen::Vector2d(1.2, 0.9).asDiagonal(), Eigen::Vector2d(1.0, 0.5));
  auto cs = nclab::ControllerState::start(s, Eigen::RowVector2d(-0.4, 0.1));
  const Eigen::Vector2d xhat(1.0, 2.0);
  std::vector<double> u;
  for (long t = 0; t < 5; ++t) u.push_back(nclab::control_step(cs, xhat, s).u);
  // u_5 = K z_5 with z_5 from the explicit sum.
  const Eigen::VectorXd z5 = oracle::reconstruct_direct(s.a_matrix, s.input_vector, xhat, u, 5);
  const double u5 = nclab::control_step(cs, xhat, s).u;
  EXPECT_NEAR(u5, cs.gain.dot(z5), 1e-12);
}

TEST(ControlStep, RecursionMatchesDirectSumOnRandomRun) {
  const SystemSpec s = plant(Eigen::Vector2d(std::exp(0.05), std::exp(0.03)).asDiagonal(), Eigen::Vector2d(1.0, 1.0));
  auto cs = nclab::ControllerState::start(s, nclab::deadbeat_gain(s));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> jump(0.0, 1.0);
  std::bernoulli_distribution update(0.3);
  Eigen::VectorXd xhat = Eigen::Vector2d::Zero();
  std::vector<double> u;
  for (long t = 0; t < 200; ++t) {
    if (update(rng)) xhat(static_cast<Eigen::Index>(t % 2)) += jump(rng) * std::pow(0.9, t);
    const Eigen::VectorXd z = oracle::reconstruct_direct(s.a_matrix, s.input_vector, xhat, u, t);
    const double expected = cs.gain.dot(z);
    const double got = nclab::control_step(cs, xhat, s).u;
    EXPECT_NEAR(got, expected, 1e-6 * std::max(1.0, std::abs(expected))) << "t=" << t;
    u.push_back(got);
  }
}

TEST(ControlStep, OverflowGuard) {
  const SystemSpec s = plant(Eigen::MatrixXd::Constant(1, 1, 10.0), Eigen::VectorXd::Ones(1));
  auto cs = nclab::ControllerState::start(s, Eigen::RowVectorXd::Zero(1));
  bool flagged = false;
  for (int t = 0; t < 20 && !flagged; ++t) flagged = nclab::control_step(cs, Eigen::VectorXd::Ones(1), s).overflow;
  EXPECT_TRUE(flagged);
}

}  // namespace
