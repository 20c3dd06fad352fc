#include "nclab/model.hpp"

#include <cmath>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "nclab/error.hpp"
#include "support/oracles.hpp"

namespace {

using nclab::ChannelParams;
using nclab::EigenBlock;
using nclab::Error;
using nclab::ErrorKind;
using nclab::SystemSpec;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no nclab::Error thrown";
  return ErrorKind::ConfigError;
}

SystemSpec two_real(double a, double b) {
  SystemSpec s;
  s.blocks = {EigenBlock{a}, EigenBlock{b}};
  s.input_vector = Eigen::Vector2d(1.0, 1.0);
  return s;
}

TEST(Model, ValidTwoDimensionalSystem) {
  const SystemSpec v = nclab::validate_system(two_real(0.05, 0.03));
  EXPECT_EQ(v.state_dim(), 2);
  EXPECT_TRUE(v.initial_covariance.isApprox(Eigen::Matrix2d::Identity()));
  EXPECT_NEAR(v.a_matrix(0, 0), std::exp(0.05), 1e-15);
  EXPECT_NEAR(v.a_matrix(1, 1), std::exp(0.03), 1e-15);
  EXPECT_EQ(v.a_matrix(0, 1), 0.0);
}

TEST(Model, UnsortedBlocksRejected) {
  EXPECT_EQ(kind_of([] { nclab::validate_system(two_real(0.03, 0.05)); }), ErrorKind::NotSorted);
}

TEST(Model, NegativeLogMagnitudeRejected) {
  EXPECT_EQ(kind_of([] { nclab::validate_system(two_real(0.05, -0.01)); }), ErrorKind::StableEigenvalue);
}

// Mode 3 has no input path and |3| > 1: the PBH matrix [3I - A, B] drops rank.
TEST(Model, UncontrollableUnstableModeRejected) {
  SystemSpec s;
  s.blocks = {EigenBlock{std::log(3.0)}, EigenBlock{std::log(2.0)}};
  s.a_matrix = Eigen::Vector2d(2.0, 3.0).asDiagonal();
  s.input_vector = Eigen::Vector2d(1.0, 0.0);
  EXPECT_EQ(kind_of([&] { nclab::validate_system(s); }), ErrorKind::NotStabilizable);
  EXPECT_FALSE(nclab::is_stabilizable(s.a_matrix, s.input_vector));
}

TEST(Model, DimensionMismatch) {
  SystemSpec s = two_real(0.05, 0.03);
  s.input_vector = Eigen::Vector3d(1.0, 1.0, 1.0);
  EXPECT_EQ(kind_of([&] { nclab::validate_system(s); }), ErrorKind::DimensionMismatch);

  SystemSpec c = two_real(0.05, 0.03);
  c.initial_covariance = Eigen::Matrix3d::Identity();
  EXPECT_EQ(kind_of([&] { nclab::validate_system(c); }), ErrorKind::DimensionMismatch);
}

TEST(Model, CovarianceMustBePositiveDefinite) {
  SystemSpec s = two_real(0.05, 0.03);
  s.initial_covariance = Eigen::Matrix2d::Zero();
  EXPECT_ANY_THROW(nclab::validate_system(s));
}

TEST(Model, BlockSizes) {
  EXPECT_EQ((EigenBlock{0.1, false, 3}.block_size()), 3);
  EXPECT_EQ((EigenBlock{0.1, true, 2}.block_size()), 4);
  EXPECT_EQ((EigenBlock{0.1, true, 1}.weight()), 2);
}

TEST(Model, JordanAssembly) {
  const Eigen::MatrixXd a = nclab::assemble_jordan({EigenBlock{std::log(2.0), false, 2}, EigenBlock{0.0, true, 1, 0.5}});
  ASSERT_EQ(a.rows(), 4);
  EXPECT_NEAR(a(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(a(0, 1), 1.0, 1e-14);
  EXPECT_NEAR(a(1, 1), 2.0, 1e-14);
  EXPECT_NEAR(a(2, 2), std::cos(0.5), 1e-14);
  EXPECT_NEAR(a(2, 3), -std::sin(0.5), 1e-14);
  EXPECT_NEAR(a(3, 2), std::sin(0.5), 1e-14);
  EXPECT_EQ(a(1, 2), 0.0);
}

TEST(Model, CoordinateLogMagnitudesExpandBlocks) {
  SystemSpec s;
  s.blocks = {EigenBlock{0.2, true, 1}, EigenBlock{0.1, false, 2}};
  s.input_vector = Eigen::Vector4d(1, 0, 0, 1);
  const SystemSpec v = nclab::validate_system(s);
  EXPECT_THAT(nclab::coordinate_log_magnitudes(v), ::testing::ElementsAre(0.2, 0.2, 0.1, 0.1));
}

TEST(Model, ValidateIsIdempotent) {
  const std::vector<SystemSpec> inputs = {two_real(0.05, 0.03), nclab::diagonal_system({0.3, 0.2, 0.0}),
                                          [] {
                                            SystemSpec s;
                                            s.blocks = {EigenBlock{0.1, true, 1, 1.0}};
                                            s.input_vector = Eigen::Vector2d(0.0, 1.0);
                                            return s;
                                          }()};
  for (const auto& raw : inputs) {
    const SystemSpec once = nclab::validate_system(raw);
    const SystemSpec twice = nclab::validate_system(once);
    EXPECT_TRUE(once == twice);
  }
}

TEST(Channel, DeltaValues) {
  EXPECT_DOUBLE_EQ(nclab::delta(ChannelParams{1.0, 1.0, 0.7}), 0.5);
  EXPECT_DOUBLE_EQ(nclab::delta(ChannelParams{1.0, 3.0, 0.0}), 0.75);
  EXPECT_NEAR(nclab::delta(ChannelParams{1e9, 1.0, 0.0}), 1e-9, 1e-15);
}

TEST(Channel, DeltaMonotoneOnGrid) {
  const std::vector<double> grid = {0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3};
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    for (double other : grid) {
      EXPECT_GT(nclab::delta({grid[i], other, 0.0}), nclab::delta({grid[i + 1], other, 0.0}));
      EXPECT_LT(nclab::delta({other, grid[i], 0.0}), nclab::delta({other, grid[i + 1], 0.0}));
      EXPECT_DOUBLE_EQ(nclab::delta({grid[i], other, 0.0}), oracle::delta(grid[i], other));
    }
  }
}

TEST(Channel, InvalidParametersRejected) {
  for (const ChannelParams& ch : {ChannelParams{0.0, 1.0, 0.0}, ChannelParams{1.0, 0.0, 0.0},
                                  ChannelParams{1.0, 1.0, 1.0}, ChannelParams{1.0, 1.0, -0.1},
                                  ChannelParams{NAN, 1.0, 0.0}}) {
    EXPECT_EQ(kind_of([&] { nclab::validate_channel(ch); }), ErrorKind::InvalidChannel);
  }
}

TEST(Errors, NumericalClassification) {
  EXPECT_TRUE(nclab::is_numerical(ErrorKind::NoRoot));
  EXPECT_TRUE(nclab::is_numerical(ErrorKind::CapExceeded));
  EXPECT_TRUE(nclab::is_numerical(ErrorKind::DivergentMoment));
  EXPECT_FALSE(nclab::is_numerical(ErrorKind::NotSorted));
  EXPECT_FALSE(nclab::is_numerical(ErrorKind::ConfigError));
}

}  // namespace
