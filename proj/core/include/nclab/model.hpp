#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace nclab {

/// One distinct eigenvalue of A, stored by the natural log of its magnitude.
struct EigenBlock {
  double log_magnitude = 0.0;
  bool is_complex = false;
  int algebraic_multiplicity = 1;
  /// Argument of lambda in (0, pi); only read for complex blocks when A is assembled.
  double angle = 1.5707963267948966;

  /// a_i: 2 for a complex pair, 1 for a real eigenvalue.
  int weight() const noexcept { return is_complex ? 2 : 1; }
  /// mu_i: number of state coordinates the real Jordan block occupies.
  int block_size() const noexcept { return algebraic_multiplicity * weight(); }

  friend bool operator==(const EigenBlock&, const EigenBlock&) = default;
};

/// Single-input LTI plant x_{t+1} = A x_t + B u_t with A in real Jordan form.
///
/// Before validation `a_matrix` and `initial_covariance` may be empty; validate_system
/// fills them (block-diagonal A from the blocks, identity covariance).
struct SystemSpec {
  std::vector<EigenBlock> blocks;
  Eigen::VectorXd input_vector;
  Eigen::MatrixXd initial_covariance;
  Eigen::MatrixXd a_matrix;

  int state_dim() const noexcept { return static_cast<int>(input_vector.size()); }

  bool operator==(const SystemSpec& other) const;
};

struct ChannelParams {
  double power = 1.0;
  double noise_var = 1.0;
  double drop_prob = 0.0;

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

/// delta = sigma_n^2 / (sigma_n^2 + P): error-variance contraction per successful reception.
double delta(const ChannelParams& ch);

/// Throws Error(InvalidChannel) unless P > 0, sigma_n^2 > 0, 0 <= eps < 1 and delta in (0,1).
void validate_channel(const ChannelParams& ch);

/// Checks ordering, dimensions and stabilizability; assembles defaults.
/// Idempotent: validating a validated spec returns an equal spec.
SystemSpec validate_system(SystemSpec spec);

/// Block-diagonal real Jordan matrix for the given blocks. Complex blocks use the
/// rotation-scaled form |lambda| * [[cos w, -sin w], [sin w, cos w]] with w = angle.
Eigen::MatrixXd assemble_jordan(const std::vector<EigenBlock>& blocks);

/// PBH test: rank [lambda I - A, B] = N at every eigenvalue of A with |lambda| >= 1.
bool is_stabilizable(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol = 1e-9);

/// Log magnitude of every state coordinate, expanding each block to block_size entries.
std::vector<double> coordinate_log_magnitudes(const SystemSpec& spec);

/// Convenience: real, multiplicity-one blocks with the given log magnitudes.
SystemSpec diagonal_system(const std::vector<double>& log_magnitudes,
                           std::optional<Eigen::VectorXd> input_vector = std::nullopt);

}  // namespace nclab
