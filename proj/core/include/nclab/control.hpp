#pragma once

#include <Eigen/Dense>

#include "nclab/model.hpp"

namespace nclab {

/// Single-input Ackermann placement of every closed-loop pole at the origin, so A + BK
/// is nilpotent. Throws NotControllable when the controllability matrix has reciprocal
/// condition number below 1e-9.
Eigen::RowVectorXd deadbeat_gain(const SystemSpec& spec);

/// Largest |eigenvalue| of A + BK.
double closed_loop_spectral_radius(const SystemSpec& spec, const Eigen::RowVectorXd& gain);

/// Accepts a user gain if A + BK is Schur stable, else throws UnstableGain.
void check_gain(const SystemSpec& spec, const Eigen::RowVectorXd& gain);

/// Certainty-equivalent controller acting on the reconstructed state
///   z_t = A^t xhat_t + sum_{i=1..t} A^{t-i} B u_{i-1},   u_t = K z_t.
/// `reconstructed_state` holds z_t computed with the previous estimate; control_step
/// corrects it by A^t (xhat_t - xhat_{t-1}) before applying K.
struct ControllerState {
  Eigen::RowVectorXd gain;
  Eigen::VectorXd reconstructed_state;
  Eigen::MatrixXd a_power;
  Eigen::VectorXd last_estimate;
  long t = 0;

  static ControllerState start(const SystemSpec& spec, Eigen::RowVectorXd gain);
};

struct ControlOutput {
  double u = 0.0;
  bool overflow = false;  // some |z| component exceeded the divergence guard
};

inline constexpr double kReconstructionGuard = 1e12;

ControlOutput control_step(ControllerState& cs, const Eigen::VectorXd& new_estimate, const SystemSpec& spec);

}  // namespace nclab
