#include "nclab/control.hpp"

#include <cmath>

#include "nclab/error.hpp"

namespace nclab {

Eigen::RowVectorXd deadbeat_gain(const SystemSpec& spec) {
  const Eigen::MatrixXd& a = spec.a_matrix;
  const Eigen::VectorXd& b = spec.input_vector;
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n || b.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "deadbeat_gain needs a validated system");
  }

  Eigen::MatrixXd ctrb(n, n);
  ctrb.col(0) = b;
  for (Eigen::Index k = 1; k < n; ++k) ctrb.col(k) = a * ctrb.col(k - 1);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctrb);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(n - 1) / sv(0) < 1e-9) {
    throw Error(ErrorKind::NotControllable, "controllability matrix is singular");
  }

  // Ackermann with desired characteristic polynomial z^n: K = -e_n' C^{-1} A^n.
  Eigen::VectorXd last = Eigen::VectorXd::Zero(n);
  last(n - 1) = 1.0;
  const Eigen::RowVectorXd row = ctrb.transpose().fullPivLu().solve(last).transpose();
  Eigen::MatrixXd a_n = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) a_n = a * a_n;
  return -row * a_n;
}

double closed_loop_spectral_radius(const SystemSpec& spec, const Eigen::RowVectorXd& gain) {
  const Eigen::MatrixXd closed = spec.a_matrix + spec.input_vector * gain;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(closed, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void check_gain(const SystemSpec& spec, const Eigen::RowVectorXd& gain) {
  if (gain.size() != spec.state_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "gain length does not match state dimension");
  }
  if (!(closed_loop_spectral_radius(spec, gain) < 1.0)) {
    throw Error(ErrorKind::UnstableGain, "A + BK is not Schur stable");
  }
}

ControllerState ControllerState::start(const SystemSpec& spec, Eigen::RowVectorXd gain) {
  const Eigen::Index n = spec.state_dim();
  ControllerState cs;
  cs.gain = std::move(gain);
  cs.reconstructed_state = Eigen::VectorXd::Zero(n);
  cs.a_power = Eigen::MatrixXd::Identity(n, n);
  cs.last_estimate = Eigen::VectorXd::Zero(n);
  return cs;
}

ControlOutput control_step(ControllerState& cs, const Eigen::VectorXd& new_estimate, const SystemSpec& spec) {
  Eigen::VectorXd z = cs.reconstructed_state + cs.a_power * (new_estimate - cs.last_estimate);
  ControlOutput out;
  out.u = cs.gain.dot(z);
  out.overflow = !z.allFinite() || z.cwiseAbs().maxCoeff() > kReconstructionGuard;

  cs.reconstructed_state = spec.a_matrix * z + spec.input_vector * out.u;
  cs.a_power = spec.a_matrix * cs.a_power;
  cs.last_estimate = new_estimate;
  ++cs.t;
  return out;
}

}  // namespace nclab
