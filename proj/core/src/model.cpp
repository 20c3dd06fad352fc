#include "nclab/model.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "nclab/error.hpp"

namespace nclab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotSorted: return "NotSorted";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotStabilizable: return "NotStabilizable";
    case ErrorKind::StableEigenvalue: return "StableEigenvalue";
    case ErrorKind::InvalidChannel: return "InvalidChannel";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::OrderViolation: return "OrderViolation";
    case ErrorKind::DivergentMoment: return "DivergentMoment";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::DegenerateEqualMagnitudes: return "DegenerateEqualMagnitudes";
    case ErrorKind::EmptyAudit: return "EmptyAudit";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NotControllable: return "NotControllable";
    case ErrorKind::UnstableGain: return "UnstableGain";
    case ErrorKind::UnsupportedSystem: return "UnsupportedSystem";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::CapExceeded:
    case ErrorKind::Infeasible:
    case ErrorKind::DivergentMoment:
    case ErrorKind::NoRoot:
    case ErrorKind::DegenerateEqualMagnitudes:
    case ErrorKind::EmptyAudit:
      return true;
    default:
      return false;
  }
}

bool SystemSpec::operator==(const SystemSpec& other) const {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || x == y);
  };
  return blocks == other.blocks && same(input_vector, other.input_vector) &&
         same(initial_covariance, other.initial_covariance) && same(a_matrix, other.a_matrix);
}

double delta(const ChannelParams& ch) { return ch.noise_var / (ch.noise_var + ch.power); }

void validate_channel(const ChannelParams& ch) {
  if (!(std::isfinite(ch.power) && ch.power > 0.0)) {
    throw Error(ErrorKind::InvalidChannel, "power must be positive and finite");
  }
  if (!(std::isfinite(ch.noise_var) && ch.noise_var > 0.0)) {
    throw Error(ErrorKind::InvalidChannel, "noise_var must be positive and finite");
  }
  if (!(ch.drop_prob >= 0.0 && ch.drop_prob < 1.0)) {
    throw Error(ErrorKind::InvalidChannel, "drop_prob must lie in [0, 1)");
  }
  const double d = delta(ch);
  if (!(d > 0.0 && d < 1.0)) {
    throw Error(ErrorKind::InvalidChannel, "delta must lie strictly inside (0, 1)");
  }
}

Eigen::MatrixXd assemble_jordan(const std::vector<EigenBlock>& blocks) {
  int n = 0;
  for (const auto& b : blocks) n += b.block_size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);

  int offset = 0;
  for (const auto& b : blocks) {
    const double mag = std::exp(b.log_magnitude);
    if (!b.is_complex) {
      for (int k = 0; k < b.algebraic_multiplicity; ++k) {
        a(offset + k, offset + k) = mag;
        if (k + 1 < b.algebraic_multiplicity) a(offset + k, offset + k + 1) = 1.0;
      }
    } else {
      Eigen::Matrix2d rot;
      rot << std::cos(b.angle), -std::sin(b.angle), std::sin(b.angle), std::cos(b.angle);
      for (int k = 0; k < b.algebraic_multiplicity; ++k) {
        const int r = offset + 2 * k;
        a.block<2, 2>(r, r) = mag * rot;
        if (k + 1 < b.algebraic_multiplicity) a.block<2, 2>(r, r + 2).setIdentity();
      }
    }
    offset += b.block_size();
  }
  return a;
}

bool is_stabilizable(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol) {
  const auto n = a.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  const Eigen::VectorXcd eig = solver.eigenvalues();

  using CMat = Eigen::MatrixXcd;
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    const std::complex<double> lambda = eig(k);
    // Modes strictly inside the unit disk never need control.
    if (std::abs(lambda) < 1.0 - tol) continue;

    CMat pbh(n, n + 1);
    pbh.leftCols(n) = lambda * CMat::Identity(n, n) - a.cast<std::complex<double>>();
    pbh.col(n) = b.cast<std::complex<double>>();

    Eigen::JacobiSVD<CMat> svd(pbh);
    const auto& sv = svd.singularValues();
    const double scale = std::max(1.0, sv(0));
    if (sv(n - 1) <= tol * scale) return false;
  }
  return true;
}

SystemSpec validate_system(SystemSpec spec) {
  if (spec.blocks.empty()) {
    throw Error(ErrorKind::DimensionMismatch, "system has no eigenvalue blocks");
  }
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto& b = spec.blocks[i];
    if (!std::isfinite(b.log_magnitude)) {
      throw Error(ErrorKind::DimensionMismatch, "non-finite log magnitude in block " + std::to_string(i));
    }
    if (b.log_magnitude < 0.0) {
      throw Error(ErrorKind::StableEigenvalue, "block " + std::to_string(i) + " has |lambda| < 1");
    }
    if (b.algebraic_multiplicity < 1) {
      throw Error(ErrorKind::DimensionMismatch, "block " + std::to_string(i) + " has multiplicity < 1");
    }
    if (b.is_complex && !(b.angle > 0.0 && b.angle < M_PI)) {
      throw Error(ErrorKind::DimensionMismatch, "complex block " + std::to_string(i) + " needs angle in (0, pi)");
    }
    if (i > 0 && b.log_magnitude > spec.blocks[i - 1].log_magnitude) {
      throw Error(ErrorKind::NotSorted, "blocks must be ordered by nonincreasing log magnitude");
    }
  }

  int n = 0;
  for (const auto& b : spec.blocks) n += b.block_size();

  if (spec.input_vector.size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                "input vector has length " + std::to_string(spec.input_vector.size()) + ", expected " +
                    std::to_string(n));
  }
  if (!spec.input_vector.allFinite()) {
    throw Error(ErrorKind::DimensionMismatch, "input vector has non-finite entries");
  }

  if (spec.a_matrix.size() == 0) {
    spec.a_matrix = assemble_jordan(spec.blocks);
  } else if (spec.a_matrix.rows() != n || spec.a_matrix.cols() != n || !spec.a_matrix.allFinite()) {
    throw Error(ErrorKind::DimensionMismatch, "A must be a finite " + std::to_string(n) + "x" + std::to_string(n) +
                                                  " matrix");
  }

  if (spec.initial_covariance.size() == 0) {
    spec.initial_covariance = Eigen::MatrixXd::Identity(n, n);
  } else {
    const auto& s = spec.initial_covariance;
    if (s.rows() != n || s.cols() != n || !s.allFinite()) {
      throw Error(ErrorKind::DimensionMismatch, "initial covariance must be a finite " + std::to_string(n) + "x" +
                                                    std::to_string(n) + " matrix");
    }
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, s.cwiseAbs().maxCoeff())) {
      throw Error(ErrorKind::DimensionMismatch, "initial covariance is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::DimensionMismatch, "initial covariance is not positive definite");
    }
  }

  if (!is_stabilizable(spec.a_matrix, spec.input_vector)) {
    throw Error(ErrorKind::NotStabilizable, "(A, B) fails the PBH rank test on an unstable mode");
  }
  return spec;
}

std::vector<double> coordinate_log_magnitudes(const SystemSpec& spec) {
  std::vector<double> out;
  for (const auto& b : spec.blocks) out.insert(out.end(), static_cast<std::size_t>(b.block_size()), b.log_magnitude);
  return out;
}

SystemSpec diagonal_system(const std::vector<double>& log_magnitudes, std::optional<Eigen::VectorXd> input_vector) {
  SystemSpec spec;
  for (double l : log_magnitudes) spec.blocks.push_back(EigenBlock{l, false, 1});
  spec.input_vector =
      input_vector ? *input_vector : Eigen::VectorXd::Ones(static_cast<Eigen::Index>(log_magnitudes.size()));
  return spec;
}

}  // namespace nclab
