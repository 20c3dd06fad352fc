#pragma once

#include <cstdint>
#include <random>

#include "nclab/model.hpp"

namespace nclab {

struct Reception {
  double r = 0.0;
  bool gamma = false;
};

struct PowerAudit {
  double mean_power = 0.0;
  long slots = 0;
};

/// Erasure channel with additive Gaussian noise, r = gamma * s + n.
///
/// Erasures and noise draw from two generators seeded from one master seed, so the
/// erasure sequence does not depend on how many noise samples were consumed. The
/// receiver-side gamma and r are returned to the caller, which also models the ideal
/// delay-one feedback link to the transmitter.
class ChannelInstance {
 public:
  ChannelInstance(const ChannelParams& params, std::uint64_t seed);

  Reception transmit(double s);

  /// Draws only the erasure indicator, leaving the noise stream untouched.
  bool draw_erasure_outcome();

  PowerAudit power_audit() const;

  const ChannelParams& params() const noexcept { return params_; }

 private:
  ChannelParams params_;
  std::mt19937_64 erasure_rng_;
  std::mt19937_64 noise_rng_;
  std::bernoulli_distribution success_;
  std::normal_distribution<double> noise_;
  double power_sum_ = 0.0;
  long slots_ = 0;
};

}  // namespace nclab
