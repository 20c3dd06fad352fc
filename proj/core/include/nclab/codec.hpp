#pragma once

#include "nclab/model.hpp"

namespace nclab {

/// Encoder/decoder state for one coordinate x_{i,0}. Both ends hold an identical copy;
/// the ideal feedback link keeps them in lockstep.
struct EstimatorState {
  int coordinate_index = 0;
  double estimate = 0.0;
  double error_var = 0.0;  // conditional on the realized erasure record
  int success_count = 0;
  bool initialized = false;
  double prior_var = 1.0;

  static EstimatorState fresh(int index, double prior_var);
};

/// Channel symbol for the current slot. Unit-power normalized: E[s^2] = P.
double encode(const EstimatorState& st, double x0_i, const ChannelParams& ch);

/// Linear MMSE update of the estimate from one channel output. Erasures leave the
/// state unchanged; until the first success the encoder keeps resending x_{i,0}.
EstimatorState decode_update(EstimatorState st, double r, bool gamma, const ChannelParams& ch);

}  // namespace nclab
