#include "nclab/codec.hpp"

#include <cmath>

namespace nclab {

EstimatorState EstimatorState::fresh(int index, double prior_var) {
  EstimatorState st;
  st.coordinate_index = index;
  st.prior_var = prior_var;
  st.error_var = prior_var;
  return st;
}

double encode(const EstimatorState& st, double x0_i, const ChannelParams& ch) {
  if (!st.initialized) return std::sqrt(ch.power / st.prior_var) * x0_i;
  return std::sqrt(ch.power / st.error_var) * (st.estimate - x0_i);
}

EstimatorState decode_update(EstimatorState st, double r, bool gamma, const ChannelParams& ch) {
  if (!gamma) return st;

  if (!st.initialized) {
    st.estimate = std::sqrt(st.prior_var / ch.power) * r;
    st.error_var = st.prior_var * ch.noise_var / ch.power;
    st.success_count = 1;
    st.initialized = true;
    return st;
  }

  // kappa = E[r e] / E[r^2] with r = sqrt(P / var) e + n.
  const double kappa = std::sqrt(ch.power * st.error_var) / (ch.power + ch.noise_var);
  st.estimate -= kappa * r;
  st.error_var *= delta(ch);
  ++st.success_count;
  return st;
}

}  // namespace nclab
