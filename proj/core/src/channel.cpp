#include "nclab/channel.hpp"

#include <cmath>

#include "nclab/error.hpp"
#include "nclab/parallel.hpp"

namespace nclab {

namespace {
constexpr std::uint64_t kErasureStream = 0x45524153ULL;  // "ERAS"
constexpr std::uint64_t kNoiseStream = 0x4E4F4953ULL;    // "NOIS"
}  // namespace

ChannelInstance::ChannelInstance(const ChannelParams& params, std::uint64_t seed)
    : params_(params),
      erasure_rng_(mix_seed(seed, kErasureStream)),
      noise_rng_(mix_seed(seed, kNoiseStream)),
      success_(1.0 - params.drop_prob),
      noise_(0.0, std::sqrt(params.noise_var)) {
  validate_channel(params);
}

bool ChannelInstance::draw_erasure_outcome() { return success_(erasure_rng_); }

Reception ChannelInstance::transmit(double s) {
  const bool gamma = draw_erasure_outcome();
  const double n = noise_(noise_rng_);
  power_sum_ += s * s;
  ++slots_;
  return Reception{gamma ? s + n : n, gamma};
}

PowerAudit ChannelInstance::power_audit() const {
  if (slots_ == 0) throw Error(ErrorKind::EmptyAudit, "no slots transmitted");
  return PowerAudit{power_sum_ / static_cast<double>(slots_), slots_};
}

}  // namespace nclab
