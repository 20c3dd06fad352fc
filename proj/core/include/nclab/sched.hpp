#pragma once

#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "nclab/model.hpp"

namespace nclab {

enum class SchedulerKind { FixedTdma, AdaptiveTdma, Optimal2d };

std::string_view to_string(SchedulerKind kind) noexcept;
SchedulerKind scheduler_kind_from_string(std::string_view name);

struct RoundRecord {
  std::vector<long> durations;  // T_k^i per pair; {T_k^1, T_k^2} for optimal2d
  int n2 = 0;                   // successes collected by pair 2 (optimal2d only)

  long total() const noexcept {
    long t = 0;
    for (long d : durations) t += d;
    return t;
  }
};

/// Slot-ownership state machine. `owner` is the pair that transmits in the next slot;
/// each step consumes that slot's erasure outcome.
struct SchedulerState {
  SchedulerKind kind = SchedulerKind::AdaptiveTdma;
  int owner = 0;
  long round_index = 0;  // completed rounds
  long phase_elapsed = 0;
  int phase_successes = 0;
  /// Slot budgets (fixed), success quotas (adaptive) or {n_1} (optimal2d).
  std::vector<int> quotas;
  std::vector<long> successes;  // n_i^t: receptions per pair so far
  std::vector<long> current_round;
  RoundRecord last_round;
  std::vector<RoundRecord> round_log;
  bool keep_log = true;
  long slot = 0;

  int pairs() const noexcept { return static_cast<int>(successes.size()); }
};

SchedulerState make_fixed_tdma(std::vector<int> budgets);
SchedulerState make_adaptive_tdma(std::vector<int> quotas);
SchedulerState make_optimal2d(int n1);

/// Each returns true when the slot closed a round.
bool fixed_tdma_step(SchedulerState& st, bool gamma);
bool adaptive_tdma_step(SchedulerState& st, bool gamma);
bool optimal2d_step(SchedulerState& st, bool gamma, double ln_l1, double ln_l2, const ChannelParams& ch);

/// Phase-1 duration beyond which optimal2d skips pair 2: n_1 ln delta / (2 (ln l2 - ln l1)).
double critical_duration(int n1, double ln_l1, double ln_l2, const ChannelParams& ch);

/// Bundles a state with the parameters its step function needs.
class Scheduler {
 public:
  static Scheduler fixed_tdma(std::vector<int> budgets);
  static Scheduler adaptive_tdma(std::vector<int> quotas);
  static Scheduler optimal2d(int n1, double ln_l1, double ln_l2, const ChannelParams& ch);

  int owner() const noexcept { return state_.owner; }
  bool step(bool gamma);

  const SchedulerState& state() const noexcept { return state_; }
  SchedulerState& state() noexcept { return state_; }

 private:
  explicit Scheduler(SchedulerState st) : state_(std::move(st)) {}

  SchedulerState state_;
  double ln_l1_ = 0.0;
  double ln_l2_ = 0.0;
  ChannelParams ch_;
};

/// `round,T1,T2,n2` for optimal2d; `round,T_1,...,T_N` otherwise.
void write_round_log_csv(std::ostream& os, const SchedulerState& st);

}  // namespace nclab
