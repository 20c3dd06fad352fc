#include "nclab/sched.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "nclab/error.hpp"

namespace nclab {

std::string_view to_string(SchedulerKind kind) noexcept {
  switch (kind) {
    case SchedulerKind::FixedTdma: return "fixed_tdma";
    case SchedulerKind::AdaptiveTdma: return "adaptive_tdma";
    case SchedulerKind::Optimal2d: return "optimal2d";
  }
  return "unknown";
}

SchedulerKind scheduler_kind_from_string(std::string_view name) {
  if (name == "fixed_tdma") return SchedulerKind::FixedTdma;
  if (name == "adaptive_tdma") return SchedulerKind::AdaptiveTdma;
  if (name == "optimal2d") return SchedulerKind::Optimal2d;
  throw Error(ErrorKind::ConfigError, "unknown scheduler kind '" + std::string(name) + "'");
}

namespace {

SchedulerState make_state(SchedulerKind kind, std::vector<int> quotas, int pairs) {
  if (quotas.empty()) throw Error(ErrorKind::ConfigError, "scheduler needs at least one pair");
  for (int q : quotas) {
    if (q < 1) throw Error(ErrorKind::ConfigError, "quotas and budgets must be >= 1");
  }
  SchedulerState st;
  st.kind = kind;
  st.quotas = std::move(quotas);
  st.successes.assign(static_cast<std::size_t>(pairs), 0);
  return st;
}

void close_round(SchedulerState& st, int n2) {
  st.last_round = RoundRecord{std::move(st.current_round), n2};
  st.current_round.clear();
  if (st.keep_log) st.round_log.push_back(st.last_round);
  ++st.round_index;
}

// Shared by fixed and adaptive TDMA: close the owner's phase and hand over.
bool end_phase_round_robin(SchedulerState& st) {
  st.current_round.push_back(st.phase_elapsed);
  st.phase_elapsed = 0;
  st.phase_successes = 0;
  st.owner = (st.owner + 1) % st.pairs();
  if (st.owner != 0) return false;
  close_round(st, 0);
  return true;
}

void check_kind(const SchedulerState& st, SchedulerKind kind) {
  if (st.kind != kind) {
    throw Error(ErrorKind::ConfigError,
                "step for " + std::string(to_string(kind)) + " called on " + std::string(to_string(st.kind)));
  }
}

}  // namespace

SchedulerState make_fixed_tdma(std::vector<int> budgets) {
  const int pairs = static_cast<int>(budgets.size());
  return make_state(SchedulerKind::FixedTdma, std::move(budgets), pairs);
}

SchedulerState make_adaptive_tdma(std::vector<int> quotas) {
  const int pairs = static_cast<int>(quotas.size());
  return make_state(SchedulerKind::AdaptiveTdma, std::move(quotas), pairs);
}

SchedulerState make_optimal2d(int n1) { return make_state(SchedulerKind::Optimal2d, {n1}, 2); }

bool fixed_tdma_step(SchedulerState& st, bool gamma) {
  check_kind(st, SchedulerKind::FixedTdma);
  ++st.slot;
  ++st.phase_elapsed;
  if (gamma) {
    ++st.phase_successes;
    ++st.successes[static_cast<std::size_t>(st.owner)];
  }
  if (st.phase_elapsed < st.quotas[static_cast<std::size_t>(st.owner)]) return false;
  return end_phase_round_robin(st);
}

bool adaptive_tdma_step(SchedulerState& st, bool gamma) {
  check_kind(st, SchedulerKind::AdaptiveTdma);
  ++st.slot;
  ++st.phase_elapsed;
  if (gamma) {
    ++st.phase_successes;
    ++st.successes[static_cast<std::size_t>(st.owner)];
  }
  if (st.phase_successes < st.quotas[static_cast<std::size_t>(st.owner)]) return false;
  return end_phase_round_robin(st);
}

double critical_duration(int n1, double ln_l1, double ln_l2, const ChannelParams& ch) {
  return n1 * std::log(delta(ch)) / (2.0 * (ln_l2 - ln_l1));
}

bool optimal2d_step(SchedulerState& st, bool gamma, double ln_l1, double ln_l2, const ChannelParams& ch) {
  check_kind(st, SchedulerKind::Optimal2d);
  if (!(ln_l1 > ln_l2)) throw Error(ErrorKind::ConfigError, "optimal2d requires ln_l1 > ln_l2");

  const int n1 = st.quotas.front();
  // 2 (ln l1 - ln l2) / ln delta < 0: the per-slot drift of the pair-2 target.
  const double slope = 2.0 * (ln_l1 - ln_l2) / std::log(delta(ch));

  ++st.slot;
  ++st.phase_elapsed;
  if (gamma) {
    ++st.phase_successes;
    ++st.successes[static_cast<std::size_t>(st.owner)];
  }

  if (st.owner == 0) {
    if (st.phase_successes < n1) return false;
    const long t1 = st.phase_elapsed;
    st.current_round = {t1};
    st.phase_elapsed = 0;
    st.phase_successes = 0;
    if (n1 + static_cast<double>(t1) * slope > 0.0) {
      st.owner = 1;
      return false;
    }
    st.current_round.push_back(0);
    close_round(st, 0);
    return true;
  }

  const long t1 = st.current_round.front();
  const long t2 = st.phase_elapsed;
  if (!(st.phase_successes > n1 + static_cast<double>(t1 + t2) * slope)) return false;

  const int n2 = st.phase_successes;
  st.current_round.push_back(t2);
  st.phase_elapsed = 0;
  st.phase_successes = 0;
  st.owner = 0;
  close_round(st, n2);
  return true;
}

Scheduler Scheduler::fixed_tdma(std::vector<int> budgets) { return Scheduler(make_fixed_tdma(std::move(budgets))); }

Scheduler Scheduler::adaptive_tdma(std::vector<int> quotas) {
  return Scheduler(make_adaptive_tdma(std::move(quotas)));
}

Scheduler Scheduler::optimal2d(int n1, double ln_l1, double ln_l2, const ChannelParams& ch) {
  if (!(ln_l1 > ln_l2)) throw Error(ErrorKind::ConfigError, "optimal2d requires ln_l1 > ln_l2");
  Scheduler s(make_optimal2d(n1));
  s.ln_l1_ = ln_l1;
  s.ln_l2_ = ln_l2;
  s.ch_ = ch;
  return s;
}

bool Scheduler::step(bool gamma) {
  switch (state_.kind) {
    case SchedulerKind::FixedTdma: return fixed_tdma_step(state_, gamma);
    case SchedulerKind::AdaptiveTdma: return adaptive_tdma_step(state_, gamma);
    case SchedulerKind::Optimal2d: return optimal2d_step(state_, gamma, ln_l1_, ln_l2_, ch_);
  }
  return false;
}

void write_round_log_csv(std::ostream& os, const SchedulerState& st) {
  if (st.kind == SchedulerKind::Optimal2d) {
    os << "round,T1,T2,n2\n";
    for (std::size_t k = 0; k < st.round_log.size(); ++k) {
      const auto& r = st.round_log[k];
      os << k + 1 << ',' << r.durations.at(0) << ',' << r.durations.at(1) << ',' << r.n2 << '\n';
    }
    return;
  }
  os << "round";
  for (int i = 1; i <= st.pairs(); ++i) os << ",T_" << i;
  os << '\n';
  for (std::size_t k = 0; k < st.round_log.size(); ++k) {
    os << k + 1;
    for (long d : st.round_log[k].durations) os << ',' << d;
    os << '\n';
  }
}

}  // namespace nclab
