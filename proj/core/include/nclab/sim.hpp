#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nclab/conditions.hpp"
#include "nclab/model.hpp"
#include "nclab/sched.hpp"

namespace nclab {

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

/// Two-pass estimate with pairwise sums; std_error = sample std / sqrt(samples).
MomentEstimate estimate_moment(std::span<const double> values);

struct SchedulerConfig {
  SchedulerKind kind = SchedulerKind::AdaptiveTdma;
  /// Budgets (fixed_tdma), success quotas (adaptive_tdma) or {n_1} (optimal2d).
  std::vector<int> quotas;
};

/// Builds the state machine for the given per-coordinate log magnitudes.
Scheduler make_scheduler(const SchedulerConfig& cfg, const std::vector<double>& ln_ls, const ChannelParams& ch);

inline constexpr long kMaxHorizon = 10000;
inline constexpr double kDivergenceNorm = 1e9;

/// One closed-loop trajectory, sampled at t = 0..horizon.
struct SimTrace {
  std::vector<long> times;
  std::vector<double> state_sq_norm;  // +inf once the trial diverged
  /// ln(lambda_i^{2t} delta^{n_i^t}) per coordinate, per time.
  std::vector<std::vector<double>> per_coordinate_log_moment;
  bool diverged = false;
  std::uint64_t seed = 0;

  double moment(std::size_t coordinate, std::size_t k) const;
};

struct ClosedLoopConfig {
  SystemSpec system;  // validated, real diagonal A
  ChannelParams channel;
  SchedulerConfig scheduler;
  std::optional<Eigen::RowVectorXd> gain;  // deadbeat when empty
};

/// Plant, encoders, channel, decoders and controller stepped together for `horizon` slots.
SimTrace run_closed_loop(const ClosedLoopConfig& cfg, long horizon, std::uint64_t seed);

struct DecayCurves {
  std::vector<long> checkpoints;
  std::vector<std::vector<double>> mean_moment;  // [coordinate][checkpoint]
  std::vector<double> mean_sq_norm;
  std::vector<double> diverged_fraction;
  std::vector<double> slope;  // least-squares slope of ln(mean_moment) against t
  long trials = 0;
};

/// Default checkpoint grid: every max(1, horizon/20) slots, always ending at horizon.
std::vector<long> default_checkpoints(long horizon);

/// Trial-averaged lambda_i^{2t} delta^{n_i^t}; trial k uses seed mix_seed(master_seed, k).
DecayCurves montecarlo_moments(const ClosedLoopConfig& cfg, long trials, long horizon, std::uint64_t master_seed,
                               std::vector<long> checkpoints = {});

/// `t,mean_moment_1,...,mean_moment_N,mean_sq_norm,diverged_fraction`.
void write_decay_csv(std::ostream& os, const DecayCurves& curves);

struct SchedulerMoments {
  /// E[lambda_i^{2 T^t} delta^{successes of pair i in the round}] per pair.
  std::vector<MomentEstimate> round_moment;
  /// E[lambda_i^{2 T^i}] over pair i's own phase (phases with T^i = 0 excluded).
  std::vector<MomentEstimate> phase_moment;
  /// Count of phases of each duration, per pair: histogram[i][d].
  std::vector<std::vector<long>> duration_histogram;
  long rounds = 0;
  long skipped_phase2 = 0;  // optimal2d rounds that never handed over to pair 2
};

/// Erasure-only replay of `rounds` i.i.d. scheduler rounds.
SchedulerMoments scheduler_moment_mc(const SchedulerConfig& cfg, const std::vector<double>& ln_ls,
                                     const ChannelParams& ch, long rounds, std::uint64_t seed);

struct StoppingEpisodes {
  int n1 = 1;
  double ln_l1 = 0.0;
  double ln_l2 = 0.0;
  long episodes = 0;
};

struct MartingaleProbe {
  MomentEstimate one_step;                 // E[exp(theta gamma + b)]
  std::optional<MomentEstimate> stopped;   // E[exp(theta S + b T^2)] at the phase-2 stop
};

MartingaleProbe martingale_probe(const ThetaSolution& sol, const ChannelParams& ch, long samples, std::uint64_t seed,
                                 std::optional<StoppingEpisodes> episodes = std::nullopt);

}  // namespace nclab
