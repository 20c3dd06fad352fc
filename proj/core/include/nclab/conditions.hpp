#pragma once

#include <iosfwd>
#include <vector>

#include "nclab/model.hpp"

namespace nclab {

/// Outcome of the adaptive-TDMA feasibility test: the per-eigenvalue lower bounds on the
/// channel-share fractions and, when they leave slack, one admissible split.
struct AlphaVector {
  std::vector<double> minimum_fractions;
  bool feasible = false;
  std::vector<double> witness;  // empty unless feasible
};

struct NecessityCheck {
  bool holds = true;
  std::vector<int> violating_selection;  // empty when holds
  int v_total = 0;
};

/// Root of the exponential-tilt equation together with its martingale normalizer.
struct ThetaSolution {
  double theta = 0.0;
  double phi = 0.0;
  double drift = 0.0;  // b
  double residual = 0.0;
};

struct RegionCell {
  double ln_l1 = 0.0;
  double ln_l2 = 0.0;
  bool necessary = false;
  bool tdma = false;
  bool adaptive = false;
  bool optimal2d = false;
};

struct RegionReport {
  std::vector<RegionCell> grid;  // ln_l1 ascending, then ln_l2 ascending
  int resolution = 0;
  double ln_max = 0.0;
};

/// Right-hand sides of the four criteria, evaluated at a channel.
namespace threshold {
/// -1/2 ln(eps + (1-eps) delta): single-mode bound, also the fixed-TDMA budget.
double single_mode(const ChannelParams& ch);
/// -ln((1-eps) sqrt(delta) + eps): bound on ln|l1| + ln|l2| for the 2-D family.
double pair_sum(const ChannelParams& ch);
/// -1/2 ln(eps + (1-eps) delta^{1/total_block_size}).
double equal_magnitude(int total_block_size, const ChannelParams& ch);
}  // namespace threshold

/// Conventional (fixed-period) TDMA sufficiency.
bool tdma_sufficient(const SystemSpec& spec, const ChannelParams& ch);

/// Necessary condition, enumerating every multiplicity selection v_i in {0..m_i}.
NecessityCheck necessity_holds(const SystemSpec& spec, const ChannelParams& ch);

/// Adaptive-TDMA sufficiency, solved per coordinate in closed form.
AlphaVector adaptive_feasible(const SystemSpec& spec, const ChannelParams& ch);

/// Smallest-total success quotas (n_1..n_N), lexicographically smallest among ties,
/// such that every coordinate's per-round moment factor contracts.
std::vector<int> quota_search(const SystemSpec& spec, const ChannelParams& ch, int cap = 256);

/// Necessary and sufficient condition for 2-D real systems under the optimal scheduler.
bool optimal2d_condition(double ln_l1, double ln_l2, const ChannelParams& ch);

bool equal_magnitude_condition(double common_ln, int total_block_size, const ChannelParams& ch);

/// E[lambda^{2T}] where T is the number of slots needed for n successes:
/// (lambda^2 (1-eps) / (1 - eps lambda^2))^n.
double expected_round_factor(double ln_l, int n, const ChannelParams& ch);

ThetaSolution solve_theta(double ln_l1, double ln_l2, const ChannelParams& ch);

/// Smallest n_1 <= cap with 2 (delta e^{-2 theta})^{n_1} + rho^{n_1} < 1.
int min_n1_for_contraction(const ThetaSolution& sol, double ln_l1, const ChannelParams& ch, int cap = 1000);

/// Success allocation minimizing sum_i lambda_i^{2t} delta^{n_i} subject to sum n_i = n.
/// Entries may be negative for skewed spectra at large t; no clamping is applied.
std::vector<double> oracle_allocation(const std::vector<double>& ln_ls, long t, double n, const ChannelParams& ch);

/// All four verdicts for the 2-D real system with the given log magnitudes (order-free).
RegionCell classify_cell(double ln_l1, double ln_l2, const ChannelParams& ch);

/// Classifies a resolution x resolution grid over [0, ln_max]^2.
RegionReport region_sweep(const ChannelParams& ch, double ln_max, int resolution);

/// CSV with header `ln_l1,ln_l2,necessary,tdma,adaptive,optimal2d`.
void write_region_csv(std::ostream& os, const RegionReport& report);

}  // namespace nclab
