#include "nclab/sched.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "nclab/error.hpp"

namespace {

using nclab::ChannelParams;
using nclab::Scheduler;
using ::testing::ElementsAre;

const ChannelParams kFig{1.0, 1.0, 0.7};

std::vector<int> owners(Scheduler s, const std::vector<bool>& gammas) {
  std::vector<int> out;
  for (bool g : gammas) {
    out.push_back(s.owner() + 1);
    s.step(g);
  }
  return out;
}

TEST(FixedTdma, Alternation) {
  const std::vector<bool> ones(6, true), zeros(6, false);
  EXPECT_THAT(owners(Scheduler::fixed_tdma({1, 1}), ones), ElementsAre(1, 2, 1, 2, 1, 2));
  EXPECT_THAT(owners(Scheduler::fixed_tdma({2, 1}), ones), ElementsAre(1, 1, 2, 1, 1, 2));
  EXPECT_EQ(owners(Scheduler::fixed_tdma({2, 1}), zeros), owners(Scheduler::fixed_tdma({2, 1}), ones));
}

TEST(FixedTdma, CountsSuccesses) {
  Scheduler s = Scheduler::fixed_tdma({2, 1});
  for (bool g : {true, false, true, true, true, false}) s.step(g);
  EXPECT_THAT(s.state().successes, ElementsAre(3, 1));
  EXPECT_EQ(s.state().round_index, 2);
  EXPECT_THAT(s.state().round_log[0].durations, ElementsAre(2, 1));
}

TEST(AdaptiveTdma, HandTrace) {
  Scheduler s = Scheduler::adaptive_tdma({2, 1});
  EXPECT_THAT(owners(s, {true, false, true, true}), ElementsAre(1, 1, 1, 2));
  bool closed = false;
  for (bool g : {true, false, true, true}) closed = s.step(g);
  EXPECT_TRUE(closed);
  ASSERT_EQ(s.state().round_log.size(), 1u);
  EXPECT_THAT(s.state().round_log[0].durations, ElementsAre(3, 1));
  EXPECT_EQ(s.state().round_log[0].total(), 4);
  EXPECT_EQ(s.owner(), 0);
}

TEST(AdaptiveTdma, ErasureFreeDurationsEqualQuotas) {
  Scheduler s = Scheduler::adaptive_tdma({3, 1, 2});
  for (int k = 0; k < 60; ++k) s.step(true);
  ASSERT_EQ(s.state().round_log.size(), 10u);
  for (const auto& r : s.state().round_log) EXPECT_THAT(r.durations, ElementsAre(3, 1, 2));
}

TEST(AdaptiveTdma, PhaseEndsExactlyAtQuota) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution b(0.4);
  auto st = nclab::make_adaptive_tdma({3, 2});
  for (int k = 0; k < 5000; ++k) {
    const int owner = st.owner;
    const bool g = b(rng);
    const int before = st.phase_successes;
    nclab::adaptive_tdma_step(st, g);
    if (st.owner != owner) {
      EXPECT_EQ(before + 1, st.quotas[static_cast<std::size_t>(owner)]);
      EXPECT_TRUE(g);
    }
    EXPECT_GE(st.owner, 0);
    EXPECT_LT(st.owner, 2);
  }
}

TEST(Optimal2d, CriticalDuration) {
  EXPECT_NEAR(nclab::critical_duration(2, 0.05, 0.03, kFig), 34.657359, 1e-6);
}

TEST(Optimal2d, HandTraceShortPhase2) {
  Scheduler s = Scheduler::optimal2d(2, 0.05, 0.03, kFig);
  // Phase 1: T1 = 3 (success, erasure, success). Phase 2 all successes.
  for (bool g : {true, false, true}) EXPECT_FALSE(s.step(g));
  EXPECT_EQ(s.owner(), 1);
  EXPECT_FALSE(s.step(true));  // S=1 vs 2 - 4*0.0577 = 1.769
  EXPECT_TRUE(s.step(true));   // S=2 vs 1.711
  const auto& r = s.state().last_round;
  EXPECT_THAT(r.durations, ElementsAre(3, 2));
  EXPECT_EQ(r.n2, 2);
  EXPECT_EQ(s.owner(), 0);
}

TEST(Optimal2d, SkipBranchBeyondCriticalDuration) {
  Scheduler s = Scheduler::optimal2d(2, 0.05, 0.03, kFig);
  std::vector<bool> g(35, false);
  g[0] = true;
  g[34] = true;
  bool closed = false;
  for (bool x : g) {
    EXPECT_EQ(s.owner(), 0);
    closed = s.step(x);
  }
  EXPECT_TRUE(closed);
  EXPECT_THAT(s.state().last_round.durations, ElementsAre(35, 0));
  EXPECT_EQ(s.owner(), 0);
}

TEST(Optimal2d, AllFailuresStopWhenTargetTurnsNegative) {
  Scheduler s = Scheduler::optimal2d(2, 0.05, 0.03, kFig);
  for (bool g : {true, false, true}) s.step(g);
  long t2 = 0;
  while (!s.step(false)) ++t2;
  ++t2;
  EXPECT_EQ(t2, 32);
  EXPECT_THAT(s.state().last_round.durations, ElementsAre(3, 32));
  EXPECT_EQ(s.state().last_round.n2, 0);
}

TEST(Optimal2d, FirstCrossingAndBoundedness) {
  const double l1 = 0.05, l2 = 0.03;
  const double slope = 2.0 * (l1 - l2) / std::log(0.5);
  for (int n1 : {1, 2, 5, 10}) {
    const double tc = nclab::critical_duration(n1, l1, l2, kFig);
    Scheduler s = Scheduler::optimal2d(n1, l1, l2, kFig);
    std::mt19937_64 rng(static_cast<unsigned>(n1));
    std::bernoulli_distribution b(0.3);
    // Replay the phase-2 success path to check the crossing slot by slot.
    std::vector<bool> phase2;
    while (s.state().round_index < 3000) {
      const bool in_phase2 = s.owner() == 1;
      const bool g = b(rng);
      if (in_phase2) phase2.push_back(g);
      if (!s.step(g)) continue;
      const auto& r = s.state().last_round;
      if (r.durations[1] == 0) {
        EXPECT_GT(r.durations[0], tc);
        phase2.clear();
        continue;
      }
      EXPECT_LE(r.durations[0], tc);
      EXPECT_LE(r.durations[0] + r.durations[1], std::ceil(tc) + 1);
      EXPECT_GT(r.n2, n1 + r.total() * slope);
      ASSERT_EQ(static_cast<long>(phase2.size()), r.durations[1]);
      int successes = 0;
      for (long t = 1; t < r.durations[1]; ++t) {
        successes += phase2[static_cast<std::size_t>(t - 1)] ? 1 : 0;
        EXPECT_FALSE(successes > n1 + (r.durations[0] + t) * slope);
      }
      phase2.clear();
    }
  }
}

TEST(Optimal2d, RequiresOrderedMagnitudes) {
  EXPECT_THROW(Scheduler::optimal2d(2, 0.03, 0.03, kFig), nclab::Error);
  auto st = nclab::make_optimal2d(2);
  EXPECT_THROW(nclab::optimal2d_step(st, true, 0.03, 0.05, kFig), nclab::Error);
}

TEST(Schedulers, DeterministicInGamma) {
  std::mt19937_64 rng(11);
  std::bernoulli_distribution b(0.45);
  std::vector<bool> g(4000);
  for (auto&& x : g) x = b(rng);
  for (int rep = 0; rep < 2; ++rep) {
    EXPECT_EQ(owners(Scheduler::adaptive_tdma({2, 1}), g), owners(Scheduler::adaptive_tdma({2, 1}), g));
    EXPECT_EQ(owners(Scheduler::optimal2d(4, 0.05, 0.03, kFig), g),
              owners(Scheduler::optimal2d(4, 0.05, 0.03, kFig), g));
  }
}

TEST(Schedulers, StepKindMismatch) {
  auto st = nclab::make_fixed_tdma({1, 1});
  EXPECT_THROW(nclab::adaptive_tdma_step(st, true), nclab::Error);
  EXPECT_THROW(nclab::make_adaptive_tdma({0, 1}), nclab::Error);
}

TEST(Schedulers, KindNames) {
  for (auto k : {nclab::SchedulerKind::FixedTdma, nclab::SchedulerKind::AdaptiveTdma, nclab::SchedulerKind::Optimal2d}) {
    EXPECT_EQ(nclab::scheduler_kind_from_string(nclab::to_string(k)), k);
  }
  EXPECT_THROW(nclab::scheduler_kind_from_string("round_robin"), nclab::Error);
}

TEST(RoundLog, CsvLayouts) {
  Scheduler a = Scheduler::adaptive_tdma({2, 1});
  for (bool g : {true, false, true, true}) a.step(g);
  std::ostringstream os;
  nclab::write_round_log_csv(os, a.state());
  EXPECT_EQ(os.str(), "round,T_1,T_2\n1,3,1\n");

  Scheduler o = Scheduler::optimal2d(2, 0.05, 0.03, kFig);
  for (bool g : {true, false, true, true, true}) o.step(g);
  std::ostringstream os2;
  nclab::write_round_log_csv(os2, o.state());
  EXPECT_EQ(os2.str(), "round,T1,T2,n2\n1,3,2,2\n");
}

}  // namespace
