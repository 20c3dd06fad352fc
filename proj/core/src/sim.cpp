#include "nclab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <locale>
#include <ostream>
#include <random>
#include <string>

#include "nclab/channel.hpp"
#include "nclab/codec.hpp"
#include "nclab/control.hpp"
#include "nclab/error.hpp"
#include "nclab/parallel.hpp"

namespace nclab {

namespace {

constexpr std::uint64_t kInitialStateStream = 0x58304958ULL;  // "X0IX"
constexpr std::uint64_t kMaxChunks = 64;

struct Chunk {
  std::uint64_t seed;
  long count;
};

// Fixed partition of i.i.d. work into seeded chunks; independent of the thread count.
std::vector<Chunk> split_work(long total, std::uint64_t seed) {
  const auto chunks = static_cast<long>(std::min<std::uint64_t>(kMaxChunks, static_cast<std::uint64_t>(total)));
  std::vector<Chunk> out;
  for (long c = 0; c < chunks; ++c) {
    out.push_back(Chunk{mix_seed(seed, static_cast<std::uint64_t>(c)), total / chunks + (c < total % chunks ? 1 : 0)});
  }
  return out;
}

template <typename T>
std::vector<T> concat(std::vector<std::vector<T>>& parts) {
  std::vector<T> out;
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  out.reserve(n);
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

void require_simulable(const SystemSpec& spec) {
  for (const auto& b : spec.blocks) {
    if (b.is_complex || b.algebraic_multiplicity != 1) {
      throw Error(ErrorKind::UnsupportedSystem, "simulation supports real eigenvalues of multiplicity one only");
    }
  }
  const auto& a = spec.a_matrix;
  if (a.rows() != spec.state_dim() || !a.isApprox(Eigen::MatrixXd(a.diagonal().asDiagonal()), 0.0)) {
    throw Error(ErrorKind::UnsupportedSystem, "simulation requires a diagonal A");
  }
}

}  // namespace

MomentEstimate estimate_moment(std::span<const double> values) {
  MomentEstimate est;
  est.samples = static_cast<long>(values.size());
  if (values.empty()) return est;
  est.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) return est;
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(), [&](double v) { return (v - est.mean) * (v - est.mean); });
  const double var = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
  est.std_error = std::sqrt(var / static_cast<double>(values.size()));
  return est;
}

Scheduler make_scheduler(const SchedulerConfig& cfg, const std::vector<double>& ln_ls, const ChannelParams& ch) {
  switch (cfg.kind) {
    case SchedulerKind::FixedTdma: {
      std::vector<int> budgets = cfg.quotas.empty() ? std::vector<int>(ln_ls.size(), 1) : cfg.quotas;
      if (budgets.size() != ln_ls.size()) throw Error(ErrorKind::ConfigError, "one budget per coordinate required");
      return Scheduler::fixed_tdma(std::move(budgets));
    }
    case SchedulerKind::AdaptiveTdma:
      if (cfg.quotas.size() != ln_ls.size()) throw Error(ErrorKind::ConfigError, "one quota per coordinate required");
      return Scheduler::adaptive_tdma(cfg.quotas);
    case SchedulerKind::Optimal2d:
      if (ln_ls.size() != 2) throw Error(ErrorKind::ConfigError, "optimal2d needs exactly two coordinates");
      if (cfg.quotas.size() != 1) throw Error(ErrorKind::ConfigError, "optimal2d takes a single quota n_1");
      return Scheduler::optimal2d(cfg.quotas.front(), ln_ls[0], ln_ls[1], ch);
  }
  throw Error(ErrorKind::ConfigError, "unknown scheduler kind");
}

double SimTrace::moment(std::size_t coordinate, std::size_t k) const {
  return std::exp(per_coordinate_log_moment.at(coordinate).at(k));
}

SimTrace run_closed_loop(const ClosedLoopConfig& cfg, long horizon, std::uint64_t seed) {
  const SystemSpec& spec = cfg.system;
  const ChannelParams& ch = cfg.channel;
  require_simulable(spec);
  if (horizon < 0 || horizon > kMaxHorizon) {
    throw Error(ErrorKind::ConfigError, "horizon must lie in [0, " + std::to_string(kMaxHorizon) + "]");
  }

  const Eigen::Index n = spec.state_dim();
  const auto dim = static_cast<std::size_t>(n);
  std::vector<double> ln_ls(dim);
  for (Eigen::Index i = 0; i < n; ++i) ln_ls[static_cast<std::size_t>(i)] = std::log(std::abs(spec.a_matrix(i, i)));
  const double ln_delta = std::log(delta(ch));

  Scheduler scheduler = make_scheduler(cfg.scheduler, ln_ls, ch);
  scheduler.state().keep_log = false;
  if (scheduler.state().pairs() != n) throw Error(ErrorKind::ConfigError, "scheduler pairs must match state dim");

  Eigen::RowVectorXd gain = cfg.gain ? *cfg.gain : deadbeat_gain(spec);
  if (cfg.gain) check_gain(spec, gain);

  std::mt19937_64 init_rng(mix_seed(seed, kInitialStateStream));
  std::normal_distribution<double> standard(0.0, 1.0);
  Eigen::VectorXd white(n);
  for (Eigen::Index i = 0; i < n; ++i) white(i) = standard(init_rng);
  const Eigen::MatrixXd chol = spec.initial_covariance.llt().matrixL();
  const Eigen::VectorXd x0 = chol * white;

  ChannelInstance channel(ch, seed);
  std::vector<EstimatorState> codecs;
  for (Eigen::Index i = 0; i < n; ++i) {
    codecs.push_back(EstimatorState::fresh(static_cast<int>(i), spec.initial_covariance(i, i)));
  }
  ControllerState controller = ControllerState::start(spec, gain);

  SimTrace trace;
  trace.seed = seed;
  const auto len = static_cast<std::size_t>(horizon + 1);
  trace.times.reserve(len);
  trace.state_sq_norm.reserve(len);
  trace.per_coordinate_log_moment.assign(dim, {});
  for (auto& m : trace.per_coordinate_log_moment) m.reserve(len);

  Eigen::VectorXd x = x0;
  Eigen::VectorXd estimate = Eigen::VectorXd::Zero(n);
  auto record = [&](long t) {
    trace.times.push_back(t);
    trace.state_sq_norm.push_back(trace.diverged ? std::numeric_limits<double>::infinity() : x.squaredNorm());
    const auto& succ = scheduler.state().successes;
    for (std::size_t i = 0; i < dim; ++i) {
      trace.per_coordinate_log_moment[i].push_back(2.0 * static_cast<double>(t) * ln_ls[i] +
                                                   static_cast<double>(succ[i]) * ln_delta);
    }
  };
  record(0);

  for (long t = 0; t < horizon; ++t) {
    const auto owner = static_cast<std::size_t>(scheduler.owner());
    const double s = encode(codecs[owner], x0(static_cast<Eigen::Index>(owner)), ch);
    const Reception rx = channel.transmit(s);
    codecs[owner] = decode_update(codecs[owner], rx.r, rx.gamma, ch);
    scheduler.step(rx.gamma);

    if (!trace.diverged) {
      estimate(static_cast<Eigen::Index>(owner)) = codecs[owner].estimate;
      const ControlOutput out = control_step(controller, estimate, spec);
      x = spec.a_matrix * x + spec.input_vector * out.u;
      if (out.overflow || !x.allFinite() || x.norm() > kDivergenceNorm) trace.diverged = true;
    }
    record(t + 1);
  }
  return trace;
}

std::vector<long> default_checkpoints(long horizon) {
  const long step = std::max(1L, horizon / 20);
  std::vector<long> out;
  for (long t = 0; t <= horizon; t += step) out.push_back(t);
  if (out.back() != horizon) out.push_back(horizon);
  return out;
}

DecayCurves montecarlo_moments(const ClosedLoopConfig& cfg, long trials, long horizon, std::uint64_t master_seed,
                               std::vector<long> checkpoints) {
  if (trials < 1) throw Error(ErrorKind::ConfigError, "trials must be >= 1");
  if (checkpoints.empty()) checkpoints = default_checkpoints(horizon);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  for (long t : checkpoints) {
    if (t < 0 || t > horizon) throw Error(ErrorKind::ConfigError, "checkpoint outside [0, horizon]");
  }

  const std::size_t dim = static_cast<std::size_t>(cfg.system.state_dim());
  const std::size_t cps = checkpoints.size();
  const auto count = static_cast<std::size_t>(trials);

  // [trial][checkpoint] slots, written independently per trial.
  std::vector<std::vector<double>> moments(dim, std::vector<double>(count * cps));
  std::vector<double> sq_norm(count * cps);
  std::vector<double> diverged(count * cps);

  parallel_for(count, [&](std::size_t k) {
    const SimTrace tr = run_closed_loop(cfg, horizon, mix_seed(master_seed, k));
    for (std::size_t c = 0; c < cps; ++c) {
      const auto idx = static_cast<std::size_t>(checkpoints[c]);
      for (std::size_t i = 0; i < dim; ++i) moments[i][k * cps + c] = std::exp(tr.per_coordinate_log_moment[i][idx]);
      sq_norm[k * cps + c] = tr.state_sq_norm[idx];
      diverged[k * cps + c] = std::isfinite(tr.state_sq_norm[idx]) ? 0.0 : 1.0;
    }
  });

  DecayCurves out;
  out.checkpoints = checkpoints;
  out.trials = trials;
  out.mean_moment.assign(dim, std::vector<double>(cps));
  out.mean_sq_norm.resize(cps);
  out.diverged_fraction.resize(cps);

  std::vector<double> column(count);
  auto column_mean = [&](const std::vector<double>& src, std::size_t c) {
    for (std::size_t k = 0; k < count; ++k) column[k] = src[k * cps + c];
    return pairwise_sum(column) / static_cast<double>(count);
  };
  for (std::size_t c = 0; c < cps; ++c) {
    for (std::size_t i = 0; i < dim; ++i) out.mean_moment[i][c] = column_mean(moments[i], c);
    out.mean_sq_norm[c] = column_mean(sq_norm, c);
    out.diverged_fraction[c] = column_mean(diverged, c);
  }

  for (std::size_t i = 0; i < dim; ++i) {
    double st = 0, sy = 0, stt = 0, sty = 0, m = 0;
    for (std::size_t c = 0; c < cps; ++c) {
      const double y = out.mean_moment[i][c];
      if (!(y > 0.0) || !std::isfinite(y)) continue;
      const double t = static_cast<double>(checkpoints[c]);
      const double ly = std::log(y);
      st += t;
      sy += ly;
      stt += t * t;
      sty += t * ly;
      m += 1;
    }
    const double denom = m * stt - st * st;
    out.slope.push_back(m >= 2 && denom > 0 ? (m * sty - st * sy) / denom : 0.0);
  }
  return out;
}

void write_decay_csv(std::ostream& os, const DecayCurves& curves) {
  const auto old_locale = os.imbue(std::locale::classic());
  const auto old_precision = os.precision(17);
  os << 't';
  for (std::size_t i = 0; i < curves.mean_moment.size(); ++i) os << ",mean_moment_" << i + 1;
  os << ",mean_sq_norm,diverged_fraction\n";
  for (std::size_t c = 0; c < curves.checkpoints.size(); ++c) {
    os << curves.checkpoints[c];
    for (const auto& m : curves.mean_moment) os << ',' << m[c];
    os << ',' << curves.mean_sq_norm[c] << ',' << curves.diverged_fraction[c] << '\n';
  }
  os.precision(old_precision);
  os.imbue(old_locale);
}

SchedulerMoments scheduler_moment_mc(const SchedulerConfig& cfg, const std::vector<double>& ln_ls,
                                     const ChannelParams& ch, long rounds, std::uint64_t seed) {
  if (rounds < 1) throw Error(ErrorKind::ConfigError, "rounds must be >= 1");
  validate_channel(ch);
  const double ln_delta = std::log(delta(ch));
  const std::size_t pairs = ln_ls.size();
  const std::vector<Chunk> chunks = split_work(rounds, seed);

  struct Partial {
    std::vector<std::vector<double>> round_values;
    std::vector<std::vector<double>> phase_values;
    std::vector<std::vector<long>> histogram;
    long skipped = 0;
  };
  std::vector<Partial> parts(chunks.size());

  parallel_for(chunks.size(), [&](std::size_t c) {
    Partial& part = parts[c];
    part.round_values.assign(pairs, {});
    part.phase_values.assign(pairs, {});
    part.histogram.assign(pairs, {});

    Scheduler sched = make_scheduler(cfg, ln_ls, ch);
    sched.state().keep_log = false;
    ChannelInstance channel(ch, chunks[c].seed);

    std::vector<long> start = sched.state().successes;
    for (long done = 0; done < chunks[c].count;) {
      if (!sched.step(channel.draw_erasure_outcome())) continue;
      ++done;
      const auto& st = sched.state();
      const RoundRecord& r = st.last_round;
      const double total = static_cast<double>(r.total());
      for (std::size_t i = 0; i < pairs; ++i) {
        const auto gained = static_cast<double>(st.successes[i] - start[i]);
        part.round_values[i].push_back(std::exp(2.0 * ln_ls[i] * total + gained * ln_delta));
        const long d = r.durations[i];
        if (d == 0) continue;
        part.phase_values[i].push_back(std::exp(2.0 * ln_ls[i] * static_cast<double>(d)));
        auto& h = part.histogram[i];
        if (h.size() <= static_cast<std::size_t>(d)) h.resize(static_cast<std::size_t>(d) + 1, 0);
        ++h[static_cast<std::size_t>(d)];
      }
      if (st.kind == SchedulerKind::Optimal2d && r.durations[1] == 0) ++part.skipped;
      start = st.successes;
    }
  });

  SchedulerMoments out;
  out.rounds = rounds;
  out.duration_histogram.assign(pairs, {});
  for (std::size_t i = 0; i < pairs; ++i) {
    std::vector<std::vector<double>> rv, pv;
    for (auto& p : parts) {
      rv.push_back(std::move(p.round_values[i]));
      pv.push_back(std::move(p.phase_values[i]));
      auto& h = out.duration_histogram[i];
      if (h.size() < p.histogram[i].size()) h.resize(p.histogram[i].size(), 0);
      for (std::size_t d = 0; d < p.histogram[i].size(); ++d) h[d] += p.histogram[i][d];
    }
    out.round_moment.push_back(estimate_moment(concat(rv)));
    out.phase_moment.push_back(estimate_moment(concat(pv)));
  }
  for (const auto& p : parts) out.skipped_phase2 += p.skipped;
  return out;
}

MartingaleProbe martingale_probe(const ThetaSolution& sol, const ChannelParams& ch, long samples, std::uint64_t seed,
                                 std::optional<StoppingEpisodes> episodes) {
  if (samples < 1) throw Error(ErrorKind::ConfigError, "samples must be >= 1");
  validate_channel(ch);

  MartingaleProbe out;
  {
    const std::vector<Chunk> chunks = split_work(samples, mix_seed(seed, 1));
    std::vector<std::vector<double>> parts(chunks.size());
    parallel_for(chunks.size(), [&](std::size_t c) {
      ChannelInstance channel(ch, chunks[c].seed);
      auto& v = parts[c];
      v.reserve(static_cast<std::size_t>(chunks[c].count));
      for (long k = 0; k < chunks[c].count; ++k) {
        const double gamma = channel.draw_erasure_outcome() ? 1.0 : 0.0;
        v.push_back(std::exp(sol.theta * gamma + sol.drift));
      }
    });
    out.one_step = estimate_moment(concat(parts));
  }

  if (episodes && episodes->episodes > 0) {
    const StoppingEpisodes ep = *episodes;
    const std::vector<Chunk> chunks = split_work(ep.episodes, mix_seed(seed, 2));
    std::vector<std::vector<double>> parts(chunks.size());
    parallel_for(chunks.size(), [&](std::size_t c) {
      Scheduler sched = Scheduler::optimal2d(ep.n1, ep.ln_l1, ep.ln_l2, ch);
      sched.state().keep_log = false;
      ChannelInstance channel(ch, chunks[c].seed);
      auto& v = parts[c];
      while (static_cast<long>(v.size()) < chunks[c].count) {
        if (!sched.step(channel.draw_erasure_outcome())) continue;
        const RoundRecord& r = sched.state().last_round;
        const long t2 = r.durations[1];
        if (t2 == 0) continue;  // phase 2 skipped: not a stopping episode
        v.push_back(std::exp(sol.theta * r.n2 + sol.drift * static_cast<double>(t2)));
      }
    });
    out.stopped = estimate_moment(concat(parts));
  }
  return out;
}

}  // namespace nclab
