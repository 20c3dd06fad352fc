#include "cli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/config.hpp"
#include "nclab/channel.hpp"
#include "nclab/conditions.hpp"
#include "nclab/error.hpp"
#include "nclab/sched.hpp"
#include "nclab/sim.hpp"

namespace nclab::cli {

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::optional<double> eps;
  std::optional<double> power;
  std::optional<double> noise;
  std::vector<double> ln;
  std::string out_path;
  std::string format;
  std::string kind;
  std::optional<int> n1;
};

void add_channel_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--eps", o.eps, "Erasure probability in [0, 1)");
  cmd->add_option("--power", o.power, "Average channel input power P");
  cmd->add_option("--noise", o.noise, "Channel noise variance");
}

void add_system_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--ln", o.ln, "Log magnitudes of a real diagonal system (instead of --config)");
}

void add_scheduler_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--kind", o.kind, "Scheduler: fixed_tdma, adaptive_tdma or optimal2d")
      ->check(CLI::IsMember({"fixed_tdma", "adaptive_tdma", "optimal2d"}));
  cmd->add_option("--n1", o.n1, "Phase-1 success quota for optimal2d (derived when omitted)")
      ->check(CLI::PositiveNumber);
}

void add_output_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--out", o.out_path, "Output file (default: stdout)");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

ChannelParams channel_from_flags(const CommonOptions& o, ChannelParams base) {
  if (o.eps) base.drop_prob = *o.eps;
  if (o.power) base.power = *o.power;
  if (o.noise) base.noise_var = *o.noise;
  try {
    validate_channel(base);
  } catch (const Error& e) {
    throw ConfigError(ConfigErrorKind::ValidationError, "channel", e.what());
  }
  return base;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigErrorKind::ParseError, path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_run_config(const CommonOptions& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) {
    cfg = parse_config(read_file(o.config_path));
    if (!o.ln.empty()) throw ConfigError(ConfigErrorKind::SchemaError, "--ln", "cannot be combined with --config");
  } else if (!o.ln.empty()) {
    cfg = config_from_parameters(o.ln, ChannelParams{});
  } else {
    throw ConfigError(ConfigErrorKind::SchemaError, "system", "either --config or --ln is required");
  }
  const ChannelParams ch = channel_from_flags(o, cfg.channel);
  bool rederive = !(ch == cfg.channel);
  cfg.channel = ch;
  if (!o.kind.empty()) {
    const SchedulerKind kind = scheduler_kind_from_string(o.kind);
    if (kind != cfg.scheduler.kind) {
      cfg.scheduler.kind = kind;
      cfg.scheduler_explicit = false;
      rederive = true;
    }
  }
  if (o.n1) {
    if (cfg.scheduler.kind != SchedulerKind::Optimal2d) {
      throw ConfigError(ConfigErrorKind::SchemaError, "--n1", "only valid with the optimal2d scheduler");
    }
    cfg.scheduler.quotas = {*o.n1};
    cfg.scheduler_explicit = true;
    rederive = true;
  }
  if (rederive) derive_scheduler(cfg);
  if (!o.out_path.empty()) cfg.output.path = o.out_path;
  if (!o.format.empty()) cfg.output.format = o.format;
  return cfg;
}

// Writes to the configured path, or to `out` when none.
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError(ConfigErrorKind::SchemaError, "output.path", "cannot open '" + path + "'");
  write(file);
}

json estimate_json(const MomentEstimate& m) {
  return json{{"mean", m.mean}, {"std_error", m.std_error}, {"samples", m.samples}};
}

bool is_two_dim_real(const SystemSpec& spec) {
  return spec.blocks.size() == 2 && spec.state_dim() == 2 && !spec.blocks[0].is_complex &&
         !spec.blocks[1].is_complex;
}

int run_check(const CommonOptions& o, std::ostream& out) {
  const RunConfig cfg = load_run_config(o);
  const NecessityCheck nec = necessity_holds(cfg.system, cfg.channel);
  const AlphaVector alpha = adaptive_feasible(cfg.system, cfg.channel);

  json alpha_min = json::array();
  for (double a : alpha.minimum_fractions) alpha_min.push_back(std::isfinite(a) ? json(a) : json(nullptr));

  json report;
  report["necessary"] = nec.holds;
  report["tdma"] = tdma_sufficient(cfg.system, cfg.channel);
  report["adaptive"] = json{{"feasible", alpha.feasible}, {"alpha_min", alpha_min}};
  if (is_two_dim_real(cfg.system)) {
    report["optimal2d"] =
        optimal2d_condition(cfg.system.blocks[0].log_magnitude, cfg.system.blocks[1].log_magnitude, cfg.channel);
  } else {
    report["optimal2d"] = nullptr;
  }
  emit(cfg.output.path, out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
  return kExitOk;
}

int run_region(const CommonOptions& o, double ln_max, int grid, std::ostream& out) {
  ChannelParams base;
  std::string path = o.out_path;
  if (!o.config_path.empty()) {
    const RunConfig cfg = parse_config(read_file(o.config_path));
    base = cfg.channel;
    if (path.empty()) path = cfg.output.path;
  }
  const ChannelParams ch = channel_from_flags(o, base);
  if (grid < 2) throw ConfigError(ConfigErrorKind::SchemaError, "--grid", "must be >= 2");
  if (!(ln_max > 0.0)) throw ConfigError(ConfigErrorKind::SchemaError, "--ln-max", "must be > 0");
  const RegionReport report = region_sweep(ch, ln_max, grid);
  emit(path, out, [&](std::ostream& os) { write_region_csv(os, report); });
  return kExitOk;
}

int run_theta(const CommonOptions& o, double l1, double l2, std::ostream& out) {
  ChannelParams base;
  if (!o.config_path.empty()) base = parse_config(read_file(o.config_path)).channel;
  const ChannelParams ch = channel_from_flags(o, base);
  const ThetaSolution sol = solve_theta(l1, l2, ch);
  const json result{{"theta", sol.theta}, {"phi", sol.phi}, {"b", sol.drift}, {"residual", sol.residual}};
  emit(o.out_path, out, [&](std::ostream& os) { os << result.dump(2) << '\n'; });
  return kExitOk;
}

int run_simulate(const CommonOptions& o, std::optional<long> trials, std::optional<long> horizon,
                 std::optional<std::uint64_t> seed, std::ostream& out) {
  RunConfig cfg = load_run_config(o);
  if (trials) cfg.sim.trials = *trials;
  if (horizon) cfg.sim.horizon = *horizon;
  if (seed) cfg.sim.seed = *seed;
  if (cfg.sim.trials < 1) throw ConfigError(ConfigErrorKind::SchemaError, "--trials", "must be >= 1");
  if (cfg.sim.horizon < 1 || cfg.sim.horizon > kMaxHorizon) {
    throw ConfigError(ConfigErrorKind::SchemaError, "--horizon", "must lie in [1, 10000]");
  }
  cfg.require_scheduler();

  const ClosedLoopConfig loop{cfg.system, cfg.channel, cfg.scheduler, cfg.gain};
  const DecayCurves curves = montecarlo_moments(loop, cfg.sim.trials, cfg.sim.horizon, cfg.sim.seed, cfg.sim.checkpoints);

  emit(cfg.output.path, out, [&](std::ostream& os) {
    if (cfg.output.format == "json") {
      json j{{"checkpoints", curves.checkpoints},     {"mean_moment", curves.mean_moment},
             {"mean_sq_norm", curves.mean_sq_norm},   {"diverged_fraction", curves.diverged_fraction},
             {"slope", curves.slope},                 {"trials", curves.trials},
             {"scheduler", to_string(cfg.scheduler.kind)}, {"quotas", cfg.scheduler.quotas}};
      os << j.dump(2) << '\n';
    } else {
      write_decay_csv(os, curves);
    }
  });
  return kExitOk;
}

int run_sched_stats(const CommonOptions& o, std::optional<long> rounds, std::optional<std::uint64_t> seed,
                    const std::string& round_log_path, std::ostream& out) {
  RunConfig cfg = load_run_config(o);
  if (rounds) cfg.sim.rounds = *rounds;
  if (seed) cfg.sim.seed = *seed;
  if (cfg.sim.rounds < 1) throw ConfigError(ConfigErrorKind::SchemaError, "--rounds", "must be >= 1");
  cfg.require_scheduler();

  const std::vector<double> ln_ls = coordinate_log_magnitudes(cfg.system);
  const SchedulerMoments m = scheduler_moment_mc(cfg.scheduler, ln_ls, cfg.channel, cfg.sim.rounds, cfg.sim.seed);

  json report;
  report["scheduler"] = to_string(cfg.scheduler.kind);
  report["quotas"] = cfg.scheduler.quotas;
  report["rounds"] = m.rounds;
  report["skipped_phase2"] = m.skipped_phase2;
  json round = json::array();
  json phase = json::array();
  json mean_duration = json::array();
  for (std::size_t i = 0; i < ln_ls.size(); ++i) {
    round.push_back(estimate_json(m.round_moment[i]));
    phase.push_back(estimate_json(m.phase_moment[i]));
    long count = 0;
    double total = 0.0;
    for (std::size_t d = 0; d < m.duration_histogram[i].size(); ++d) {
      count += m.duration_histogram[i][d];
      total += static_cast<double>(d) * static_cast<double>(m.duration_histogram[i][d]);
    }
    mean_duration.push_back(count > 0 ? json(total / static_cast<double>(count)) : json(nullptr));
  }
  report["round_moment"] = round;
  report["phase_moment"] = phase;
  report["mean_phase_duration"] = mean_duration;
  emit(cfg.output.path, out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });

  if (!round_log_path.empty()) {
    Scheduler sched = make_scheduler(cfg.scheduler, ln_ls, cfg.channel);
    ChannelInstance channel(cfg.channel, cfg.sim.seed);
    while (sched.state().round_index < cfg.sim.rounds) sched.step(channel.draw_erasure_outcome());
    emit(round_log_path, out, [&](std::ostream& os) { write_round_log_csv(os, sched.state()); });
  }
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"nclab: stabilization over power-constrained lossy channels"};
  app.require_subcommand(1);

  CommonOptions opts;
  double ln_max = 0.12;
  int grid = 200;
  double l1 = 0.0;
  double l2 = 0.0;
  std::optional<long> trials;
  std::optional<long> horizon;
  std::optional<long> rounds;
  std::optional<std::uint64_t> seed;
  std::string round_log;

  auto* check = app.add_subcommand("check", "Evaluate every stabilizability criterion for a system");
  add_system_flags(check, opts);
  add_channel_flags(check, opts);
  add_output_flags(check, opts);

  auto* region = app.add_subcommand("region", "Classify a grid of 2-D eigenvalue pairs (CSV)");
  region->add_option("--config", opts.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  add_channel_flags(region, opts);
  region->add_option("--ln-max", ln_max, "Upper edge of the grid in ln|lambda|");
  region->add_option("--grid", grid, "Grid resolution per axis");
  region->add_option("--out", opts.out_path, "Output file (default: stdout)");

  auto* theta = app.add_subcommand("theta", "Solve the exponential-tilt equation");
  theta->add_option("--config", opts.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  add_channel_flags(theta, opts);
  theta->add_option("--l1", l1, "ln|lambda_1|")->required();
  theta->add_option("--l2", l2, "ln|lambda_2|")->required();
  theta->add_option("--out", opts.out_path, "Output file (default: stdout)");

  auto* simulate = app.add_subcommand("simulate", "Closed-loop Monte Carlo decay curves");
  add_system_flags(simulate, opts);
  add_channel_flags(simulate, opts);
  add_scheduler_flags(simulate, opts);
  add_output_flags(simulate, opts);
  simulate->add_option("--trials", trials, "Number of trials");
  simulate->add_option("--horizon", horizon, "Slots per trial");
  simulate->add_option("--seed", seed, "Master seed");

  auto* stats = app.add_subcommand("sched-stats", "Erasure-only scheduler round statistics");
  add_system_flags(stats, opts);
  add_channel_flags(stats, opts);
  add_scheduler_flags(stats, opts);
  stats->add_option("--out", opts.out_path, "Output file (default: stdout)");
  stats->add_option("--rounds", rounds, "Number of rounds");
  stats->add_option("--seed", seed, "Master seed");
  stats->add_option("--round-log", round_log, "Also write the round log of one sequential run (CSV)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (check->parsed()) return run_check(opts, out);
    if (region->parsed()) return run_region(opts, ln_max, grid, out);
    if (theta->parsed()) return run_theta(opts, l1, l2, out);
    if (simulate->parsed()) return run_simulate(opts, trials, horizon, seed, out);
    if (stats->parsed()) return run_sched_stats(opts, rounds, seed, round_log, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? kExitNumerical : kExitConfig;
  }
  return kExitConfig;
}

}  // namespace nclab::cli
