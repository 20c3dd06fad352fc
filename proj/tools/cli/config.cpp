#include "cli/config.hpp"

#include <cmath>
#include <initializer_list>

#include <json.hpp>

#include "nclab/conditions.hpp"
#include "nclab/error.hpp"

namespace nclab::cli {

using nlohmann::json;

std::string_view to_string(ConfigErrorKind kind) noexcept {
  switch (kind) {
    case ConfigErrorKind::ParseError: return "ParseError";
    case ConfigErrorKind::SchemaError: return "SchemaError";
    case ConfigErrorKind::ValidationError: return "ValidationError";
  }
  return "ConfigError";
}

void RunConfig::require_scheduler() const {
  if (scheduler_error) throw Error(scheduler_error_kind.value_or(ErrorKind::ConfigError), *scheduler_error);
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw ConfigError(ConfigErrorKind::SchemaError, path, message);
}

void expect_object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) schema_error(path + "." + key, "unknown key");
  }
}

double get_real(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "must be finite");
  return v;
}

long get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected an integer");
  return j.get<long>();
}

std::vector<double> get_reals(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_real(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> get_positive_ints(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const long v = get_int(j[i], path + "[" + std::to_string(i) + "]");
    if (v < 1) schema_error(path + "[" + std::to_string(i) + "]", "must be >= 1");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema_error(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    const auto row = get_reals(j[static_cast<std::size_t>(r)], rp);
    if (r == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) schema_error(rp, "ragged matrix row");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

SystemSpec parse_system(const json& j, std::optional<Eigen::RowVectorXd>& gain) {
  expect_object(j, "system", {"ln_magnitudes", "blocks", "B", "A", "initial_covariance", "K"});
  SystemSpec spec;

  const bool has_ln = j.contains("ln_magnitudes");
  const bool has_blocks = j.contains("blocks");
  if (has_ln == has_blocks) schema_error("system", "exactly one of 'ln_magnitudes' or 'blocks' is required");

  if (has_ln) {
    for (double l : get_reals(j["ln_magnitudes"], "system.ln_magnitudes")) spec.blocks.push_back(EigenBlock{l, false, 1});
  } else {
    const json& blocks = j["blocks"];
    if (!blocks.is_array()) schema_error("system.blocks", "expected an array");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = "system.blocks[" + std::to_string(i) + "]";
      expect_object(blocks[i], p, {"ln_magnitude", "complex", "multiplicity", "angle"});
      EigenBlock b;
      if (!blocks[i].contains("ln_magnitude")) schema_error(p + ".ln_magnitude", "missing field");
      b.log_magnitude = get_real(blocks[i]["ln_magnitude"], p + ".ln_magnitude");
      if (blocks[i].contains("complex")) {
        if (!blocks[i]["complex"].is_boolean()) schema_error(p + ".complex", "expected a boolean");
        b.is_complex = blocks[i]["complex"].get<bool>();
      }
      if (blocks[i].contains("multiplicity")) {
        const long m = get_int(blocks[i]["multiplicity"], p + ".multiplicity");
        if (m < 1) schema_error(p + ".multiplicity", "must be >= 1");
        b.algebraic_multiplicity = static_cast<int>(m);
      }
      if (blocks[i].contains("angle")) b.angle = get_real(blocks[i]["angle"], p + ".angle");
      spec.blocks.push_back(b);
    }
  }

  if (!j.contains("B")) schema_error("system.B", "missing field");
  spec.input_vector = to_vector(get_reals(j["B"], "system.B"));
  if (j.contains("A")) spec.a_matrix = get_matrix(j["A"], "system.A");
  if (j.contains("initial_covariance")) {
    spec.initial_covariance = get_matrix(j["initial_covariance"], "system.initial_covariance");
  }
  if (j.contains("K")) gain = to_vector(get_reals(j["K"], "system.K")).transpose();
  return spec;
}

ChannelParams parse_channel(const json& j) {
  expect_object(j, "channel", {"power", "noise_var", "drop_prob"});
  ChannelParams ch;
  for (const char* key : {"power", "noise_var", "drop_prob"}) {
    if (!j.contains(key)) schema_error(std::string("channel.") + key, "missing field");
  }
  ch.power = get_real(j["power"], "channel.power");
  ch.noise_var = get_real(j["noise_var"], "channel.noise_var");
  ch.drop_prob = get_real(j["drop_prob"], "channel.drop_prob");
  if (!(ch.power > 0.0)) schema_error("channel.power", "must be > 0");
  if (!(ch.noise_var > 0.0)) schema_error("channel.noise_var", "must be > 0");
  if (!(ch.drop_prob >= 0.0 && ch.drop_prob < 1.0)) schema_error("channel.drop_prob", "must lie in [0, 1)");
  return ch;
}

}  // namespace

void derive_scheduler(RunConfig& cfg) {
  cfg.scheduler_error.reset();
  cfg.scheduler_error_kind.reset();
  if (!cfg.scheduler_explicit) cfg.scheduler.quotas.clear();
  try {
    switch (cfg.scheduler.kind) {
      case SchedulerKind::FixedTdma:
        if (cfg.scheduler.quotas.empty()) {
          cfg.scheduler.quotas.assign(static_cast<std::size_t>(cfg.system.state_dim()), 1);
        }
        break;
      case SchedulerKind::AdaptiveTdma:
        if (cfg.scheduler.quotas.empty()) cfg.scheduler.quotas = quota_search(cfg.system, cfg.channel, cfg.quota_cap);
        break;
      case SchedulerKind::Optimal2d:
        if (cfg.scheduler.quotas.empty()) {
          if (cfg.system.blocks.size() != 2 || cfg.system.state_dim() != 2) {
            throw Error(ErrorKind::ConfigError, "optimal2d needs a two-dimensional real system");
          }
          const double l1 = cfg.system.blocks[0].log_magnitude;
          const double l2 = cfg.system.blocks[1].log_magnitude;
          const ThetaSolution sol = solve_theta(l1, l2, cfg.channel);
          cfg.scheduler.quotas = {min_n1_for_contraction(sol, l1, cfg.channel, cfg.quota_cap)};
        }
        break;
    }
  } catch (const Error& e) {
    cfg.scheduler_error = e.what();
    cfg.scheduler_error_kind = e.kind();
  }
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigErrorKind::ParseError, "", e.what());
  }

  expect_object(root, "$", {"version", "system", "channel", "scheduler", "sim", "output"});
  RunConfig cfg;
  if (root.contains("version")) {
    const long v = get_int(root["version"], "version");
    if (v != 1) schema_error("version", "unsupported config version " + std::to_string(v));
  }
  if (!root.contains("system")) schema_error("system", "missing section");
  if (!root.contains("channel")) schema_error("channel", "missing section");

  cfg.system = parse_system(root["system"], cfg.gain);
  cfg.channel = parse_channel(root["channel"]);

  if (root.contains("scheduler")) {
    const json& s = root["scheduler"];
    expect_object(s, "scheduler", {"kind", "quotas", "budgets", "n1", "cap"});
    if (s.contains("kind")) {
      if (!s["kind"].is_string()) schema_error("scheduler.kind", "expected a string");
      try {
        cfg.scheduler.kind = scheduler_kind_from_string(s["kind"].get<std::string>());
      } catch (const Error&) {
        schema_error("scheduler.kind", "must be one of fixed_tdma, adaptive_tdma, optimal2d");
      }
    }
    if (s.contains("cap")) {
      const long cap = get_int(s["cap"], "scheduler.cap");
      if (cap < 1) schema_error("scheduler.cap", "must be >= 1");
      cfg.quota_cap = static_cast<int>(cap);
    }
    auto only_for = [&](const char* key, SchedulerKind kind) {
      if (s.contains(key) && cfg.scheduler.kind != kind) {
        schema_error(std::string("scheduler.") + key, "not valid for scheduler kind " +
                                                         std::string(to_string(cfg.scheduler.kind)));
      }
    };
    only_for("quotas", SchedulerKind::AdaptiveTdma);
    only_for("budgets", SchedulerKind::FixedTdma);
    only_for("n1", SchedulerKind::Optimal2d);
    cfg.scheduler_explicit = s.contains("quotas") || s.contains("budgets") || s.contains("n1");
    if (s.contains("quotas")) cfg.scheduler.quotas = get_positive_ints(s["quotas"], "scheduler.quotas");
    if (s.contains("budgets")) cfg.scheduler.quotas = get_positive_ints(s["budgets"], "scheduler.budgets");
    if (s.contains("n1")) {
      const long n1 = get_int(s["n1"], "scheduler.n1");
      if (n1 < 1) schema_error("scheduler.n1", "must be >= 1");
      cfg.scheduler.quotas = {static_cast<int>(n1)};
    }
  }

  if (root.contains("sim")) {
    const json& s = root["sim"];
    expect_object(s, "sim", {"horizon", "trials", "seed", "rounds", "checkpoints"});
    if (s.contains("horizon")) {
      cfg.sim.horizon = get_int(s["horizon"], "sim.horizon");
      if (cfg.sim.horizon < 1 || cfg.sim.horizon > kMaxHorizon) schema_error("sim.horizon", "must lie in [1, 10000]");
    }
    if (s.contains("trials")) {
      cfg.sim.trials = get_int(s["trials"], "sim.trials");
      if (cfg.sim.trials < 1) schema_error("sim.trials", "must be >= 1");
    }
    if (s.contains("rounds")) {
      cfg.sim.rounds = get_int(s["rounds"], "sim.rounds");
      if (cfg.sim.rounds < 1) schema_error("sim.rounds", "must be >= 1");
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned() && !(s["seed"].is_number_integer() && s["seed"].get<long>() >= 0)) {
        schema_error("sim.seed", "expected a non-negative integer");
      }
      cfg.sim.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("checkpoints")) {
      const json& c = s["checkpoints"];
      if (!c.is_array()) schema_error("sim.checkpoints", "expected an array of integers");
      for (std::size_t i = 0; i < c.size(); ++i) {
        const long t = get_int(c[i], "sim.checkpoints[" + std::to_string(i) + "]");
        if (t < 0) schema_error("sim.checkpoints[" + std::to_string(i) + "]", "must be >= 0");
        cfg.sim.checkpoints.push_back(t);
      }
    }
  }

  if (root.contains("output")) {
    const json& o = root["output"];
    expect_object(o, "output", {"path", "format"});
    if (o.contains("path")) {
      if (!o["path"].is_string()) schema_error("output.path", "expected a string");
      cfg.output.path = o["path"].get<std::string>();
    }
    if (o.contains("format")) {
      if (!o["format"].is_string()) schema_error("output.format", "expected a string");
      cfg.output.format = o["format"].get<std::string>();
      if (cfg.output.format != "csv" && cfg.output.format != "json") schema_error("output.format", "must be csv or json");
    }
  }

  try {
    cfg.system = validate_system(std::move(cfg.system));
  } catch (const Error& e) {
    throw ConfigError(ConfigErrorKind::ValidationError, "system", e.what());
  }
  try {
    validate_channel(cfg.channel);
  } catch (const Error& e) {
    throw ConfigError(ConfigErrorKind::ValidationError, "channel", e.what());
  }

  derive_scheduler(cfg);
  return cfg;
}

RunConfig config_from_parameters(const std::vector<double>& ln_magnitudes, const ChannelParams& ch) {
  RunConfig cfg;
  cfg.channel = ch;
  try {
    cfg.system = validate_system(diagonal_system(ln_magnitudes));
  } catch (const Error& e) {
    throw ConfigError(ConfigErrorKind::ValidationError, "--ln", e.what());
  }
  try {
    validate_channel(cfg.channel);
  } catch (const Error& e) {
    throw ConfigError(ConfigErrorKind::ValidationError, "channel", e.what());
  }
  derive_scheduler(cfg);
  return cfg;
}

}  // namespace nclab::cli
