#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nclab/error.hpp"
#include "nclab/model.hpp"
#include "nclab/sim.hpp"

namespace nclab::cli {

enum class ConfigErrorKind { ParseError, SchemaError, ValidationError };

std::string_view to_string(ConfigErrorKind kind) noexcept;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ConfigErrorKind kind, std::string path, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + (path.empty() ? "" : " at " + path) + ": " + message),
        kind_(kind),
        path_(std::move(path)) {}

  ConfigErrorKind kind() const noexcept { return kind_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ConfigErrorKind kind_;
  std::string path_;
};

struct SimSettings {
  long horizon = 600;
  long trials = 1000;
  std::uint64_t seed = 1;
  long rounds = 100000;
  std::vector<long> checkpoints;
};

struct OutputSettings {
  std::string path;  // empty: stdout
  std::string format = "csv";
};

struct RunConfig {
  int version = 1;
  SystemSpec system;
  ChannelParams channel;
  SchedulerConfig scheduler;
  bool scheduler_explicit = false;  // quotas/budgets/n1 given rather than derived
  int quota_cap = 256;
  /// Set when quotas/n_1 were requested implicitly but could not be derived; commands that
  /// need a scheduler rethrow it.
  std::optional<std::string> scheduler_error;
  std::optional<ErrorKind> scheduler_error_kind;
  std::optional<Eigen::RowVectorXd> gain;
  SimSettings sim;
  OutputSettings output;

  /// Throws the deferred derivation error, if any.
  void require_scheduler() const;
};

/// Parses a version-1 JSON configuration. Unknown keys and out-of-range values are
/// SchemaErrors carrying the offending path; model validation failures surface as
/// ValidationError.
RunConfig parse_config(std::string_view text);

/// Fills scheduler quotas from the analytic conditions unless they were given explicitly.
void derive_scheduler(RunConfig& cfg);

/// Config for a real diagonal system given only by log magnitudes (B = ones, Sigma = I).
RunConfig config_from_parameters(const std::vector<double>& ln_magnitudes, const ChannelParams& ch);

}  // namespace nclab::cli
