#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nclab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one subcommand (check, region, theta, simulate, sched-stats). `args` excludes
/// the program name. Results go to `out` unless an output path is configured.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nclab::cli
