#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

/// Residual below which a Poisson run counts as solved.
inline constexpr double kPoissonResidualGate = 1e-8;

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  /// Any of "csv", "json", "svg"; empty selects the command's defaults.
  std::vector<std::string> formats;
  unsigned jobs = 1;
  /// Adds wall-clock times to report.csv and summary.json (breaks byte-identical reruns).
  bool timings = false;
};

/// Checks the configured kernel; 0 iff every clause passes.
int run_validate_kernel(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Convergence sweep; 1 iff an [acceptance] verdict fails.
int run_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Point-integral Poisson solve for a built-in right-hand side; 0 iff the residual is below 1e-8.
int run_poisson(const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace pim::cli
