#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pim/analysis.hpp"
#include "pim/assembly.hpp"
#include "pim/geometry.hpp"
#include "pim/kernel.hpp"

namespace pim::cli {

/// Malformed or inconsistent configuration; key() names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class AcceptanceMetric { rel_error, abs_error, angle };

/// One "<metric>.<index> = tolerance" entry of the [acceptance] section.
struct AcceptanceCheck {
  AcceptanceMetric metric = AcceptanceMetric::rel_error;
  std::size_t index = 0;
  double tolerance = 0.0;
  std::string key;
};

struct AcceptanceConfig {
  std::vector<AcceptanceCheck> checks;
  std::optional<double> coercivity_min;
  /// Restricts the checks to one (n, t) cell; every cell otherwise.
  std::optional<std::size_t> cell_n;
  std::optional<double> cell_t;

  bool empty() const noexcept { return checks.empty() && !coercivity_min; }
};

enum class PoissonSource { zero, coordinate, cosine };

struct PoissonConfig {
  PoissonSource source = PoissonSource::zero;
  int parameter = 1;  ///< coordinate axis (1-based) or cosine frequency
  std::string expression = "zero";
  double tolerance = 1e-12;
  int max_iterations = 0;
};

/// Fully resolved run configuration with the entries that were set.
struct RunConfig {
  std::string kernel_family = "wendland41";
  std::vector<double> kernel_coeffs;
  int kernel_grid = 1000;
  KernelSpec kernel = KernelSpec::wendland41();

  std::string manifold_shape = "interval";
  double manifold_radius = 1.0;
  double manifold_lower = 0.0;
  double manifold_upper = 1.0;
  ManifoldModel manifold = ManifoldModel::interval(0.0, 1.0);

  std::string density_form = "uniform";
  double density_a = 0.0;
  std::vector<double> density_values;
  DensitySpec density = DensitySpec::uniform();

  std::size_t sample_n = 1000;
  std::uint64_t sample_seed = 0;

  std::optional<double> assemble_t;
  bool assemble_t_auto = false;
  double assemble_t_c = 1.0;
  std::size_t dense_threshold = 512;

  std::vector<std::size_t> sweep_n;
  std::vector<double> sweep_t;
  std::vector<std::uint64_t> sweep_seeds;
  std::size_t sweep_count = 6;
  bool sweep_angles = true;
  bool sweep_coercivity = true;
  bool sweep_discrepancy = true;
  std::size_t sweep_discrepancy_centers = kDefaultDiscrepancyCenters;

  AcceptanceConfig acceptance;
  PoissonConfig poisson;

  /// Raw "section.key" -> value map as read, for echoing.
  std::map<std::string, std::string> entries;

  /// Bandwidth for single-system commands: assemble.t, or the heuristic when t_auto is set.
  double bandwidth() const;
  AssemblyOptions assembly_options() const;
  SweepGrid sweep_grid() const;
};

/// Reads an INI file ([section] then key = value). Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path);

/// Parses INI text; origin is used in error messages.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");

/// Replaces sample.seed and the sweep seed list with a single seed.
void override_seed(RunConfig& config, std::uint64_t seed);

}  // namespace pim::cli
