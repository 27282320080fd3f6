#include <iostream>

#include <CLI11.hpp>

#include "pim/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Point-integral kernel Laplacian spectra on sampled point clouds"};
  app.require_subcommand(1);
  app.fallthrough();

  pim::cli::CommandOptions options;
  std::uint64_t seed = 0;
  app.add_option("--config", options.config, "INI configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", options.out, "Output directory")->capture_default_str();
  auto* seed_option = app.add_option("--seed", seed, "Override sample.seed and sweep.seeds");
  app.add_option("--format", options.formats, "Output format: csv, json or svg (repeatable)")
      ->check(CLI::IsMember({"csv", "json", "svg"}))
      ->take_all()
      ->allow_extra_args(false);
  app.add_option("--jobs", options.jobs, "Concurrent sweep jobs (0 = hardware threads)")->capture_default_str();
  app.add_flag("--timings", options.timings, "Record wall-clock times in report.csv and summary.json");

  auto* validate = app.add_subcommand("validate-kernel", "Check the configured kernel against the admissibility clauses");
  auto* sweep = app.add_subcommand("sweep", "Eigenvalue convergence sweep over (n, t, seed)");
  auto* poisson = app.add_subcommand("poisson", "Point-integral Poisson solve for a built-in right-hand side");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pim::cli::kExitUsage;
  }
  if (*seed_option) options.seed = seed;

  if (validate->parsed()) return pim::cli::run_validate_kernel(options, std::cout, std::cerr);
  if (sweep->parsed()) return pim::cli::run_sweep(options, std::cout, std::cerr);
  if (poisson->parsed()) return pim::cli::run_poisson(options, std::cout, std::cerr);
  return pim::cli::kExitUsage;
}
