#include "pim/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

#include <nlohmann/json.hpp>

#include "pim/analysis.hpp"
#include "pim/assembly.hpp"
#include "pim/cli/config.hpp"
#include "pim/error.hpp"
#include "pim/io.hpp"
#include "pim/solver.hpp"

namespace pim::cli {

namespace {

using Json = nlohmann::ordered_json;

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

bool wants(const std::vector<std::string>& formats, const std::string& format) {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::vector<std::string> resolve_formats(const CommandOptions& options, std::vector<std::string> defaults) {
  if (options.formats.empty()) return defaults;
  for (const auto& f : options.formats)
    if (f != "csv" && f != "json" && f != "svg") throw ConfigError("--format", "unknown format '" + f + "'");
  return options.formats;
}

RunConfig load(const CommandOptions& options) {
  auto config = load_config(options.config);
  if (options.seed) override_seed(config, *options.seed);
  return config;
}

void prepare_output(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ConfigError("--out", "cannot create output directory '" + dir.string() + "'");
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path.string() + "'");
  return file;
}

Json config_echo(const RunConfig& config) {
  Json entries = Json::object();
  for (const auto& [key, value] : config.entries) entries[key] = value;
  return entries;
}

unsigned resolve_jobs(unsigned jobs) { return jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs; }

struct Verdict {
  std::string check;
  std::size_t n = 0;
  double t = 0.0;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

bool same_t(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

std::vector<Verdict> evaluate_acceptance(const AcceptanceConfig& acceptance, const SpectralReport& report) {
  std::vector<Verdict> verdicts;
  for (const auto& cell : report.cells) {
    if (acceptance.cell_n && cell.n != *acceptance.cell_n) continue;
    if (acceptance.cell_t && !same_t(cell.t, *acceptance.cell_t)) continue;
    for (const auto& check : acceptance.checks) {
      Verdict v{check.key, cell.n, cell.t, std::nan(""), check.tolerance, false};
      if (!cell.missing()) {
        const std::size_t k = check.index;
        switch (check.metric) {
          case AcceptanceMetric::rel_error: {
            const double ref = report.reference[k];
            const double diff = std::abs(cell.mean_lambda[k] - ref);
            v.value = ref != 0.0 ? diff / std::abs(ref) : diff;
            break;
          }
          case AcceptanceMetric::abs_error:
            v.value = cell.mean_abs_error[k];
            break;
          case AcceptanceMetric::angle:
            v.value = cell.mean_angle[k];
            break;
        }
      }
      v.passed = std::isfinite(v.value) && v.value < v.tolerance;
      verdicts.push_back(v);
    }
    if (acceptance.coercivity_min) {
      Verdict v{"acceptance.coercivity_min", cell.n, cell.t, cell.missing() ? std::nan("") : cell.coercivity,
                *acceptance.coercivity_min, false};
      v.passed = std::isfinite(v.value) && v.value > v.tolerance;
      verdicts.push_back(v);
    }
  }
  return verdicts;
}

void check_acceptance_cell(const RunConfig& config, const SweepGrid& grid) {
  const auto& a = config.acceptance;
  if (a.cell_n && std::find(grid.n_values.begin(), grid.n_values.end(), *a.cell_n) == grid.n_values.end())
    throw ConfigError("acceptance.cell_n", "not one of the sweep sample sizes");
  if (a.cell_t && std::none_of(grid.t_values.begin(), grid.t_values.end(), [&](double t) { return same_t(t, *a.cell_t); }))
    throw ConfigError("acceptance.cell_t", "not one of the sweep bandwidths");
  if (a.coercivity_min && !config.sweep_coercivity)
    throw ConfigError("acceptance.coercivity_min", "requires sweep.coercivity = true");
  for (const auto& check : a.checks)
    if (check.metric == AcceptanceMetric::angle && !config.sweep_angles)
      throw ConfigError(check.key, "requires sweep.angles = true");
}

Json fit_json(const LogLogFit& fit) {
  return Json{{"slope", number(fit.slope)},
              {"intercept", number(fit.intercept)},
              {"r_squared", number(fit.r_squared)},
              {"points", fit.points},
              {"insufficient_points", fit.insufficient_points}};
}

Json sweep_summary(const RunConfig& config, const SpectralReport& report, const std::vector<Verdict>& verdicts,
                   bool timings) {
  Json summary;
  summary["config"] = config_echo(config);
  summary["resolved"] = {
      {"manifold", config.manifold.describe()},
      {"density", config.density.describe()},
      {"kernel", config.kernel.name()},
      {"n_values", report.grid.n_values},
      {"t_values", numbers(report.grid.t_values)},
      {"seeds", report.grid.seeds},
      {"count", report.count},
  };
  summary["reference"] = {
      {"provenance", report.reference_provenance == Provenance::closed_form ? "closed_form" : "fd_oracle"},
      {"eigenvalues", numbers(std::vector<double>(report.reference.begin(),
                                                  report.reference.begin() + static_cast<std::ptrdiff_t>(report.count)))},
  };
  Json cells = Json::array();
  for (const auto& cell : report.cells) {
    Json c{{"n", cell.n},
           {"t", number(cell.t)},
           {"seeds_ok", cell.seeds_ok},
           {"faults", cell.faults},
           {"mean_lambda", numbers(cell.mean_lambda)},
           {"mean_abs_error", numbers(cell.mean_abs_error)},
           {"mean_angle", numbers(cell.mean_angle)},
           {"coercivity", number(cell.coercivity)},
           {"discrepancy", number(cell.discrepancy)},
           {"w_min", number(cell.w_min)},
           {"w_max", number(cell.w_max)}};
    if (timings) c["wall_ms"] = number(cell.wall_ms);
    cells.push_back(std::move(c));
  }
  summary["cells"] = std::move(cells);
  Json fits = Json::array();
  for (std::size_t k = 0; k < report.count; ++k)
    fits.push_back({{"eig_index", k}, {"vs_t", fit_json(report.fit_vs_t[k])}, {"vs_n", fit_json(report.fit_vs_n[k])}});
  summary["fits"] = std::move(fits);
  Json verdict_json = Json::array();
  bool all = true;
  for (const auto& v : verdicts) {
    verdict_json.push_back({{"check", v.check},
                            {"n", v.n},
                            {"t", number(v.t)},
                            {"value", number(v.value)},
                            {"tolerance", number(v.tolerance)},
                            {"passed", v.passed}});
    all = all && v.passed;
  }
  summary["acceptance"] = {{"verdicts", std::move(verdict_json)}, {"passed", all}};
  return summary;
}

Eigen::VectorXd poisson_source(const RunConfig& config, const PointCloud& cloud) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  switch (config.poisson.source) {
    case PoissonSource::zero:
      break;
    case PoissonSource::coordinate:
      if (config.poisson.parameter > cloud.dim())
        throw ConfigError("poisson.f", "coordinate axis exceeds the ambient dimension");
      f = cloud.points.col(config.poisson.parameter - 1);
      break;
    case PoissonSource::cosine:
      for (Eigen::Index i = 0; i < n; ++i)
        f[i] = std::cos(config.poisson.parameter * std::numbers::pi *
                        cloud.manifold.coordinate(cloud.point(static_cast<std::size_t>(i))));
      break;
  }
  return f;
}

/// Exact mean-zero solution for a cosine source with uniform density on the interval or circle.
std::optional<Eigen::VectorXd> analytic_poisson(const RunConfig& config, const PointCloud& cloud,
                                                const Eigen::VectorXd& f) {
  if (config.poisson.source != PoissonSource::cosine || config.poisson.parameter == 0 || !config.density.is_uniform())
    return std::nullopt;
  const double m = config.poisson.parameter;
  double scale = 0.0;
  if (cloud.manifold.shape() == Shape::interval) {
    const double length = cloud.manifold.upper() - cloud.manifold.lower();
    scale = std::pow(length / (m * std::numbers::pi), 2);
  } else if (cloud.manifold.shape() == Shape::circle) {
    scale = std::pow(cloud.manifold.radius() / m, 2);
  } else {
    return std::nullopt;
  }
  Eigen::VectorXd u = scale * f;
  u.array() -= u.mean();
  return u;
}

}  // namespace

int run_validate_kernel(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  RunConfig config;
  std::vector<std::string> formats;
  try {
    config = load(options);
    formats = resolve_formats(options, {});
    if (wants(formats, "json")) prepare_output(options.out);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  }

  const auto report = validate_kernel(config.kernel, config.kernel_grid);
  out << "kernel " << report.kernel_name << " on a " << config.kernel_grid << "-point grid\n";
  Json clauses = Json::array();
  for (const auto& c : report.clauses) {
    out << (c.passed ? "PASS" : "FAIL") << " clause (" << c.clause << ") " << c.description
        << ": measured " << format_number(c.measured);
    if (c.witness) out << ", witness r = " << format_number(*c.witness);
    out << "\n";
    clauses.push_back({{"clause", c.clause},
                       {"description", c.description},
                       {"passed", c.passed},
                       {"measured", number(c.measured)},
                       {"witness", c.witness ? number(*c.witness) : Json(nullptr)}});
  }
  out << "delta0 = " << format_number(report.measured_delta0) << ", C2 jump = " << format_number(report.measured_c2_jump)
      << ", antiderivative residual = " << format_number(report.antiderivative_residual) << "\n";
  out << (report.all_passed() ? "kernel admissible" : "kernel NOT admissible") << "\n";

  if (wants(formats, "json")) {
    Json summary{{"config", config_echo(config)},
                 {"kernel", report.kernel_name},
                 {"clauses", std::move(clauses)},
                 {"measured_delta0", number(report.measured_delta0)},
                 {"measured_c2_jump", number(report.measured_c2_jump)},
                 {"antiderivative_residual", number(report.antiderivative_residual)},
                 {"passed", report.all_passed()}};
    auto file = open_output(options.out / "kernel_validation.json");
    file << summary.dump(2) << "\n";
  }
  return report.all_passed() ? kExitOk : kExitFailed;
}

int run_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  RunConfig config;
  SweepGrid grid;
  std::vector<std::string> formats;
  try {
    config = load(options);
    formats = resolve_formats(options, {"csv", "json"});
    grid = config.sweep_grid();
    grid.validate();
    validate_density(config.manifold, config.density);
    reference_spectrum(config.manifold, config.density, config.sweep_count);
    check_acceptance_cell(config, grid);
    prepare_output(options.out);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  }

  SweepOptions sweep;
  sweep.jobs = resolve_jobs(options.jobs);
  sweep.subspace_angles = config.sweep_angles;
  sweep.coercivity = config.sweep_coercivity;
  sweep.discrepancy = config.sweep_discrepancy;
  sweep.discrepancy_centers = config.sweep_discrepancy_centers;
  sweep.assembly = config.assembly_options();

  SpectralReport report;
  try {
    report = eig_error_table(grid, config.sweep_count, sweep);
  } catch (const Error& e) {
    err << "sweep failed: " << e.what() << "\n";
    return kExitFailed;
  }
  const auto verdicts = evaluate_acceptance(config.acceptance, report);

  try {
    if (wants(formats, "csv")) {
      auto file = open_output(options.out / "report.csv");
      write_report_csv(file, report, options.timings);
    }
    if (wants(formats, "json")) {
      auto file = open_output(options.out / "summary.json");
      file << sweep_summary(config, report, verdicts, options.timings).dump(2) << "\n";
    }
    if (wants(formats, "svg")) {
      auto file = open_output(options.out / "error_vs_t.svg");
      write_error_plot_svg(file, report);
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitFailed;
  }

  for (const auto& cell : report.cells) {
    out << "n=" << cell.n << " t=" << format_number(cell.t) << " seeds_ok=" << cell.seeds_ok;
    if (!cell.missing()) {
      out << " lambda:";
      for (double l : cell.mean_lambda) out << " " << format_number(l);
    }
    out << "\n";
    for (const auto& fault : cell.faults) out << "  fault: " << fault << "\n";
  }
  bool all = true;
  for (const auto& v : verdicts) {
    out << (v.passed ? "PASS " : "FAIL ") << v.check << " at n=" << v.n << " t=" << format_number(v.t) << ": "
        << format_number(v.value) << " (tolerance " << format_number(v.tolerance) << ")\n";
    all = all && v.passed;
  }
  return all ? kExitOk : kExitFailed;
}

int run_poisson(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  RunConfig config;
  std::vector<std::string> formats;
  double t = 0.0;
  try {
    config = load(options);
    formats = resolve_formats(options, {"csv", "json"});
    t = config.bandwidth();
    validate_density(config.manifold, config.density);
    prepare_output(options.out);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  }

  LaplacianSystem system;
  Eigen::VectorXd f;
  try {
    const auto cloud = sample(config.manifold, config.density, config.sample_n, config.sample_seed);
    f = poisson_source(config, cloud);
    system = assemble(cloud, config.kernel, t, config.assembly_options());
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "poisson failed: " << e.what() << "\n";
    return kExitFailed;
  }

  PoissonOptions solver;
  solver.tolerance = config.poisson.tolerance;
  solver.max_iterations = config.poisson.max_iterations;
  PoissonSolution solution;
  try {
    solution = solve_poisson(system, f, solver);
  } catch (const NumericalFailure& e) {
    const auto path = options.out / "residual_history.csv";
    std::ofstream file(path, std::ios::binary);
    file << "iteration,residual\n";
    for (std::size_t i = 0; i < e.history().size(); ++i) file << i + 1 << "," << format_number(e.history()[i]) << "\n";
    err << "poisson failed: " << e.what() << "\nresidual history: " << path.string() << "\n";
    return kExitFailed;
  } catch (const Error& e) {
    err << "poisson failed: " << e.what() << "\n";
    return kExitFailed;
  }

  const auto analytic = analytic_poisson(config, system.cloud, f);
  const double analytic_error = analytic ? (solution.u - *analytic).norm() / analytic->norm() : std::nan("");
  const bool ok = solution.residual < kPoissonResidualGate;

  try {
    if (wants(formats, "csv")) {
      auto file = open_output(options.out / "poisson.csv");
      write_poisson_csv(file, system.cloud, f, solution.u);
    }
    if (wants(formats, "json")) {
      Json summary{{"config", config_echo(config)},
                   {"n", system.size()},
                   {"t", number(t)},
                   {"f", config.poisson.expression},
                   {"residual", number(solution.residual)},
                   {"residual_gate", kPoissonResidualGate},
                   {"passed", ok},
                   {"iterations", solution.iterations},
                   {"rhs_projection_applied", solution.rhs_projection_applied},
                   {"residual_history", numbers(solution.residual_history)},
                   {"analytic_relative_error", number(analytic_error)}};
      auto file = open_output(options.out / "poisson_summary.json");
      file << summary.dump(2) << "\n";
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitFailed;
  }

  out << "n=" << system.size() << " t=" << format_number(t) << " f=" << config.poisson.expression
      << " iterations=" << solution.iterations << "\n";
  out << "residual = " << format_number(solution.residual) << " (gate " << format_number(kPoissonResidualGate) << ") "
      << (ok ? "PASS" : "FAIL") << "\n";
  if (analytic) out << "relative error vs analytic solution = " << format_number(analytic_error) << "\n";
  return ok ? kExitOk : kExitFailed;
}

}  // namespace pim::cli
