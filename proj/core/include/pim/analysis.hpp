#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pim/assembly.hpp"
#include "pim/geometry.hpp"
#include "pim/kernel.hpp"
#include "pim/solver.hpp"

namespace pim {

inline constexpr double kMaxSweepBandwidth = 0.25;

/// Experimental axes of a convergence sweep.
struct SweepGrid {
  ManifoldModel manifold = ManifoldModel::interval(0.0, 1.0);
  DensitySpec density = DensitySpec::uniform();
  KernelSpec kernel = KernelSpec::wendland41();
  std::vector<std::size_t> n_values;
  std::vector<double> t_values;
  std::vector<std::uint64_t> seeds;

  /// Throws InvalidArgument when an axis is empty or a bandwidth lies outside (0, 0.25].
  void validate() const;
  std::size_t cell_count() const noexcept { return n_values.size() * t_values.size(); }
};

struct SweepOptions {
  unsigned jobs = 1;
  bool subspace_angles = true;
  bool coercivity = true;
  bool discrepancy = true;
  std::size_t discrepancy_centers = 256;
  AssemblyOptions assembly;
  SolverOptions solver;
};

/// One (cell, seed, eigenvalue index) measurement.
struct ReportRow {
  std::size_t n = 0;
  double t = 0.0;
  std::uint64_t seed = 0;
  std::size_t eig_index = 0;
  double lambda_discrete = 0.0;
  double lambda_reference = 0.0;
  double abs_error = 0.0;
  double subspace_angle = 0.0;  ///< NaN when the index's group is cut off by count
  double coercivity = 0.0;      ///< NaN when not computed
  double discrepancy = 0.0;     ///< NaN when not computed
  double wall_ms = 0.0;
};

/// Seed-aggregated view of one (n, t) cell.
struct CellSummary {
  std::size_t n = 0;
  double t = 0.0;
  std::size_t seeds_ok = 0;
  std::vector<std::string> faults;  ///< "seed <s>: <message>" per failed seed
  std::vector<double> mean_lambda;
  std::vector<double> mean_abs_error;
  std::vector<double> mean_angle;
  double coercivity = 0.0;          ///< mean over seeds
  double discrepancy = 0.0;         ///< median over seeds
  double w_min = 0.0;
  double w_max = 0.0;
  double wall_ms = 0.0;

  bool missing() const noexcept { return seeds_ok == 0; }
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  bool insufficient_points = true;
};

/// Least squares of log y on log x over the finite, positive pairs.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct SpectralReport {
  SweepGrid grid;
  std::size_t count = 0;
  std::vector<double> reference;
  Provenance reference_provenance = Provenance::closed_form;
  std::vector<ReportRow> rows;
  std::vector<CellSummary> cells;  ///< n-major, t in grid order
  /// Per eigenvalue index: error vs t at n = max n, and error vs n at the
  /// bandwidth closest to the default heuristic for each n.
  std::vector<LogLogFit> fit_vs_t;
  std::vector<LogLogFit> fit_vs_n;

  const CellSummary* find(std::size_t n, double t) const;
  /// Recomputes the fits from the cell summaries.
  void refit();
};

SpectralReport eig_error_table(const SweepGrid& grid, std::size_t count, const SweepOptions& options = {});

/// Largest principal angle between span(U) and span(V) in the B inner product.
double subspace_angle(const SymmetricMatrix& B, const Eigen::MatrixXd& U, const Eigen::MatrixXd& V);

/// Angle between the eigenvectors listed in group and the reference
/// eigenfunctions with the same indices, sampled at the points.
double subspace_angle(const LaplacianSystem& system, const EigResult& eig, const std::vector<std::size_t>& group,
                      const ReferenceSpectrum& reference);

/// Reference eigenvalue index groups of equal eigenvalues within the first count indices.
std::vector<std::vector<std::size_t>> reference_groups(const ReferenceSpectrum& reference, std::size_t count);

/// Discrete measure sum_q mass_q delta_{node_q} standing in for p(y) dy.
struct QuadratureMeasure {
  Points nodes;
  std::vector<double> mass;
};

inline constexpr std::size_t kDefaultDiscrepancyCenters = 256;
inline constexpr std::size_t kMinDiscrepancyCenters = 8;

/// max over centers x of |sum_q mass_q R(|x-y_q|^2/4t) - (1/n) sum_j R(|x-x_j|^2/4t)|.
double discrepancy(const PointCloud& cloud, const KernelSpec& kernel, double t, const Points& centers,
                   const QuadratureMeasure& measure);

double discrepancy(const PointCloud& cloud, const KernelSpec& kernel, double t, const ManifoldModel& manifold,
                   const DensitySpec& density, std::size_t centers = kDefaultDiscrepancyCenters);

/// Density-weighted quadrature used by discrepancy().
QuadratureMeasure density_measure(const ManifoldModel& manifold, const DensitySpec& density);

/// Discrete Poincare constant (2 C_t / n) * min_{1^T u = 0} u^T L u / u^T u; 0 if disconnected.
double coercivity_constant(const LaplacianSystem& system, const SolverOptions& options = {});

/// u^T L u / u^T B u.
double rayleigh(const LaplacianSystem& system, const Eigen::VectorXd& u);

}  // namespace pim
