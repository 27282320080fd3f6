#include "pim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "pim/error.hpp"

namespace pim {

void SweepGrid::validate() const {
  if (n_values.empty()) throw InvalidArgument("sweep grid: n_values is empty");
  if (t_values.empty()) throw InvalidArgument("sweep grid: t_values is empty");
  if (seeds.empty()) throw InvalidArgument("sweep grid: seeds is empty");
  for (std::size_t n : n_values)
    if (n < 2) throw InvalidArgument("sweep grid: every n must be at least 2");
  for (double t : t_values)
    if (!(t > 0.0) || t > kMaxSweepBandwidth)
      throw InvalidArgument("sweep grid: t must lie in (0, 0.25], got " + std::to_string(t));
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("fit_loglog: x and y differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  LogLogFit fit;
  fit.points = lx.size();
  if (lx.size() < 2) return fit;
  const double k = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.insufficient_points = false;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

const CellSummary* SpectralReport::find(std::size_t n, double t) const {
  for (const auto& cell : cells)
    if (cell.n == n && cell.t == t) return &cell;
  return nullptr;
}

void SpectralReport::refit() {
  fit_vs_t.assign(count, LogLogFit{});
  fit_vs_n.assign(count, LogLogFit{});
  if (cells.empty()) return;
  const std::size_t n_max = *std::max_element(grid.n_values.begin(), grid.n_values.end());
  const int k = grid.manifold.intrinsic_dim();
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> ts, et;
    for (const auto& cell : cells) {
      if (cell.n != n_max || cell.missing() || i >= cell.mean_abs_error.size()) continue;
      ts.push_back(cell.t);
      et.push_back(cell.mean_abs_error[i]);
    }
    fit_vs_t[i] = fit_loglog(ts, et);

    std::vector<double> ns, en;
    for (std::size_t n : grid.n_values) {
      const double target = std::log(default_bandwidth(n, k));
      const CellSummary* best = nullptr;
      for (const auto& cell : cells) {
        if (cell.n != n || cell.missing() || i >= cell.mean_abs_error.size()) continue;
        if (!best || std::abs(std::log(cell.t) - target) < std::abs(std::log(best->t) - target)) best = &cell;
      }
      if (best) {
        ns.push_back(static_cast<double>(n));
        en.push_back(best->mean_abs_error[i]);
      }
    }
    fit_vs_n[i] = fit_loglog(ns, en);
  }
}

std::vector<std::vector<std::size_t>> reference_groups(const ReferenceSpectrum& reference, std::size_t count) {
  std::vector<std::vector<std::size_t>> groups;
  const std::size_t limit = std::min(count, reference.size());
  for (std::size_t i = 0; i < limit; ++i) {
    const double lam = reference.eigenvalues[i];
    if (!groups.empty()) {
      const double prev = reference.eigenvalues[groups.back().back()];
      if (std::abs(lam - prev) <= 1e-9 * (1.0 + std::abs(lam))) {
        groups.back().push_back(i);
        continue;
      }
    }
    groups.push_back({i});
  }
  return groups;
}

namespace {

Eigen::MatrixXd b_orthonormal_basis(const SymmetricMatrix& B, const Eigen::MatrixXd& X, const char* which) {
  Eigen::MatrixXd gram = X.transpose() * B.apply(X);
  gram = 0.5 * (gram + gram.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> chol(gram);
  if (chol.info() != Eigen::Success)
    throw NumericalFailure(std::string("subspace_angle: ") + which + " basis has no positive definite B-Gram matrix", {});
  // Q = X R^{-1} with gram = R^T R.
  return chol.matrixU().solve<Eigen::OnTheRight>(X);
}

}  // namespace

double subspace_angle(const SymmetricMatrix& B, const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
  if (U.rows() != B.rows() || V.rows() != B.rows())
    throw InvalidArgument("subspace_angle: basis rows must match the matrix size");
  if (U.cols() != V.cols())
    throw MultiplicityMismatch(static_cast<std::size_t>(U.cols()), static_cast<std::size_t>(V.cols()));
  if (U.cols() == 0) throw InvalidArgument("subspace_angle: empty basis");
  const Eigen::MatrixXd Qu = b_orthonormal_basis(B, U, "first");
  const Eigen::MatrixXd Qv = b_orthonormal_basis(B, V, "second");
  const Eigen::MatrixXd cross = Qu.transpose() * B.apply(Qv);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
  const double smallest = svd.singularValues().minCoeff();
  return std::acos(std::clamp(smallest, 0.0, 1.0));
}

double subspace_angle(const LaplacianSystem& system, const EigResult& eig, const std::vector<std::size_t>& group,
                      const ReferenceSpectrum& reference) {
  if (group.empty()) throw InvalidArgument("subspace_angle: empty group");
  for (std::size_t idx : group)
    if (idx >= eig.count() || idx >= reference.size())
      throw InvalidArgument("subspace_angle: group index " + std::to_string(idx) + " out of range");
  const double lead = reference.eigenvalues[group.front()];
  std::size_t multiplicity = 0;
  for (double lam : reference.eigenvalues)
    if (std::abs(lam - lead) <= 1e-9 * (1.0 + std::abs(lead))) ++multiplicity;
  if (multiplicity != group.size()) throw MultiplicityMismatch(group.size(), multiplicity);

  const auto n = static_cast<Eigen::Index>(system.size());
  const auto g = static_cast<Eigen::Index>(group.size());
  Eigen::MatrixXd U(n, g), V(n, g);
  for (Eigen::Index c = 0; c < g; ++c) {
    const std::size_t idx = group[static_cast<std::size_t>(c)];
    U.col(c) = eig.eigenvectors.col(static_cast<Eigen::Index>(idx));
    for (Eigen::Index i = 0; i < n; ++i) V(i, c) = reference.eigenfunction(idx, system.cloud.point(static_cast<std::size_t>(i)));
  }
  return subspace_angle(system.B, U, V);
}

double discrepancy(const PointCloud& cloud, const KernelSpec& kernel, double t, const Points& centers,
                   const QuadratureMeasure& measure) {
  if (!(t > 0.0)) throw InvalidArgument("discrepancy: t must be positive");
  if (measure.nodes.rows() != static_cast<Eigen::Index>(measure.mass.size()))
    throw InvalidArgument("discrepancy: quadrature nodes and masses differ in count");
  if (cloud.size() == 0) throw InvalidArgument("discrepancy: empty point cloud");
  const double four_t = 4.0 * t;
  const auto kernel_at = [&](PointView x, PointView y) {
    const double r = squared_distance(x, y) / four_t;
    return r <= 1.0 ? kernel.R(r) : 0.0;
  };
  double worst = 0.0;
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const PointView x = row_view(centers, c);
    double integral = 0.0;
    for (Eigen::Index q = 0; q < measure.nodes.rows(); ++q)
      integral += measure.mass[static_cast<std::size_t>(q)] * kernel_at(x, row_view(measure.nodes, q));
    double empirical = 0.0;
    for (std::size_t j = 0; j < cloud.size(); ++j) empirical += kernel_at(x, cloud.point(j));
    empirical /= static_cast<double>(cloud.size());
    worst = std::max(worst, std::abs(integral - empirical));
  }
  return worst;
}

QuadratureMeasure density_measure(const ManifoldModel& manifold, const DensitySpec& density) {
  const std::size_t m = manifold.shape() == Shape::sphere ? 20000 : 4000;
  QuadratureGrid grid = quadrature_grid(manifold, m);
  QuadratureMeasure measure;
  measure.mass.resize(grid.weights.size());
  for (Eigen::Index q = 0; q < grid.nodes.rows(); ++q)
    measure.mass[static_cast<std::size_t>(q)] =
        grid.weights[static_cast<std::size_t>(q)] * density(manifold, row_view(grid.nodes, q));
  measure.nodes = std::move(grid.nodes);
  return measure;
}

double discrepancy(const PointCloud& cloud, const KernelSpec& kernel, double t, const ManifoldModel& manifold,
                   const DensitySpec& density, std::size_t centers) {
  if (centers < kMinDiscrepancyCenters) throw InvalidArgument("discrepancy: at least 8 centers are required");
  const QuadratureGrid grid = quadrature_grid(manifold, centers);
  return discrepancy(cloud, kernel, t, grid.nodes, density_measure(manifold, density));
}

double coercivity_constant(const LaplacianSystem& system, const SolverOptions& options) {
  const std::size_t n = system.size();
  if (system.disconnected || n < 2) return 0.0;
  SparseMatrix identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  identity.setIdentity();
  const EigResult pencil =
      solve_pencil(system.L, SymmetricMatrix(std::move(identity)), system.component, system.component_count, 2, options);
  return 2.0 * system.normalizing_constant() / static_cast<double>(n) * pencil.eigenvalues[1];
}

double rayleigh(const LaplacianSystem& system, const Eigen::VectorXd& u) {
  if (u.size() != static_cast<Eigen::Index>(system.size())) throw InvalidArgument("rayleigh: vector size mismatch");
  const double mass = u.dot(system.B.apply(u));
  if (!(mass > 0.0)) throw InvalidArgument("rayleigh: u^T B u must be positive");
  return u.dot(system.L.apply(u)) / mass;
}

namespace {

struct JobResult {
  bool ok = false;
  std::string fault;
  std::vector<double> lambda;
  std::vector<double> angle;
  double coercivity = std::numeric_limits<double>::quiet_NaN();
  double discrepancy = std::numeric_limits<double>::quiet_NaN();
  double w_min = 0.0;
  double w_max = 0.0;
  double wall_ms = 0.0;
};

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

SpectralReport eig_error_table(const SweepGrid& grid, std::size_t count, const SweepOptions& options) {
  grid.validate();
  if (count == 0) throw InvalidArgument("eig_error_table: count must be positive");
  validate_density(grid.manifold, grid.density);
  if (count > kMaxReferenceCount) throw InvalidArgument("eig_error_table: count exceeds 64");
  // A few extra reference values reveal groups that count cuts in half.
  const ReferenceSpectrum reference =
      reference_spectrum(grid.manifold, grid.density, std::min(count + 16, kMaxReferenceCount));
  const auto groups = reference_groups(reference, count);
  const QuadratureMeasure measure =
      options.discrepancy ? density_measure(grid.manifold, grid.density) : QuadratureMeasure{};
  const Points centers =
      options.discrepancy ? quadrature_grid(grid.manifold, std::max(options.discrepancy_centers, kMinDiscrepancyCenters)).nodes
                          : Points{};

  struct Job {
    std::size_t n;
    double t;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t n : grid.n_values)
    for (double t : grid.t_values)
      for (std::uint64_t seed : grid.seeds) jobs.push_back({n, t, seed});

  std::vector<JobResult> results(jobs.size());
  std::mutex accumulator;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      JobResult res;
      const auto start = std::chrono::steady_clock::now();
      try {
        if (count > job.n) throw InvalidArgument("count exceeds n");
        const PointCloud cloud = sample(grid.manifold, grid.density, job.n, job.seed);
        const LaplacianSystem sys = assemble(cloud, grid.kernel, job.t, options.assembly);
        const EigResult eig = solve_eig(sys, count, options.solver);
        res.lambda.assign(eig.eigenvalues.data(), eig.eigenvalues.data() + eig.eigenvalues.size());
        res.angle.assign(count, std::numeric_limits<double>::quiet_NaN());
        if (options.subspace_angles) {
          for (const auto& group : groups) {
            if (group.back() + 1 == count && reference.size() > count &&
                std::abs(reference.eigenvalues[count] - reference.eigenvalues[group.back()]) <=
                    1e-9 * (1.0 + reference.eigenvalues[count]))
              continue;  // group truncated by count
            const double angle = subspace_angle(sys, eig, group, reference);
            for (std::size_t idx : group) res.angle[idx] = angle;
          }
        }
        if (options.coercivity) res.coercivity = coercivity_constant(sys, options.solver);
        if (options.discrepancy) res.discrepancy = discrepancy(cloud, grid.kernel, job.t, centers, measure);
        res.w_min = sys.w.minCoeff();
        res.w_max = sys.w.maxCoeff();
        res.ok = true;
      } catch (const std::exception& e) {
        res.ok = false;
        res.fault = e.what();
      }
      res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      const std::lock_guard<std::mutex> lock(accumulator);
      results[j] = std::move(res);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
  }

  SpectralReport report;
  report.grid = grid;
  report.count = count;
  report.reference = reference.eigenvalues;
  report.reference_provenance = reference.provenance;
  std::size_t j = 0;
  for (std::size_t n : grid.n_values) {
    for (double t : grid.t_values) {
      CellSummary cell;
      cell.n = n;
      cell.t = t;
      cell.mean_lambda.assign(count, 0.0);
      cell.mean_abs_error.assign(count, 0.0);
      cell.mean_angle.assign(count, 0.0);
      cell.w_min = std::numeric_limits<double>::infinity();
      cell.w_max = -std::numeric_limits<double>::infinity();
      std::vector<double> discrepancies;
      for (std::size_t s = 0; s < grid.seeds.size(); ++s, ++j) {
        const JobResult& res = results[j];
        cell.wall_ms += res.wall_ms;
        if (!res.ok) {
          cell.faults.push_back("seed " + std::to_string(jobs[j].seed) + ": " + res.fault);
          continue;
        }
        ++cell.seeds_ok;
        for (std::size_t i = 0; i < count; ++i) {
          ReportRow row;
          row.n = n;
          row.t = t;
          row.seed = jobs[j].seed;
          row.eig_index = i;
          row.lambda_discrete = res.lambda[i];
          row.lambda_reference = reference.eigenvalues[i];
          row.abs_error = std::abs(row.lambda_discrete - row.lambda_reference);
          row.subspace_angle = res.angle[i];
          row.coercivity = res.coercivity;
          row.discrepancy = res.discrepancy;
          row.wall_ms = res.wall_ms;
          report.rows.push_back(row);
          cell.mean_lambda[i] += row.lambda_discrete;
          cell.mean_abs_error[i] += row.abs_error;
          cell.mean_angle[i] += row.subspace_angle;
        }
        cell.coercivity += res.coercivity;
        discrepancies.push_back(res.discrepancy);
        cell.w_min = std::min(cell.w_min, res.w_min);
        cell.w_max = std::max(cell.w_max, res.w_max);
      }
      if (cell.seeds_ok > 0) {
        const double k = static_cast<double>(cell.seeds_ok);
        for (std::size_t i = 0; i < count; ++i) {
          cell.mean_lambda[i] /= k;
          cell.mean_abs_error[i] /= k;
          cell.mean_angle[i] /= k;
        }
        cell.coercivity /= k;
        cell.discrepancy = median(discrepancies);
      } else {
        cell.w_min = cell.w_max = std::numeric_limits<double>::quiet_NaN();
        cell.coercivity = cell.discrepancy = std::numeric_limits<double>::quiet_NaN();
      }
      report.cells.push_back(std::move(cell));
    }
  }
  report.refit();
  return report;
}

}  // namespace pim
