#pragma once

#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "pim/analysis.hpp"
#include "pim/assembly.hpp"
#include "pim/geometry.hpp"
#include "pim/solver.hpp"

namespace pim {

/// Shortest decimal form that round-trips to the same double; "nan"/"inf" otherwise.
std::string format_number(double value);

/// x1..xd, p
void write_point_cloud_csv(std::ostream& out, const PointCloud& cloud);
/// i, j, value for every stored entry
void write_triplets_csv(std::ostream& out, const SymmetricMatrix& matrix);
/// index, lambda, residual
void write_eigenvalues_csv(std::ostream& out, const EigResult& eig);
/// One row per point, columns u0..u{count-1}.
void write_eigenvectors_csv(std::ostream& out, const EigResult& eig);
/// i, x1..xd, f, u
void write_poisson_csv(std::ostream& out, const PointCloud& cloud, const Eigen::VectorXd& f,
                       const Eigen::VectorXd& u);

/// n, t, seed, eig_index, lambda_discrete, lambda_reference, abs_error,
/// subspace_angle, coercivity, discrepancy, wall_ms. Timings are left empty
/// unless requested.
void write_report_csv(std::ostream& out, const SpectralReport& report, bool include_timings = false);

/// Log-log plot of the seed-averaged error against t at the largest n, one series per eigenvalue index.
void write_error_plot_svg(std::ostream& out, const SpectralReport& report);

}  // namespace pim
