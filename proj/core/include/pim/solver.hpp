#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pim/assembly.hpp"

namespace pim {

/**
 * Smallest eigenpairs of L u = lambda B u, ascending.
 *
 * Eigenvectors are B-orthonormal. The constant vector on each connected
 * component carries lambda = 0; the remaining pairs come from the reciprocal
 * pencil B u = mu L u on {u : 1^T B u = 0}, where L is positive definite, so
 * lambda = 1/mu is real. Pairs with mu <= 0 have no counterpart in the limit
 * problem and are not reported.
 */
struct EigResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  ///< n x count, B-orthonormal columns
  Eigen::VectorXd residuals;     ///< |L u - lambda B u| / |u|
  double regularization_applied = 0.0;
  std::string method;  ///< "dense", "shift-invert" or "mixed"
  int iterations = 0;

  std::size_t count() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  /// Eigenvalues of the solution operator T_{t,n}: 1/lambda (infinite for lambda = 0).
  Eigen::VectorXd solution_operator_eigenvalues() const;
};

struct SolverOptions {
  /// Components up to this size are solved densely; larger ones iteratively.
  std::size_t dense_limit = 400;
  int max_iterations = 400;
  /// Relative residual target of the iterative path.
  double tolerance = 1e-11;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

EigResult solve_eig(const LaplacianSystem& system, std::size_t count, const SolverOptions& options = {});

/**
 * Lower-level entry: same algorithm for an arbitrary PSD "stiffness" L with
 * constant null vectors per component and a symmetric "mass" M.
 */
EigResult solve_pencil(const SymmetricMatrix& L, const SymmetricMatrix& M,
                       const std::vector<int>& component, int component_count, std::size_t count,
                       const SolverOptions& options = {});

struct PoissonSolution {
  Eigen::VectorXd u;  ///< mean zero on every component
  bool rhs_projection_applied = false;
  int iterations = 0;
  double residual = 0.0;  ///< relative residual of the projected system
  std::vector<double> residual_history;
};

struct PoissonOptions {
  double tolerance = 1e-12;
  /// 0 means 10 n.
  int max_iterations = 0;
};

/// Point-integral Poisson system L u = B f, solved on the mean-zero subspace by projected CG.
PoissonSolution solve_poisson(const LaplacianSystem& system, const Eigen::VectorXd& f,
                              const PoissonOptions& options = {});

/// T_{t,n}(f) at an arbitrary point, given the Poisson solution for f.
double apply_Ttn(const LaplacianSystem& system, const PoissonSolution& solution,
                 const Eigen::VectorXd& f, PointView query);
double apply_Ttn(const LaplacianSystem& system, const Eigen::VectorXd& f, PointView query);

/// I_lambda(u) at an arbitrary point; reproduces u at the samples.
double extend_eigvec(const LaplacianSystem& system, const Eigen::VectorXd& u, double lambda,
                     PointView query);

/// Default relative gap below which neighbouring eigenvalues form one group.
inline constexpr double kMultiplicityGap = 1e-3;

/// Consecutive eigenvalues within rel_gap (1 + lambda) of each other share a group.
std::vector<std::vector<std::size_t>> group_eigenvalues(const Eigen::VectorXd& eigenvalues,
                                                        double rel_gap = kMultiplicityGap);

}  // namespace pim
