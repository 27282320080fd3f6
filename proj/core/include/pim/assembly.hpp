#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "pim/geometry.hpp"
#include "pim/kernel.hpp"

namespace pim {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, std::ptrdiff_t>;

enum class Storage { dense, sparse };

const char* to_string(Storage storage);

/// Symmetric n x n matrix held densely or in compressed sparse form.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Eigen::MatrixXd dense) : data_(std::move(dense)) {}
  explicit SymmetricMatrix(SparseMatrix sparse) : data_(std::move(sparse)) {}

  Eigen::Index rows() const;
  bool is_dense() const noexcept { return std::holds_alternative<Eigen::MatrixXd>(data_); }

  double coeff(Eigen::Index i, Eigen::Index j) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd to_dense() const;
  SparseMatrix to_sparse() const;
  /// Stored entries (dense: every nonzero) as (row, col, value), row-major order.
  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> triplets() const;
  double trace() const;
  double max_abs_row_sum() const;

 private:
  std::variant<Eigen::MatrixXd, SparseMatrix> data_;
};

/**
 * Discrete operators of the kernel eigenproblem for one point cloud:
 *
 *   L_ij = -(1/t) R(|x_i-x_j|^2/4t) (i != j),  L_ii = -sum_{j != i} L_ij
 *   B_ij = bar-R(|x_i-x_j|^2/4t)               (including j = i)
 *   w_i  = C_t/n sum_j R(|x_i-x_j|^2/4t),       C_t = (4 pi t)^{-k/2}
 *
 * No 1/n factors appear in L and B. Off-diagonal weights of L are rounded to
 * a common power-of-two grid so that every row of L sums to exactly zero in
 * any summation order.
 */
struct LaplacianSystem {
  SymmetricMatrix L;
  SymmetricMatrix B;
  Eigen::VectorXd w;
  double t = 0.0;
  KernelSpec kernel = KernelSpec::wendland41();
  PointCloud cloud;
  Storage storage = Storage::dense;
  bool disconnected = false;
  /// Connected component label of each point (kernel graph of L and B).
  std::vector<int> component;
  int component_count = 0;
  /// Number of stored off-diagonal pairs (i, j), i != j, within 2 sqrt(t).
  std::size_t pair_count = 0;

  std::size_t size() const noexcept { return cloud.size(); }
  /// C_t = (4 pi t)^{-k/2} with k the intrinsic dimension.
  double normalizing_constant() const;
};

struct AssemblyOptions {
  /// Dense storage and brute-force pairs for n <= threshold; cell list above.
  std::size_t dense_threshold = 512;
  std::optional<Storage> force_storage;
  /// Worker threads for the row loop (rows are independent).
  unsigned threads = 1;
};

LaplacianSystem assemble(const PointCloud& cloud, const KernelSpec& kernel, double t,
                         const AssemblyOptions& options = {});

/// w_{t,n}(x) at arbitrary points, C_t included.
std::vector<double> w_field(const PointCloud& cloud, const KernelSpec& kernel, double t,
                            const Points& queries);

/// C_t = (4 pi t)^{-k/2}.
double kernel_normalizer(double t, int intrinsic_dim);

/// Bandwidth heuristic t = c n^{-2/(2k+7)}.
double default_bandwidth(std::size_t n, int intrinsic_dim, double c = 1.0);

}  // namespace pim
