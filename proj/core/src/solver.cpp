#include "pim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "pim/error.hpp"

namespace pim {

Eigen::VectorXd EigResult::solution_operator_eigenvalues() const {
  Eigen::VectorXd out(eigenvalues.size());
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    out[i] = eigenvalues[i] > 0.0 ? 1.0 / eigenvalues[i] : std::numeric_limits<double>::infinity();
  return out;
}

namespace {

// Nonconstant eigenpairs of one connected component, lambda = 1/mu, mu > 0.
struct Block {
  std::vector<double> lambda;
  Eigen::MatrixXd vectors;  // local coordinates, M-normalized
  double regularization = 0.0;
  int iterations = 0;
};

Eigen::MatrixXd dense_block_matrix(const SymmetricMatrix& A, const std::vector<Eigen::Index>& idx,
                                   bool whole) {
  if (whole) return A.to_dense();
  const Eigen::MatrixXd full = A.to_dense();
  return full(idx, idx);
}

SparseMatrix sparse_block_matrix(const SymmetricMatrix& A, const std::vector<Eigen::Index>& idx,
                                 bool whole) {
  if (whole) return A.to_sparse();
  std::vector<Eigen::Index> local(static_cast<std::size_t>(A.rows()), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) local[static_cast<std::size_t>(idx[k])] = static_cast<Eigen::Index>(k);
  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> kept;
  for (const auto& e : A.triplets()) {
    const auto r = local[static_cast<std::size_t>(e.row())];
    const auto c = local[static_cast<std::size_t>(e.col())];
    if (r >= 0 && c >= 0) kept.emplace_back(r, c, e.value());
  }
  const auto m = static_cast<Eigen::Index>(idx.size());
  SparseMatrix out(m, m);
  out.setFromTriplets(kept.begin(), kept.end());
  out.makeCompressed();
  return out;
}

// H A H for the Householder reflector H = I - tau v v^T.
Eigen::MatrixXd reflect_both_sides(const Eigen::MatrixXd& A, const Eigen::VectorXd& v, double tau) {
  const Eigen::VectorXd p = A * v;
  const double vp = v.dot(p);
  Eigen::MatrixXd out = A;
  out.noalias() -= tau * (v * p.transpose() + p * v.transpose());
  out.noalias() += (tau * tau * vp) * (v * v.transpose());
  return out;
}

// Largest eigenvalues (descending) and vectors of a symmetric matrix.
void top_eigenpairs(const Eigen::MatrixXd& S, std::size_t want, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw NumericalFailure("dense symmetric eigensolver failed", {});
  const Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(want), S.rows());
  values = es.eigenvalues().tail(k).reverse();
  vectors = es.eigenvectors().rightCols(k).rowwise().reverse();
}

Block dense_block(const Eigen::MatrixXd& L, const Eigen::MatrixXd& M, std::size_t want) {
  const Eigen::Index m = L.rows();
  Block out;
  const Eigen::VectorXd c = M * Eigen::VectorXd::Ones(m);
  const double cnorm = c.norm();
  if (!(cnorm > 0.0)) throw NumericalFailure("mass matrix annihilates the constant vector", {});

  // Reflector mapping c to a multiple of e_0, so {u : c^T u = 0} = H span(e_1..e_{m-1}).
  Eigen::VectorXd v = c;
  v[0] += std::copysign(cnorm, c[0]);
  const double tau = 2.0 / v.squaredNorm();
  const Eigen::MatrixXd Lv = reflect_both_sides(L, v, tau).bottomRightCorner(m - 1, m - 1);
  const Eigen::MatrixXd Mv = reflect_both_sides(M, v, tau).bottomRightCorner(m - 1, m - 1);

  Eigen::LLT<Eigen::MatrixXd> chol(Lv);
  if (chol.info() != Eigen::Success) {
    out.regularization = 1e-12 * Lv.trace() / static_cast<double>(m - 1);
    Eigen::MatrixXd shifted = Lv;
    shifted.diagonal().array() += out.regularization;
    chol.compute(shifted);
    if (chol.info() != Eigen::Success)
      throw NumericalFailure("stiffness matrix is not positive definite on the constraint subspace", {});
  }
  const auto G = chol.matrixL();
  const Eigen::MatrixXd Y = G.solve(Mv);
  Eigen::MatrixXd S = G.solve(Y.transpose());
  S = 0.5 * (S + S.transpose()).eval();

  Eigen::VectorXd mu;
  Eigen::MatrixXd Z;
  top_eigenpairs(S, want, mu, Z);

  std::size_t kept = 0;
  while (kept < static_cast<std::size_t>(mu.size()) && mu[static_cast<Eigen::Index>(kept)] > 0.0) ++kept;
  out.vectors.resize(m, static_cast<Eigen::Index>(kept));
  for (std::size_t j = 0; j < kept; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(m);
    full.tail(m - 1) = chol.matrixU().solve(Z.col(jj));
    full -= (tau * v.dot(full)) * v;
    const double mass = full.dot(M * full);
    if (!(mass > 0.0)) throw NumericalFailure("eigenvector with nonpositive mass", {});
    out.vectors.col(jj) = full / std::sqrt(mass);
    out.lambda.push_back(1.0 / mu[jj]);
  }
  return out;
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& Y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
}

/// Factorization of the grounded stiffness: dense Cholesky when the kernel graph
/// is dense enough that sparse elimination only adds overhead, sparse LDLT otherwise.
class GroundedFactor {
 public:
  GroundedFactor(const SparseMatrix& A, double& regularization) {
    const double size = static_cast<double>(A.rows());
    dense_ = A.rows() <= kDenseFactorLimit && static_cast<double>(A.nonZeros()) > kDenseFactorFill * size * size;
    if (dense_) {
      Eigen::MatrixXd D(A);
      llt_.compute(D);
      if (llt_.info() != Eigen::Success) {
        regularization = 1e-12 * D.trace() / size;
        D.diagonal().array() += regularization;
        llt_.compute(D);
        if (llt_.info() != Eigen::Success) throw NumericalFailure("grounded stiffness factorization failed", {});
      }
      return;
    }
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success || (ldlt_.vectorD().array() <= 0.0).any()) {
      double trace = 0.0;
      for (Eigen::Index i = 0; i < A.rows(); ++i) trace += A.coeff(i, i);
      regularization = 1e-12 * trace / size;
      SparseMatrix identity(A.rows(), A.cols());
      identity.setIdentity();
      ldlt_.compute(A + regularization * identity);
      if (ldlt_.info() != Eigen::Success) throw NumericalFailure("grounded stiffness factorization failed", {});
    }
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    if (dense_) return llt_.solve(rhs);
    return ldlt_.solve(rhs);
  }

 private:
  static constexpr Eigen::Index kDenseFactorLimit = 6000;
  static constexpr double kDenseFactorFill = 0.1;

  bool dense_ = false;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

Block iterative_block(const SparseMatrix& L, const SparseMatrix& M, std::size_t want,
                      const SolverOptions& options, std::uint64_t seed) {
  const Eigen::Index m = L.rows();
  Block out;
  const Eigen::VectorXd c = M * Eigen::VectorXd::Ones(m);
  const double c_sum = c.sum();
  if (!(std::abs(c_sum) > 0.0)) throw NumericalFailure("mass matrix annihilates the constant vector", {});
  const auto project = [&](Eigen::MatrixXd& X) {
    const Eigen::RowVectorXd shift = (c.transpose() * X) / c_sum;
    X.rowwise() -= shift;
  };

  // L restricted to all nodes but the last is nonsingular for a connected component.
  const SparseMatrix grounded = L.topLeftCorner(m - 1, m - 1);
  const GroundedFactor factor(grounded, out.regularization);
  const auto apply_operator = [&](const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd rhs = M * X;
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(m, X.cols());
    Y.topRows(m - 1) = factor.solve(rhs.topRows(m - 1));
    project(Y);
    return Y;
  };

  const auto k = static_cast<Eigen::Index>(want);
  const Eigen::Index block = std::min<Eigen::Index>(m - 1, std::max<Eigen::Index>(2 * k + 10, k + 20));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(m, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < m; ++i) X(i, j) = normal(rng);
  project(X);
  X = orthonormal_columns(X);

  std::vector<double> history;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Eigen::MatrixXd Y = apply_operator(X);
    Y = orthonormal_columns(Y);
    project(Y);
    const Eigen::MatrixXd LY = L * Y;
    const Eigen::MatrixXd MY = M * Y;
    Eigen::MatrixXd Lp = Y.transpose() * LY;
    Eigen::MatrixXd Mp = Y.transpose() * MY;
    Lp = 0.5 * (Lp + Lp.transpose()).eval();
    Mp = 0.5 * (Mp + Mp.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(Mp, Lp);
    if (rr.info() != Eigen::Success) throw NumericalFailure("Rayleigh-Ritz step failed", history);
    // Ascending mu from the solver; reverse to put the dominant pairs first.
    const Eigen::MatrixXd Zr = rr.eigenvectors().rowwise().reverse();
    const Eigen::VectorXd mu = rr.eigenvalues().reverse();
    X = Y * Zr;
    const Eigen::MatrixXd LX = LY * Zr;
    const Eigen::MatrixXd MX = MY * Zr;

    double worst = 0.0;
    Eigen::Index positive_count = 0;
    for (Eigen::Index j = 0; j < k && mu[j] > 0.0; ++j, ++positive_count) {
      const double lam = 1.0 / mu[j];
      const double scale = LX.col(j).norm() + lam * MX.col(j).norm();
      worst = std::max(worst, (LX.col(j) - lam * MX.col(j)).norm() / scale);
    }
    history.push_back(worst);
    const bool enough = positive_count == k || positive_count == block;
    if (enough && worst <= options.tolerance) {
      out.iterations = it;
      out.vectors.resize(m, positive_count);
      for (Eigen::Index j = 0; j < positive_count; ++j) {
        const double mass = X.col(j).dot(MX.col(j));
        out.vectors.col(j) = X.col(j) / std::sqrt(mass);
        out.lambda.push_back(1.0 / mu[j]);
      }
      return out;
    }
  }
  throw NumericalFailure("subspace iteration did not converge in " + std::to_string(options.max_iterations) +
                             " iterations",
                         history);
}

}  // namespace

EigResult solve_pencil(const SymmetricMatrix& L, const SymmetricMatrix& M, const std::vector<int>& component,
                       int component_count, std::size_t count, const SolverOptions& options) {
  const auto n = static_cast<std::size_t>(L.rows());
  if (M.rows() != L.rows()) throw InvalidArgument("solve_pencil: matrix sizes differ");
  if (count == 0) throw InvalidArgument("solve_eig: count must be positive");
  if (count > n) throw InvalidArgument("solve_eig: count exceeds the number of points");
  if (component.size() != n || component_count < 1)
    throw InvalidArgument("solve_pencil: component labels do not match the matrix size");

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(component_count));
  for (std::size_t i = 0; i < n; ++i) members.at(static_cast<std::size_t>(component[i])).push_back(static_cast<Eigen::Index>(i));

  struct Pair {
    double lambda;
    int comp;
    Eigen::VectorXd local;
  };
  std::vector<Pair> pairs;
  EigResult result;
  bool used_dense = false, used_iterative = false;
  const bool whole = component_count == 1;

  for (int comp = 0; comp < component_count; ++comp) {
    const auto& idx = members[static_cast<std::size_t>(comp)];
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
    double const_mass = 0.0;
    Block block;
    const std::size_t want = std::min<std::size_t>(count - 1, idx.size() - 1);
    if (idx.size() <= options.dense_limit) {
      const Eigen::MatrixXd Lc = dense_block_matrix(L, idx, whole);
      const Eigen::MatrixXd Mc = dense_block_matrix(M, idx, whole);
      const_mass = Mc.sum();
      if (want > 0) block = dense_block(Lc, Mc, want);
      used_dense = true;
    } else {
      const SparseMatrix Lc = sparse_block_matrix(L, idx, whole);
      const SparseMatrix Mc = sparse_block_matrix(M, idx, whole);
      const_mass = (Mc * ones).sum();
      if (want > 0) block = iterative_block(Lc, Mc, want, options, options.seed + static_cast<std::uint64_t>(comp));
      used_iterative = true;
    }
    if (!(const_mass > 0.0)) throw NumericalFailure("constant vector has nonpositive mass", {});
    pairs.push_back({0.0, comp, ones / std::sqrt(const_mass)});
    for (std::size_t j = 0; j < block.lambda.size(); ++j)
      pairs.push_back({block.lambda[j], comp, block.vectors.col(static_cast<Eigen::Index>(j))});
    result.regularization_applied = std::max(result.regularization_applied, block.regularization);
    result.iterations = std::max(result.iterations, block.iterations);
  }

  if (pairs.size() < count)
    throw NumericalFailure("the pencil has only " + std::to_string(pairs.size()) +
                               " eigenpairs with nonnegative eigenvalue",
                           {});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.lambda < b.lambda; });

  result.eigenvalues.resize(static_cast<Eigen::Index>(count));
  result.eigenvectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto& idx = members[static_cast<std::size_t>(pairs[j].comp)];
    result.eigenvalues[jj] = pairs[j].lambda;
    for (std::size_t a = 0; a < idx.size(); ++a) result.eigenvectors(idx[a], jj) = pairs[j].local[static_cast<Eigen::Index>(a)];
  }
  const Eigen::MatrixXd LU = L.apply(result.eigenvectors);
  const Eigen::MatrixXd MU = M.apply(result.eigenvectors);
  result.residuals.resize(static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < result.eigenvalues.size(); ++j)
    result.residuals[j] =
        (LU.col(j) - result.eigenvalues[j] * MU.col(j)).norm() / result.eigenvectors.col(j).norm();
  result.method = used_dense && used_iterative ? "mixed" : (used_dense ? "dense" : "shift-invert");
  return result;
}

EigResult solve_eig(const LaplacianSystem& system, std::size_t count, const SolverOptions& options) {
  return solve_pencil(system.L, system.B, system.component, system.component_count, count, options);
}

namespace {

struct ComponentMeans {
  std::vector<int> label;
  std::vector<double> size;

  void remove(Eigen::VectorXd& v) const {
    std::vector<double> sums(size.size(), 0.0);
    for (Eigen::Index i = 0; i < v.size(); ++i) sums[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])] += v[i];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const auto c = static_cast<std::size_t>(label[static_cast<std::size_t>(i)]);
      v[i] -= sums[c] / size[c];
    }
  }
};

}  // namespace

PoissonSolution solve_poisson(const LaplacianSystem& system, const Eigen::VectorXd& f,
                              const PoissonOptions& options) {
  const auto n = static_cast<Eigen::Index>(system.size());
  if (f.size() != n) throw InvalidArgument("solve_poisson: f must have one value per point");
  if (!f.allFinite()) throw InvalidArgument("solve_poisson: f contains non-finite values");

  ComponentMeans means{system.component, std::vector<double>(static_cast<std::size_t>(system.component_count), 0.0)};
  for (int c : system.component) means.size[static_cast<std::size_t>(c)] += 1.0;

  PoissonSolution sol;
  Eigen::VectorXd b = system.B.apply(f);
  const Eigen::VectorXd raw = b;
  means.remove(b);
  sol.rhs_projection_applied = (raw - b).cwiseAbs().maxCoeff() > 0.0;
  sol.u = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return sol;

  const int max_it = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  for (int it = 1; it <= max_it; ++it) {
    const Eigen::VectorXd Ap = system.L.apply(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw NumericalFailure("conjugate gradients broke down", sol.residual_history);
    const double alpha = rr / pAp;
    sol.u += alpha * p;
    r -= alpha * Ap;
    means.remove(r);
    const double rr_new = r.squaredNorm();
    sol.residual_history.push_back(std::sqrt(rr_new) / bnorm);
    sol.iterations = it;
    if (std::sqrt(rr_new) <= options.tolerance * bnorm) break;
    p = r + (rr_new / rr) * p;
    means.remove(p);
    rr = rr_new;
    if (it == max_it)
      throw NumericalFailure("conjugate gradients did not converge in " + std::to_string(max_it) + " iterations",
                             sol.residual_history);
  }
  means.remove(sol.u);
  sol.residual = (system.L.apply(sol.u) - b).norm() / bnorm;
  return sol;
}

namespace {

struct KernelSums {
  double r_u = 0.0;
  double bar_f = 0.0;
  double r = 0.0;
};

KernelSums kernel_sums(const LaplacianSystem& system, const Eigen::VectorXd& weights_r,
                       const Eigen::VectorXd& weights_bar, PointView query) {
  if (static_cast<int>(query.size()) != system.cloud.dim())
    throw InvalidArgument("query dimension does not match the point cloud");
  KernelSums s;
  const double four_t = 4.0 * system.t;
  for (std::size_t j = 0; j < system.size(); ++j) {
    const double r = squared_distance(query, system.cloud.point(j)) / four_t;
    if (r > 1.0) continue;
    const double rv = system.kernel.R(r);
    const auto jj = static_cast<Eigen::Index>(j);
    s.r += rv;
    s.r_u += rv * weights_r[jj];
    s.bar_f += system.kernel.bar_R(r) * weights_bar[jj];
  }
  return s;
}

}  // namespace

double apply_Ttn(const LaplacianSystem& system, const PoissonSolution& solution, const Eigen::VectorXd& f,
                 PointView query) {
  const auto n = static_cast<Eigen::Index>(system.size());
  if (f.size() != n || solution.u.size() != n) throw InvalidArgument("apply_Ttn: vector sizes do not match");
  const KernelSums s = kernel_sums(system, solution.u, f, query);
  if (!(s.r > 0.0)) throw OutOfSupport("apply_Ttn: no sample within the kernel support of the query");
  return (s.r_u + system.t * s.bar_f) / s.r;
}

double apply_Ttn(const LaplacianSystem& system, const Eigen::VectorXd& f, PointView query) {
  return apply_Ttn(system, solve_poisson(system, f), f, query);
}

double extend_eigvec(const LaplacianSystem& system, const Eigen::VectorXd& u, double lambda, PointView query) {
  if (u.size() != static_cast<Eigen::Index>(system.size()))
    throw InvalidArgument("extend_eigvec: eigenvector size does not match");
  const KernelSums s = kernel_sums(system, u, u, query);
  if (!(s.r > 0.0)) throw OutOfSupport("extend_eigvec: no sample within the kernel support of the query");
  return (lambda * system.t * s.bar_f + s.r_u) / s.r;
}

std::vector<std::vector<std::size_t>> group_eigenvalues(const Eigen::VectorXd& eigenvalues, double rel_gap) {
  std::vector<std::vector<std::size_t>> groups;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double lam = eigenvalues[i];
    if (!groups.empty()) {
      const double prev = eigenvalues[static_cast<Eigen::Index>(groups.back().back())];
      if (std::abs(lam - prev) <= rel_gap * (1.0 + std::abs(lam))) {
        groups.back().push_back(static_cast<std::size_t>(i));
        continue;
      }
    }
    groups.push_back({static_cast<std::size_t>(i)});
  }
  return groups;
}

}  // namespace pim
