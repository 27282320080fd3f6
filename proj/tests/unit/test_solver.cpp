#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "pim/analysis.hpp"
#include "pim/error.hpp"
#include "pim/solver.hpp"

namespace {

using pim::DensitySpec;
using pim::KernelSpec;
using pim::ManifoldModel;
constexpr double kPi = std::numbers::pi;

pim::LaplacianSystem system_on(const ManifoldModel& m, std::size_t n, double t, std::uint64_t seed) {
  return pim::assemble(pim::sample(m, DensitySpec::uniform(), n, seed), KernelSpec::wendland41(), t);
}

pim::LaplacianSystem two_distant_points() {
  pim::Points pts(2, 1);
  pts << 0.0, 10.0;
  return pim::assemble(pim::PointCloud::from_points(ManifoldModel::interval(0, 10), pts), KernelSpec::wendland41(), 0.01);
}

void expect_b_orthonormal(const pim::LaplacianSystem& sys, const pim::EigResult& eig) {
  const Eigen::MatrixXd G = eig.eigenvectors.transpose() * sys.B.apply(eig.eigenvectors);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(G.rows(), G.cols());
  EXPECT_LT((G - I).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveEig, DisconnectedTwoPointSystem) {
  const auto sys = two_distant_points();
  const auto eig = pim::solve_eig(sys, 2);
  ASSERT_EQ(eig.count(), 2u);
  EXPECT_EQ(eig.eigenvalues[0], 0.0);
  EXPECT_EQ(eig.eigenvalues[1], 0.0);
  expect_b_orthonormal(sys, eig);
}

TEST(SolveEig, CountValidation) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 20, 0.05, 1);
  EXPECT_THROW(pim::solve_eig(sys, 0), pim::InvalidArgument);
  EXPECT_THROW(pim::solve_eig(sys, 21), pim::InvalidArgument);
}

TEST(SolveEig, ContractOnDensePath) {
  const auto sys = system_on(ManifoldModel::circle(1), 300, 0.02, 4);
  const auto eig = pim::solve_eig(sys, 8);
  EXPECT_EQ(eig.method, "dense");
  expect_b_orthonormal(sys, eig);
  const double bscale = sys.B.max_abs_row_sum();
  for (Eigen::Index i = 0; i < 8; ++i) {
    EXPECT_LE(eig.residuals[i], 1e-6 * (1 + eig.eigenvalues[i]) * bscale);
    if (i > 0) EXPECT_GE(eig.eigenvalues[i], eig.eigenvalues[i - 1]);
  }
  EXPECT_LE(std::abs(eig.eigenvalues[0]), 1e-6);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(300);
  EXPECT_LT(pim::subspace_angle(sys.B, eig.eigenvectors.col(0), ones), 1e-3);
}

TEST(SolveEig, ContractOnIterativePath) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 900, 0.01, 4);
  pim::SolverOptions opts;
  opts.dense_limit = 100;
  const auto eig = pim::solve_eig(sys, 7, opts);
  EXPECT_EQ(eig.method, "shift-invert");
  expect_b_orthonormal(sys, eig);
  const double bscale = sys.B.max_abs_row_sum();
  for (Eigen::Index i = 0; i < 7; ++i) EXPECT_LE(eig.residuals[i], 1e-6 * (1 + eig.eigenvalues[i]) * bscale);
  EXPECT_LE(std::abs(eig.eigenvalues[0]), 1e-6);
}

TEST(SolveEig, DenseAndIterativePathsAgree) {
  const auto sys = system_on(ManifoldModel::circle(1), 380, 0.02, 12);
  pim::SolverOptions iterative;
  iterative.dense_limit = 10;
  const auto a = pim::solve_eig(sys, 9);
  const auto b = pim::solve_eig(sys, 9, iterative);
  for (Eigen::Index i = 1; i < 9; ++i) EXPECT_NEAR(a.eigenvalues[i], b.eigenvalues[i], 1e-8 * a.eigenvalues[i]);
}

TEST(SolveEig, MatchesIndependentGeneralizedSolve) {
  // Oracle: orthonormal basis Q of {c^T u = 0} from a QR factorization, then
  // Eigen's generalized solver on (Q^T B Q, Q^T L Q), keeping positive mu.
  const auto sys = system_on(ManifoldModel::interval(0, 1), 150, 0.02, 3);
  const Eigen::MatrixXd L = sys.L.to_dense(), B = sys.B.to_dense();
  const Eigen::VectorXd c = B * Eigen::VectorXd::Ones(150);
  Eigen::MatrixXd C(150, 1);
  C.col(0) = c;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
  const Eigen::MatrixXd Qfull = qr.householderQ();
  const Eigen::MatrixXd Q = Qfull.rightCols(149);
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Q.transpose() * B * Q, Q.transpose() * L * Q);
  std::vector<double> lambdas{0.0};
  for (Eigen::Index i = 148; i >= 0 && lambdas.size() < 6; --i)
    if (ges.eigenvalues()[i] > 0) lambdas.push_back(1.0 / ges.eigenvalues()[i]);
  const auto eig = pim::solve_eig(sys, 6);
  for (std::size_t i = 1; i < 6; ++i) EXPECT_NEAR(eig.eigenvalues[static_cast<Eigen::Index>(i)], lambdas[i], 1e-9 * lambdas[i]);
}

TEST(SolveEig, ComponentsAreSolvedSeparately) {
  pim::Points pts(40, 1);
  for (int i = 0; i < 20; ++i) pts(i, 0) = 0.01 * i, pts(20 + i, 0) = 5.0 + 0.02 * i;
  const auto sys = pim::assemble(pim::PointCloud::from_points(ManifoldModel::interval(0, 6), pts), KernelSpec::wendland41(), 0.003);
  ASSERT_EQ(sys.component_count, 2);
  const auto eig = pim::solve_eig(sys, 5);
  EXPECT_EQ(eig.eigenvalues[0], 0.0);
  EXPECT_EQ(eig.eigenvalues[1], 0.0);
  EXPECT_GT(eig.eigenvalues[2], 0.0);
  expect_b_orthonormal(sys, eig);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_LE(eig.residuals[i], 1e-6 * (1 + eig.eigenvalues[i]) * sys.B.max_abs_row_sum());
}

TEST(SolveEig, RayleighQuotientsEqualEigenvalues) {
  const auto sys = system_on(ManifoldModel::sphere(1), 600, 0.05, 2);
  const auto eig = pim::solve_eig(sys, 10);
  for (Eigen::Index i = 1; i < 10; ++i)
    EXPECT_NEAR(pim::rayleigh(sys, eig.eigenvectors.col(i)), eig.eigenvalues[i], 1e-8 * eig.eigenvalues[i]);
}

TEST(SolveEig, SolutionOperatorEigenvaluesAreReciprocal) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 200, 0.02, 8);
  const auto eig = pim::solve_eig(sys, 4);
  const auto sigma = eig.solution_operator_eigenvalues();
  EXPECT_TRUE(std::isinf(sigma[0]));
  for (Eigen::Index i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(sigma[i], 1.0 / eig.eigenvalues[i]);
}

TEST(SolveEig, IntervalFirstEigenvalueNearPiSquared) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 2000, 0.01, 42);
  const auto eig = pim::solve_eig(sys, 6);
  EXPECT_LT(std::abs(eig.eigenvalues[1] - kPi * kPi) / (kPi * kPi), 0.10) << "lambda_1 = " << eig.eigenvalues[1];
}

TEST(ExtendEigvec, RestrictionReproducesSamples) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 500, 0.01, 6);
  const auto eig = pim::solve_eig(sys, 5);
  for (Eigen::Index k = 1; k < 5; ++k) {
    const Eigen::VectorXd u = eig.eigenvectors.col(k);
    double worst = 0.0;
    for (std::size_t j = 0; j < sys.size(); ++j)
      worst = std::max(worst, std::abs(pim::extend_eigvec(sys, u, eig.eigenvalues[k], sys.cloud.point(j)) -
                                       u[static_cast<Eigen::Index>(j)]));
    EXPECT_LE(worst, 1e-10) << "k=" << k;
  }
}

TEST(ExtendEigvec, ConstantWithZeroEigenvalue) {
  const auto sys = system_on(ManifoldModel::circle(1), 200, 0.02, 1);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(200, 2.5);
  for (double theta : {0.1, 1.0, 2.0, 4.0}) {
    const std::vector<double> x{std::cos(theta), std::sin(theta)};
    EXPECT_NEAR(pim::extend_eigvec(sys, u, 0.0, x), 2.5, 1e-13);
  }
}

TEST(ExtendEigvec, OutOfSupportQuery) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 50, 0.01, 1);
  const Eigen::VectorXd u = Eigen::VectorXd::Ones(50);
  EXPECT_THROW(pim::extend_eigvec(sys, u, 0.0, std::vector<double>{3.0}), pim::OutOfSupport);
}

TEST(ExtendEigvec, CircleFirstModeIsFirstHarmonic) {
  const auto sys = system_on(ManifoldModel::circle(1), 1000, 0.01, 31);
  const auto eig = pim::solve_eig(sys, 3);
  Eigen::VectorXd u = eig.eigenvectors.col(1);
  u /= u.cwiseAbs().maxCoeff();
  Eigen::MatrixXd A(200, 2);
  Eigen::VectorXd y(200);
  for (int k = 0; k < 200; ++k) {
    const double theta = 2 * kPi * k / 200;
    A(k, 0) = std::cos(theta);
    A(k, 1) = std::sin(theta);
    y[k] = pim::extend_eigvec(sys, u, eig.eigenvalues[1], std::vector<double>{std::cos(theta), std::sin(theta)});
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  EXPECT_LT((A * coef - y).cwiseAbs().maxCoeff(), 0.1);
}

TEST(SolvePoisson, ZeroRightHandSide) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 300, 0.02, 3);
  const auto sol = pim::solve_poisson(sys, Eigen::VectorXd::Zero(300));
  EXPECT_EQ(sol.u, Eigen::VectorXd::Zero(300));
  EXPECT_EQ(sol.residual, 0.0);
}

TEST(SolvePoisson, ResidualAndMeanZero) {
  for (const auto& m : {ManifoldModel::interval(0, 1), ManifoldModel::sphere(1)}) {
    const auto sys = system_on(m, 800, m.shape() == pim::Shape::sphere ? 0.05 : 0.01, 9);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::VectorXd f(800);
    for (auto& v : f) v = u(rng);
    const auto sol = pim::solve_poisson(sys, f);
    EXPECT_LT(sol.residual, 1e-8);
    EXPECT_TRUE(sol.rhs_projection_applied);
    EXPECT_LE(std::abs(sol.u.sum()), 1e-10 * 800 * sol.u.cwiseAbs().maxCoeff());
    // Relative residual of (1/n) L u against the projected (1/n) B f, recomputed here.
    Eigen::VectorXd b = sys.B.apply(f);
    b.array() -= b.mean();
    EXPECT_LE((sys.L.apply(sol.u) - b).norm() / b.norm(), 1e-8);
    EXPECT_EQ(static_cast<std::size_t>(sol.iterations), sol.residual_history.size());
  }
}

TEST(SolvePoisson, MatchesDenseSaddlePointSolve) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 300, 0.02, 19);
  Eigen::VectorXd f(300);
  for (Eigen::Index i = 0; i < 300; ++i) f[i] = std::exp(sys.cloud.points(i, 0)) - 3 * sys.cloud.points(i, 0);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(301, 301);
  K.topLeftCorner(300, 300) = sys.L.to_dense();
  K.block(0, 300, 300, 1).setOnes();
  K.block(300, 0, 1, 300).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(301);
  Eigen::VectorXd b = sys.B.apply(f);
  b.array() -= b.mean();
  rhs.head(300) = b;
  const Eigen::VectorXd oracle = K.fullPivLu().solve(rhs).head(300);
  const auto sol = pim::solve_poisson(sys, f);
  EXPECT_LT((sol.u - oracle).norm() / oracle.norm(), 1e-8);
}

TEST(SolvePoisson, IterationLimitReportsHistory) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 300, 0.02, 19);
  Eigen::VectorXd f(300);
  for (Eigen::Index i = 0; i < 300; ++i) f[i] = std::cos(kPi * sys.cloud.points(i, 0));
  pim::PoissonOptions opts;
  opts.max_iterations = 2;
  try {
    pim::solve_poisson(sys, f, opts);
    FAIL() << "expected NumericalFailure";
  } catch (const pim::NumericalFailure& e) {
    EXPECT_EQ(e.history().size(), 2u);
  }
}

TEST(SolvePoisson, RejectsBadInput) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 30, 0.02, 1);
  EXPECT_THROW(pim::solve_poisson(sys, Eigen::VectorXd::Zero(29)), pim::InvalidArgument);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(30);
  f[3] = std::nan("");
  EXPECT_THROW(pim::solve_poisson(sys, f), pim::InvalidArgument);
}

TEST(SolvePoisson, CosineHasAnalyticSolution) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 2000, 0.01, 42);
  Eigen::VectorXd f(2000), exact(2000);
  for (Eigen::Index i = 0; i < 2000; ++i) {
    f[i] = std::cos(kPi * sys.cloud.points(i, 0));
    exact[i] = f[i] / (kPi * kPi);
  }
  exact.array() -= exact.mean();
  const auto sol = pim::solve_poisson(sys, f);
  EXPECT_LT((sol.u - exact).norm() / exact.norm(), 0.10);
}

TEST(SolvePoisson, StabilityUnderRefinement) {
  std::vector<double> worst;
  for (std::size_t n : {500u, 1000u, 2000u}) {
    const auto sys = system_on(ManifoldModel::interval(0, 1), n, 0.02, 100 + n);
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(-1, 1);
    double w = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd f(static_cast<Eigen::Index>(n));
      for (auto& v : f) v = u(rng);
      const auto sol = pim::solve_poisson(sys, f);
      w = std::max(w, std::sqrt(sol.u.squaredNorm() / n) / f.cwiseAbs().maxCoeff());
    }
    worst.push_back(w);
  }
  EXPECT_LE(*std::max_element(worst.begin(), worst.end()), 2.0 * worst.front());
}

TEST(ApplyTtn, ZeroInputGivesZero) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 100, 0.02, 5);
  for (double x : {0.0, 0.33, 1.0}) EXPECT_EQ(pim::apply_Ttn(sys, Eigen::VectorXd::Zero(100), std::vector<double>{x}), 0.0);
}

TEST(ApplyTtn, PoissonIdentityAtSamples) {
  // For f with 1^T B f = 0: T f(x_i) = u_i, hence
  // (1/nt) sum_j R_t(x_i,x_j) (T f(x_i) - T f(x_j)) = (1/n) sum_j bar-R_t(x_i,x_j) f_j.
  const auto sys = system_on(ManifoldModel::interval(0, 1), 400, 0.01, 23);
  const std::size_t n = sys.size();
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = std::sin(3 * sys.cloud.points(i, 0)) + sys.cloud.points(i, 0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.size());
  const Eigen::VectorXd Bones = sys.B.apply(ones);
  const Eigen::VectorXd f = g - (Bones.dot(g) / Bones.dot(ones)) * ones;
  const auto sol = pim::solve_poisson(sys, f);
  Eigen::VectorXd Tf(g.size());
  for (std::size_t i = 0; i < n; ++i) Tf[static_cast<Eigen::Index>(i)] = pim::apply_Ttn(sys, sol, f, sys.cloud.point(i));
  const double ct = sys.normalizing_constant();
  const Eigen::VectorXd lhs = (ct / n) * sys.L.apply(Tf);
  const Eigen::VectorXd rhs = (ct / n) * sys.B.apply(f);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8 * rhs.cwiseAbs().maxCoeff());
}

TEST(ApplyTtn, GeneralInputShiftAtSamples) {
  // T f(x_i) = u_i + t * mean(B f) / sum_j R(x_i, x_j) for a connected system.
  const auto sys = system_on(ManifoldModel::circle(1), 300, 0.02, 2);
  Eigen::VectorXd f(300);
  for (Eigen::Index i = 0; i < 300; ++i) f[i] = 1.0 + sys.cloud.points(i, 0);
  const auto sol = pim::solve_poisson(sys, f);
  const double mean_b = sys.B.apply(f).mean();
  for (std::size_t i = 0; i < 300; i += 13) {
    double ksum = 0.0;
    for (std::size_t j = 0; j < 300; ++j) {
      const double r = pim::squared_distance(sys.cloud.point(i), sys.cloud.point(j)) / (4 * sys.t);
      if (r <= 1) ksum += sys.kernel.R(r);
    }
    const auto ii = static_cast<Eigen::Index>(i);
    EXPECT_NEAR(pim::apply_Ttn(sys, sol, f, sys.cloud.point(i)), sol.u[ii] + sys.t * mean_b / ksum, 1e-10);
  }
}

TEST(ApplyTtn, MidpointMatchesDirectFormula) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 50, 0.02, 77);
  Eigen::VectorXd f(50);
  for (Eigen::Index i = 0; i < 50; ++i) f[i] = sys.cloud.points(i, 0) * sys.cloud.points(i, 0);
  const auto sol = pim::solve_poisson(sys, f);
  const double x = 0.5 * (sys.cloud.points(3, 0) + sys.cloud.points(4, 0));
  pim::Points q(1, 1);
  q << x;
  const double w = pim::w_field(sys.cloud, sys.kernel, sys.t, q)[0];
  const double ct = sys.normalizing_constant();
  double first = 0.0, second = 0.0;
  for (Eigen::Index j = 0; j < 50; ++j) {
    const double d = x - sys.cloud.points(j, 0);
    const double r = d * d / (4 * sys.t);
    first += ct * (r <= 1 ? sys.kernel.R(r) : 0.0) * sol.u[j];
    second += ct * (r <= 1 ? sys.kernel.bar_R(r) : 0.0) * f[j];
  }
  const double expected = first / (50 * w) + sys.t * second / (50 * w);
  EXPECT_NEAR(pim::apply_Ttn(sys, sol, f, std::vector<double>{x}), expected, 1e-12 * (1 + std::abs(expected)));
  EXPECT_NEAR(pim::apply_Ttn(sys, f, std::vector<double>{x}), expected, 1e-12 * (1 + std::abs(expected)));
}

TEST(ApplyTtn, OutOfSupportQuery) {
  const auto sys = system_on(ManifoldModel::interval(0, 1), 50, 0.01, 1);
  EXPECT_THROW(pim::apply_Ttn(sys, Eigen::VectorXd::Ones(50), std::vector<double>{4.0}), pim::OutOfSupport);
}

TEST(GroupEigenvalues, RelativeGap) {
  Eigen::VectorXd v(6);
  v << 0.0, 1.0, 1.0005, 4.0, 4.001, 4.1;
  const auto groups = pim::group_eigenvalues(v);
  ASSERT_EQ(groups.size(), 4u);
  EXPECT_EQ(groups[0], (std::vector<std::size_t>{0}));
  EXPECT_EQ(groups[1], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(groups[2], (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(groups[3], (std::vector<std::size_t>{5}));
}

}  // namespace
