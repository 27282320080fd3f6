#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include <gtest/gtest.h>

#include "pim/error.hpp"
#include "pim/geometry.hpp"

namespace {

using pim::DensitySpec;
using pim::ManifoldModel;
constexpr double kPi = std::numbers::pi;

TEST(ManifoldModel, DimensionsMatchShape) {
  EXPECT_EQ(ManifoldModel::interval(0, 1).intrinsic_dim(), 1);
  EXPECT_EQ(ManifoldModel::interval(0, 1).ambient_dim(), 1);
  EXPECT_EQ(ManifoldModel::circle(2).ambient_dim(), 2);
  EXPECT_EQ(ManifoldModel::sphere(1).intrinsic_dim(), 2);
  EXPECT_EQ(ManifoldModel::sphere(1).ambient_dim(), 3);
  EXPECT_TRUE(ManifoldModel::interval(0, 1).has_boundary());
  EXPECT_FALSE(ManifoldModel::circle(1).has_boundary());
  EXPECT_FALSE(ManifoldModel::sphere(1).has_boundary());
}

TEST(ManifoldModel, RejectsDegenerateParameters) {
  EXPECT_THROW(ManifoldModel::interval(1, 1), pim::InvalidArgument);
  EXPECT_THROW(ManifoldModel::circle(0), pim::InvalidArgument);
  EXPECT_THROW(ManifoldModel::sphere(-1), pim::InvalidArgument);
}

TEST(DensitySpec, RejectsInvalidAmplitudeAndTable) {
  EXPECT_THROW(DensitySpec::cosine_perturbed(1.0), pim::InvalidArgument);
  EXPECT_THROW(DensitySpec::table({1.0, 0.0, 1.0}), pim::InvalidArgument);
}

TEST(DensitySpec, NormalizesToOneOnEveryManifold) {
  for (const auto& m : {ManifoldModel::interval(0, 1), ManifoldModel::interval(-1, 2), ManifoldModel::circle(1.5)}) {
    for (const auto& d : {DensitySpec::uniform(), DensitySpec::cosine_perturbed(0.5), DensitySpec::table({1, 2, 3, 2})})
      EXPECT_NO_THROW(pim::validate_density(m, d)) << m.describe() << " " << d.describe();
  }
  EXPECT_NO_THROW(pim::validate_density(ManifoldModel::sphere(1), DensitySpec::cosine_perturbed(0.3)));
}

TEST(Sample, IntervalPointsInRangeAndDeterministic) {
  const auto m = ManifoldModel::interval(0, 1);
  const auto a = pim::sample(m, DensitySpec::uniform(), 5, 7);
  const auto b = pim::sample(m, DensitySpec::uniform(), 5, 7);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_GE(a.points(i, 0), 0.0);
    EXPECT_LE(a.points(i, 0), 1.0);
  }
  EXPECT_EQ(0, std::memcmp(a.points.data(), b.points.data(), sizeof(double) * 5));
}

TEST(Sample, ZeroPointsIsInvalid) {
  EXPECT_THROW(pim::sample(ManifoldModel::interval(0, 1), DensitySpec::uniform(), 0, 1), pim::InvalidArgument);
}

TEST(Sample, ByteIdenticalForEveryManifold) {
  for (const auto& m : {ManifoldModel::interval(0, 1), ManifoldModel::circle(1), ManifoldModel::sphere(2)}) {
    const auto a = pim::sample(m, DensitySpec::cosine_perturbed(0.4), 300, 99);
    const auto b = pim::sample(m, DensitySpec::cosine_perturbed(0.4), 300, 99);
    ASSERT_EQ(a.points.size(), b.points.size());
    EXPECT_EQ(0, std::memcmp(a.points.data(), b.points.data(), sizeof(double) * a.points.size()));
    EXPECT_EQ(a.density_at_points, b.density_at_points);
    const auto c = pim::sample(m, DensitySpec::cosine_perturbed(0.4), 300, 100);
    EXPECT_NE(0, std::memcmp(a.points.data(), c.points.data(), sizeof(double) * a.points.size()));
  }
}

TEST(Sample, PointsLieOnManifold) {
  for (const auto& m : {ManifoldModel::circle(1.7), ManifoldModel::sphere(0.8)}) {
    const auto cloud = pim::sample(m, DensitySpec::uniform(), 1000, 3);
    for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_LE(m.embedding_error(cloud.point(i)), pim::kEmbeddingTolerance);
    for (double p : cloud.density_at_points) EXPECT_NEAR(p, 1.0 / m.volume(), 1e-12);
  }
}

TEST(Sample, CosineDensityKolmogorovSmirnov) {
  const auto m = ManifoldModel::interval(0, 1);
  const auto d = DensitySpec::cosine_perturbed(0.5);
  const std::size_t n = 100000;
  const auto cloud = pim::sample(m, d, n, 2024);
  std::vector<double> xs(cloud.points.data(), cloud.points.data() + n);
  std::sort(xs.begin(), xs.end());
  const auto cdf = [](double x) { return x + 0.5 * std::sin(kPi * x) / kPi; };
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(xs[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(ks, 0.01);
}

TEST(Sample, SphereCosineDensityFollowsPolarMarginal) {
  // p proportional to 1 + a cos(theta): E[cos theta] = a/3 under the area measure.
  const double a = 0.6;
  const auto cloud = pim::sample(ManifoldModel::sphere(1), DensitySpec::cosine_perturbed(a), 40000, 5);
  double mean_z = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) mean_z += cloud.points(i, 2);
  mean_z /= cloud.size();
  EXPECT_NEAR(mean_z, a / 3.0, 0.01);
}

TEST(PointCloud, FromPointsChecksEmbedding) {
  pim::Points ok(2, 2);
  ok << 1, 0, 0, 1;
  EXPECT_NO_THROW(pim::PointCloud::from_points(ManifoldModel::circle(1), ok));
  pim::Points bad(1, 2);
  bad << 1.1, 0;
  EXPECT_THROW(pim::PointCloud::from_points(ManifoldModel::circle(1), bad), pim::InvalidArgument);
  pim::Points outside(1, 1);
  outside << 1.5;
  EXPECT_THROW(pim::PointCloud::from_points(ManifoldModel::interval(0, 1), outside), pim::InvalidArgument);
}

TEST(QuadratureGrid, IntervalWeightsSumToLength) {
  const auto g = pim::quadrature_grid(ManifoldModel::interval(0, 1), 101);
  double s = 0.0;
  for (double w : g.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(QuadratureGrid, CircleWeightsSumToCircumference) {
  const auto g = pim::quadrature_grid(ManifoldModel::circle(1), 64);
  double s = 0.0;
  for (double w : g.weights) s += w;
  EXPECT_NEAR(s, 2 * kPi, 1e-13);
}

TEST(QuadratureGrid, SphereWeightsSumToArea) {
  const auto g = pim::quadrature_grid(ManifoldModel::sphere(2), 500);
  double s = 0.0;
  for (double w : g.weights) s += w;
  EXPECT_NEAR(s, 16 * kPi, 1e-11);
  for (Eigen::Index i = 0; i < g.nodes.rows(); ++i)
    EXPECT_LE(ManifoldModel::sphere(2).embedding_error(pim::row_view(g.nodes, i)), 1e-12);
}

TEST(QuadratureGrid, CosineDensityIntegratesToOne) {
  const auto m = ManifoldModel::interval(0, 1);
  const auto d = DensitySpec::cosine_perturbed(0.5);
  const auto g = pim::quadrature_grid(m, 2001);
  double s = 0.0;
  for (Eigen::Index i = 0; i < g.nodes.rows(); ++i) s += g.weights[i] * d(m, pim::row_view(g.nodes, i));
  EXPECT_NEAR(s, 1.0, 1e-8);
}

TEST(QuadratureGrid, NeedsTwoNodes) {
  EXPECT_THROW(pim::quadrature_grid(ManifoldModel::interval(0, 1), 1), pim::InvalidArgument);
}

TEST(ReferenceSpectrum, UniformInterval) {
  const auto ref = pim::reference_spectrum(ManifoldModel::interval(0, 1), DensitySpec::uniform(), 4);
  ASSERT_EQ(ref.size(), 4u);
  const double p2 = kPi * kPi;
  EXPECT_DOUBLE_EQ(ref.eigenvalues[0], 0.0);
  EXPECT_NEAR(ref.eigenvalues[1], p2, 1e-12);
  EXPECT_NEAR(ref.eigenvalues[2], 4 * p2, 1e-12);
  EXPECT_NEAR(ref.eigenvalues[3], 9 * p2, 1e-12);
  EXPECT_EQ(ref.provenance, pim::Provenance::closed_form);
}

TEST(ReferenceSpectrum, UniformCircleHasDoubleEigenvalues) {
  const auto ref = pim::reference_spectrum(ManifoldModel::circle(1), DensitySpec::uniform(), 5);
  const std::vector<double> expected{0, 1, 1, 4, 4};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(ref.eigenvalues[i], expected[i], 1e-12);
}

TEST(ReferenceSpectrum, UniformSphereMultiplicities) {
  const auto ref = pim::reference_spectrum(ManifoldModel::sphere(1), DensitySpec::uniform(), 5);
  const std::vector<double> expected{0, 2, 2, 2, 6};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(ref.eigenvalues[i], expected[i], 1e-12);
}

TEST(ReferenceSpectrum, SphereHarmonicsAreEigenfunctions) {
  // Spherical Laplacian check by finite differences in local tangent coordinates is
  // replaced by orthogonality of distinct harmonics under the Fibonacci quadrature.
  const auto m = ManifoldModel::sphere(1);
  const auto ref = pim::reference_spectrum(m, DensitySpec::uniform(), 9);
  const auto g = pim::quadrature_grid(m, 20000);
  for (std::size_t a = 0; a < 9; ++a) {
    for (std::size_t b = a + 1; b < 9; ++b) {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (Eigen::Index q = 0; q < g.nodes.rows(); ++q) {
        const double fa = ref.eigenfunction(a, pim::row_view(g.nodes, q));
        const double fb = ref.eigenfunction(b, pim::row_view(g.nodes, q));
        dot += fa * fb;
        na += fa * fa;
        nb += fb * fb;
      }
      EXPECT_LT(std::abs(dot) / std::sqrt(na * nb), 1e-3) << a << "," << b;
    }
  }
}

TEST(ReferenceSpectrum, NonuniformSphereUnsupported) {
  EXPECT_THROW(pim::reference_spectrum(ManifoldModel::sphere(1), DensitySpec::cosine_perturbed(0.2), 4),
               pim::UnsupportedConfiguration);
}

TEST(ReferenceSpectrum, CountBounds) {
  EXPECT_THROW(pim::reference_spectrum(ManifoldModel::interval(0, 1), DensitySpec::uniform(), 0), pim::InvalidArgument);
  EXPECT_THROW(pim::reference_spectrum(ManifoldModel::interval(0, 1), DensitySpec::uniform(), 65), pim::InvalidArgument);
}

TEST(ReferenceSpectrum, CountAndOrderForEveryCase) {
  for (const auto& m : {ManifoldModel::interval(0, 1), ManifoldModel::circle(1), ManifoldModel::sphere(1)}) {
    for (const auto& d : {DensitySpec::uniform(), DensitySpec::cosine_perturbed(0.5)}) {
      if (m.shape() == pim::Shape::sphere && !d.is_uniform()) continue;
      const auto ref = pim::reference_spectrum(m, d, 12);
      ASSERT_EQ(ref.size(), 12u);
      EXPECT_NEAR(ref.eigenvalues[0], 0.0, 1e-10);
      EXPECT_TRUE(std::is_sorted(ref.eigenvalues.begin(), ref.eigenvalues.end()));
    }
  }
}

TEST(FdOracle, UniformIntervalMatchesPiSquared) {
  const auto ref = pim::fd_oracle_1d(DensitySpec::uniform(), 1001, ManifoldModel::interval(0, 1), 3);
  EXPECT_NEAR(ref.eigenvalues[1], kPi * kPi, 1e-3);
  EXPECT_EQ(ref.provenance, pim::Provenance::fd_oracle);
  EXPECT_EQ(ref.grid_size, 1001u);
}

TEST(FdOracle, SecondOrderRefinement) {
  const auto m = ManifoldModel::interval(0, 1);
  const double e1 = std::abs(pim::fd_oracle_1d(DensitySpec::uniform(), 201, m, 2).eigenvalues[1] - kPi * kPi);
  const double e2 = std::abs(pim::fd_oracle_1d(DensitySpec::uniform(), 401, m, 2).eigenvalues[1] - kPi * kPi);
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);
}

TEST(FdOracle, ConstantGroundState) {
  const auto m = ManifoldModel::interval(0, 1);
  const auto ref = pim::fd_oracle_1d(DensitySpec::cosine_perturbed(0.5), 501, m, 3);
  EXPECT_NEAR(ref.eigenvalues[0], 0.0, 1e-9);
  const double first = ref.eigenfunction(0, std::vector<double>{0.0});
  for (double x : {0.1, 0.37, 0.8, 1.0}) EXPECT_NEAR(ref.eigenfunction(0, std::vector<double>{x}), first, 1e-8);
}

TEST(FdOracle, CosineDensityGridSelfConsistent) {
  const auto m = ManifoldModel::interval(0, 1);
  const auto a = pim::fd_oracle_1d(DensitySpec::cosine_perturbed(0.5), 2001, m, 6);
  const auto b = pim::fd_oracle_1d(DensitySpec::cosine_perturbed(0.5), 4001, m, 6);
  for (std::size_t i = 1; i <= 5; ++i) EXPECT_LT(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) / b.eigenvalues[i], 5e-5) << i;
}

TEST(FdOracle, UniformMatchesClosedFormOnCircle) {
  const auto m = ManifoldModel::circle(1);
  const auto fd = pim::fd_oracle_1d(DensitySpec::uniform(), 1024, m, 7);
  const auto exact = pim::reference_spectrum(m, DensitySpec::uniform(), 7);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(fd.eigenvalues[i], exact.eigenvalues[i], 1e-3);
}

TEST(FdOracle, Errors) {
  const auto m = ManifoldModel::interval(0, 1);
  EXPECT_THROW(pim::fd_oracle_1d(DensitySpec::uniform(), 2, m, 1), pim::InvalidArgument);
  EXPECT_THROW(pim::fd_oracle_1d(DensitySpec::uniform(), 10, m, 11), pim::InvalidArgument);
  EXPECT_THROW(pim::fd_oracle_1d(DensitySpec::uniform(), 10, ManifoldModel::sphere(1), 2),
               pim::UnsupportedConfiguration);
}

}  // namespace
