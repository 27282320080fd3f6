#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pim {

/// n x d array, one sample per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PointView = std::span<const double>;

inline PointView row_view(const Points& pts, Eigen::Index i) {
  return {pts.data() + i * pts.cols(), static_cast<std::size_t>(pts.cols())};
}

double squared_distance(PointView a, PointView b);

enum class Shape { interval, circle, sphere };

const char* to_string(Shape shape);

/// One of the three model manifolds with a computable Neumann spectrum.
class ManifoldModel {
 public:
  static ManifoldModel interval(double lower, double upper);
  static ManifoldModel circle(double radius);
  static ManifoldModel sphere(double radius);

  Shape shape() const noexcept { return shape_; }
  int intrinsic_dim() const noexcept { return shape_ == Shape::sphere ? 2 : 1; }
  int ambient_dim() const noexcept;
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  double radius() const noexcept { return radius_; }
  bool has_boundary() const noexcept { return shape_ == Shape::interval; }
  /// Length (interval, circle) or area (sphere).
  double volume() const noexcept;

  /// Normalized intrinsic coordinate s(x): (x-a)/(b-a) on the interval,
  /// theta/pi in [0,2) on the circle, polar angle / pi in [0,1] on the sphere.
  double coordinate(PointView x) const;
  /// Upper end of the range of coordinate(): 1, 2 or 1.
  double coordinate_span() const noexcept { return shape_ == Shape::circle ? 2.0 : 1.0; }

  /// Distance of x from the manifold (0 on it).
  double embedding_error(PointView x) const;

  std::string describe() const;

 private:
  ManifoldModel(Shape shape, double lower, double upper, double radius)
      : shape_(shape), lower_(lower), upper_(upper), radius_(radius) {}

  Shape shape_;
  double lower_;
  double upper_;
  double radius_;
};

enum class DensityForm { uniform, cosine, table };

const char* to_string(DensityForm form);

/**
 * Sampling density as an unnormalized profile g(s) of the manifold's
 * normalized coordinate. p = g / \int_M g is formed against a manifold.
 */
class DensitySpec {
 public:
  static DensitySpec uniform();
  /// g(s) = 1 + a cos(pi s), |a| < 1.
  static DensitySpec cosine_perturbed(double amplitude);
  /// Piecewise-linear g on a uniform grid over [0, coordinate_span()].
  static DensitySpec table(std::vector<double> values);

  DensityForm form() const noexcept { return form_; }
  double amplitude() const noexcept { return amplitude_; }
  const std::vector<double>& values() const noexcept { return values_; }
  bool is_uniform() const noexcept { return form_ == DensityForm::uniform; }

  /// Unnormalized profile at coordinate s in [0, span].
  double profile(double s, double span) const;
  /// \int_0^s g(s') ds' (exact for every form).
  double cumulative(double s, double span) const;

  /// Constant c with \int_M c g = 1; throws UnsupportedConfiguration for tables on the sphere.
  double normalization(const ManifoldModel& manifold) const;
  /// Normalized density p(x).
  double operator()(const ManifoldModel& manifold, PointView x) const;

  std::string describe() const;

 private:
  DensityForm form_ = DensityForm::uniform;
  double amplitude_ = 0.0;
  std::vector<double> values_;
};

/// Throws InvalidArgument unless min p > 0, max p finite and \int p = 1 to 1e-8.
void validate_density(const ManifoldModel& manifold, const DensitySpec& density);

struct PointCloud {
  Points points;
  std::vector<double> density_at_points;
  ManifoldModel manifold = ManifoldModel::interval(0.0, 1.0);
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
  int dim() const noexcept { return static_cast<int>(points.cols()); }
  PointView point(std::size_t i) const { return row_view(points, static_cast<Eigen::Index>(i)); }

  /// Wraps explicit points; checks the embedding tolerance and fills p = uniform.
  static PointCloud from_points(const ManifoldModel& manifold, Points points);
};

inline constexpr double kEmbeddingTolerance = 1e-12;
inline constexpr int kInverseCdfNodes = 10000;

/// n i.i.d. draws from p on the manifold, deterministic given the seed.
PointCloud sample(const ManifoldModel& manifold, const DensitySpec& density, std::size_t n,
                  std::uint64_t seed);

struct QuadratureGrid {
  Points nodes;
  std::vector<double> weights;
};

QuadratureGrid quadrature_grid(const ManifoldModel& manifold, std::size_t m);

enum class Provenance { closed_form, fd_oracle };

struct ReferenceSpectrum {
  std::vector<double> eigenvalues;  ///< ascending, repeated by multiplicity
  /// (index, point on M) -> value of the index-th reference eigenfunction.
  std::function<double(std::size_t, PointView)> eigenfunction;
  Provenance provenance = Provenance::closed_form;
  std::size_t grid_size = 0;  ///< m for fd_oracle provenance

  std::size_t size() const noexcept { return eigenvalues.size(); }
};

inline constexpr std::size_t kMaxReferenceCount = 64;
inline constexpr std::size_t kDefaultOracleGrid = 4001;

ReferenceSpectrum reference_spectrum(const ManifoldModel& manifold, const DensitySpec& density,
                                     std::size_t count);

/// Second-order finite differences for -(1/p^2)(p^2 u')' with Neumann ghost
/// nodes (interval) or periodic wrap (circle).
ReferenceSpectrum fd_oracle_1d(const DensitySpec& density, std::size_t m,
                               const ManifoldModel& domain, std::size_t count);

}  // namespace pim
