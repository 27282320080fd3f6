#include "pim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pim/error.hpp"

namespace pim {
namespace {

constexpr double kPi = std::numbers::pi;

// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

double integrate(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13, &err);
}

}  // namespace

double squared_distance(PointView a, PointView b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

const char* to_string(Shape shape) {
  switch (shape) {
    case Shape::interval: return "interval";
    case Shape::circle: return "circle";
    case Shape::sphere: return "sphere";
  }
  return "unknown";
}

ManifoldModel ManifoldModel::interval(double lower, double upper) {
  if (!(upper > lower) || !std::isfinite(lower) || !std::isfinite(upper))
    throw InvalidArgument("interval needs finite bounds with lower < upper");
  return {Shape::interval, lower, upper, 0.0};
}

ManifoldModel ManifoldModel::circle(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidArgument("circle radius must be positive");
  return {Shape::circle, 0.0, 0.0, radius};
}

ManifoldModel ManifoldModel::sphere(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidArgument("sphere radius must be positive");
  return {Shape::sphere, 0.0, 0.0, radius};
}

int ManifoldModel::ambient_dim() const noexcept {
  switch (shape_) {
    case Shape::interval: return 1;
    case Shape::circle: return 2;
    case Shape::sphere: return 3;
  }
  return 0;
}

double ManifoldModel::volume() const noexcept {
  switch (shape_) {
    case Shape::interval: return upper_ - lower_;
    case Shape::circle: return 2.0 * kPi * radius_;
    case Shape::sphere: return 4.0 * kPi * radius_ * radius_;
  }
  return 0.0;
}

double ManifoldModel::coordinate(PointView x) const {
  switch (shape_) {
    case Shape::interval:
      return (x[0] - lower_) / (upper_ - lower_);
    case Shape::circle: {
      double theta = std::atan2(x[1], x[0]);
      if (theta < 0.0) theta += 2.0 * kPi;
      return theta / kPi;
    }
    case Shape::sphere: {
      const double c = std::clamp(x[2] / radius_, -1.0, 1.0);
      return std::acos(c) / kPi;
    }
  }
  return 0.0;
}

double ManifoldModel::embedding_error(PointView x) const {
  if (static_cast<int>(x.size()) != ambient_dim()) return std::numeric_limits<double>::infinity();
  if (shape_ == Shape::interval) return std::max({0.0, lower_ - x[0], x[0] - upper_});
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  return std::abs(std::sqrt(norm2) - radius_);
}

std::string ManifoldModel::describe() const {
  std::ostringstream out;
  out << to_string(shape_);
  if (shape_ == Shape::interval)
    out << "(" << lower_ << "," << upper_ << ")";
  else
    out << "(radius=" << radius_ << ")";
  return out.str();
}

const char* to_string(DensityForm form) {
  switch (form) {
    case DensityForm::uniform: return "uniform";
    case DensityForm::cosine: return "cosine";
    case DensityForm::table: return "table";
  }
  return "unknown";
}

DensitySpec DensitySpec::uniform() { return {}; }

DensitySpec DensitySpec::cosine_perturbed(double amplitude) {
  if (!(std::abs(amplitude) < 1.0))
    throw InvalidArgument("cosine-perturbed density needs |a| < 1");
  DensitySpec spec;
  spec.form_ = DensityForm::cosine;
  spec.amplitude_ = amplitude;
  return spec;
}

DensitySpec DensitySpec::table(std::vector<double> values) {
  if (values.size() < 2) throw InvalidArgument("density table needs at least two values");
  for (double v : values) {
    if (!std::isfinite(v) || !(v > 0.0))
      throw InvalidArgument("density table values must be finite and positive");
  }
  DensitySpec spec;
  spec.form_ = DensityForm::table;
  spec.values_ = std::move(values);
  return spec;
}

double DensitySpec::profile(double s, double span) const {
  switch (form_) {
    case DensityForm::uniform:
      return 1.0;
    case DensityForm::cosine:
      return 1.0 + amplitude_ * std::cos(kPi * s);
    case DensityForm::table: {
      const std::size_t segments = values_.size() - 1;
      const double pos = std::clamp(s / span, 0.0, 1.0) * segments;
      const std::size_t k = std::min(static_cast<std::size_t>(pos), segments - 1);
      const double frac = pos - k;
      return values_[k] + frac * (values_[k + 1] - values_[k]);
    }
  }
  return 1.0;
}

double DensitySpec::cumulative(double s, double span) const {
  switch (form_) {
    case DensityForm::uniform:
      return s;
    case DensityForm::cosine:
      return s + amplitude_ * std::sin(kPi * s) / kPi;
    case DensityForm::table: {
      const std::size_t segments = values_.size() - 1;
      const double h = span / segments;
      const double pos = std::clamp(s / span, 0.0, 1.0) * segments;
      const std::size_t full = std::min(static_cast<std::size_t>(pos), segments - 1);
      double acc = 0.0;
      for (std::size_t k = 0; k < full; ++k) acc += 0.5 * h * (values_[k] + values_[k + 1]);
      const double tau = (pos - full) * h;
      acc += values_[full] * tau + (values_[full + 1] - values_[full]) * tau * tau / (2.0 * h);
      return acc;
    }
  }
  return s;
}

double DensitySpec::normalization(const ManifoldModel& manifold) const {
  switch (manifold.shape()) {
    case Shape::interval:
      return 1.0 / ((manifold.upper() - manifold.lower()) * cumulative(1.0, 1.0));
    case Shape::circle:
      return 1.0 / (manifold.radius() * kPi * cumulative(2.0, 2.0));
    case Shape::sphere: {
      const double r2 = manifold.radius() * manifold.radius();
      if (form_ != DensityForm::table) return 1.0 / (4.0 * kPi * r2);
      // \int_0^pi g(theta/pi) sin(theta) dtheta, split at the table nodes
      const std::size_t segments = values_.size() - 1;
      double acc = 0.0;
      for (std::size_t k = 0; k < segments; ++k) {
        const double a = kPi * k / segments;
        const double b = kPi * (k + 1) / segments;
        acc += integrate([this](double th) { return profile(th / kPi, 1.0) * std::sin(th); }, a, b);
      }
      return 1.0 / (2.0 * kPi * r2 * acc);
    }
  }
  return 1.0;
}

double DensitySpec::operator()(const ManifoldModel& manifold, PointView x) const {
  return normalization(manifold) * profile(manifold.coordinate(x), manifold.coordinate_span());
}

std::string DensitySpec::describe() const {
  std::ostringstream out;
  out << to_string(form_);
  if (form_ == DensityForm::cosine) out << "(a=" << amplitude_ << ")";
  if (form_ == DensityForm::table) out << "(" << values_.size() << " values)";
  return out.str();
}

void validate_density(const ManifoldModel& manifold, const DensitySpec& density) {
  const double span = manifold.coordinate_span();
  const double c = density.normalization(manifold);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int k = 0; k <= kInverseCdfNodes; ++k) {
    const double p = c * density.profile(span * k / kInverseCdfNodes, span);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  if (!(lo > 0.0)) throw InvalidArgument("density must be bounded below by a positive constant");
  if (!std::isfinite(hi)) throw InvalidArgument("density must be bounded");

  // Independent check of the normalization by adaptive quadrature in s.
  const std::size_t pieces = density.form() == DensityForm::table ? density.values().size() - 1 : 8;
  double total = 0.0;
  for (std::size_t k = 0; k < pieces; ++k) {
    const double a = span * k / pieces;
    const double b = span * (k + 1) / pieces;
    switch (manifold.shape()) {
      case Shape::interval:
        total += (manifold.upper() - manifold.lower()) *
                 integrate([&](double s) { return c * density.profile(s, span); }, a, b);
        break;
      case Shape::circle:
        total += manifold.radius() * kPi *
                 integrate([&](double s) { return c * density.profile(s, span); }, a, b);
        break;
      case Shape::sphere: {
        const double r2 = manifold.radius() * manifold.radius();
        total += 2.0 * kPi * r2 * kPi *
                 integrate([&](double s) { return c * density.profile(s, span) * std::sin(kPi * s); },
                           a, b);
        break;
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-8)
    throw InvalidArgument("density does not integrate to 1 (got " + std::to_string(total) + ")");
}

PointCloud PointCloud::from_points(const ManifoldModel& manifold, Points points) {
  if (points.rows() < 1) throw InvalidArgument("point cloud needs at least one point");
  if (points.cols() != manifold.ambient_dim())
    throw InvalidArgument("point dimension does not match the manifold's ambient dimension");
  PointCloud cloud{std::move(points), {}, manifold, 0};
  const auto uniform = DensitySpec::uniform();
  cloud.density_at_points.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (manifold.embedding_error(cloud.point(i)) > kEmbeddingTolerance)
      throw InvalidArgument("point " + std::to_string(i) + " is not on " + manifold.describe());
    cloud.density_at_points[i] = uniform(manifold, cloud.point(i));
  }
  return cloud;
}

PointCloud sample(const ManifoldModel& manifold, const DensitySpec& density, std::size_t n,
                  std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample size must be at least 1");
  validate_density(manifold, density);

  const double span = manifold.coordinate_span();
  const double norm = density.normalization(manifold);
  UniformSource uniform(seed);
  PointCloud cloud{Points(static_cast<Eigen::Index>(n), manifold.ambient_dim()), {}, manifold, seed};
  cloud.density_at_points.resize(n);

  if (manifold.shape() != Shape::sphere) {
    // Inverse CDF on a tabulated grid with linear interpolation.
    std::vector<double> nodes(kInverseCdfNodes);
    std::vector<double> cdf(kInverseCdfNodes);
    const double total = density.cumulative(span, span);
    for (int k = 0; k < kInverseCdfNodes; ++k) {
      nodes[k] = span * k / (kInverseCdfNodes - 1);
      cdf[k] = density.cumulative(nodes[k], span) / total;
    }
    cdf.back() = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = uniform();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const std::size_t k = std::clamp<std::size_t>(it - cdf.begin(), 1, kInverseCdfNodes - 1) - 1;
      const double width = cdf[k + 1] - cdf[k];
      const double frac = width > 0.0 ? (u - cdf[k]) / width : 0.0;
      const double s = std::min(nodes[k] + frac * (nodes[k + 1] - nodes[k]), span);
      if (manifold.shape() == Shape::interval) {
        cloud.points(i, 0) = std::min(manifold.lower() + s * (manifold.upper() - manifold.lower()),
                                      manifold.upper());
      } else {
        const double theta = kPi * s;
        cloud.points(i, 0) = manifold.radius() * std::cos(theta);
        cloud.points(i, 1) = manifold.radius() * std::sin(theta);
      }
      cloud.density_at_points[i] = norm * density.profile(manifold.coordinate(cloud.point(i)), span);
    }
    return cloud;
  }

  // Sphere: uniform proposals (Archimedes), rejection against sup g.
  double g_max = 0.0;
  for (int k = 0; k <= kInverseCdfNodes; ++k)
    g_max = std::max(g_max, density.profile(span * k / kInverseCdfNodes, span));
  const double rho = manifold.radius();
  std::size_t attempts = 0;
  std::size_t accepted = 0;
  while (accepted < n) {
    const double z = 1.0 - 2.0 * uniform();
    const double phi = 2.0 * kPi * uniform();
    const double planar = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double s = std::acos(z) / kPi;
    ++attempts;
    const bool keep = density.is_uniform() || uniform() * g_max < density.profile(s, span);
    if (keep) {
      cloud.points(accepted, 0) = rho * planar * std::cos(phi);
      cloud.points(accepted, 1) = rho * planar * std::sin(phi);
      cloud.points(accepted, 2) = rho * z;
      cloud.density_at_points[accepted] = norm * density.profile(s, span);
      ++accepted;
    }
    if (attempts >= 10000 && static_cast<double>(accepted) < 1e-3 * attempts)
      throw DegenerateDensity("rejection sampler acceptance rate fell below 1e-3");
  }
  return cloud;
}

QuadratureGrid quadrature_grid(const ManifoldModel& manifold, std::size_t m) {
  if (m < 2) throw InvalidArgument("quadrature grid needs m >= 2");
  QuadratureGrid grid{Points(static_cast<Eigen::Index>(m), manifold.ambient_dim()),
                      std::vector<double>(m)};
  switch (manifold.shape()) {
    case Shape::interval: {
      const double h = (manifold.upper() - manifold.lower()) / (m - 1);
      for (std::size_t i = 0; i < m; ++i) {
        grid.nodes(i, 0) = manifold.lower() + h * i;
        grid.weights[i] = (i == 0 || i + 1 == m) ? 0.5 * h : h;
      }
      break;
    }
    case Shape::circle: {
      const double rho = manifold.radius();
      for (std::size_t i = 0; i < m; ++i) {
        const double theta = 2.0 * kPi * i / m;
        grid.nodes(i, 0) = rho * std::cos(theta);
        grid.nodes(i, 1) = rho * std::sin(theta);
        grid.weights[i] = 2.0 * kPi * rho / m;
      }
      break;
    }
    case Shape::sphere: {
      // Fibonacci lattice, equal weights.
      const double rho = manifold.radius();
      const double golden = kPi * (3.0 - std::sqrt(5.0));
      for (std::size_t i = 0; i < m; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / m;
        const double planar = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        grid.nodes(i, 0) = rho * planar * std::cos(phi);
        grid.nodes(i, 1) = rho * planar * std::sin(phi);
        grid.nodes(i, 2) = rho * z;
        grid.weights[i] = 4.0 * kPi * rho * rho / m;
      }
      break;
    }
  }
  return grid;
}

namespace {

// Real spherical harmonic (unnormalized) for the index-th slot in (l, m) order.
double spherical_harmonic(std::size_t index, PointView x, double rho) {
  int l = 0;
  while (static_cast<std::size_t>((l + 1) * (l + 1)) <= index) ++l;
  const int m = static_cast<int>(index) - l * l - l;  // -l..l
  const double cos_theta = std::clamp(x[2] / rho, -1.0, 1.0);
  const double phi = std::atan2(x[1], x[0]);
  const double legendre = std::assoc_legendre(static_cast<unsigned>(l),
                                              static_cast<unsigned>(std::abs(m)), cos_theta);
  if (m > 0) return legendre * std::cos(m * phi);
  if (m < 0) return legendre * std::sin(-m * phi);
  return legendre;
}

// Tridiagonal solve (diag - shift) y = rhs with partial pivoting (LAPACK gttrf/gttrs style).
Eigen::VectorXd tridiagonal_shifted_solve(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                          double shift, Eigen::VectorXd rhs) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd d = diag.array() - shift;
  Eigen::VectorXd du = off;              // superdiagonal
  Eigen::VectorXd dl = off;              // subdiagonal
  Eigen::VectorXd du2 = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 2, 0));
  std::vector<bool> swapped(n, false);
  const double tiny = 1e-300;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      const double f = dl[i] / (d[i] != 0.0 ? d[i] : tiny);
      dl[i] = f;
      d[i + 1] -= f * du[i];
    } else {
      const double f = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = f;
      const double tmp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = tmp - f * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du[i + 1];
      }
      swapped[i] = true;
    }
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (swapped[i]) {
      const double tmp = rhs[i];
      rhs[i] = rhs[i + 1];
      rhs[i + 1] = tmp - dl[i] * rhs[i + 1];
    } else {
      rhs[i + 1] -= dl[i] * rhs[i];
    }
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double acc = rhs[i];
    if (i + 1 < n) acc -= du[i] * rhs[i + 1];
    if (i + 2 < n) acc -= du2[i] * rhs[i + 2];
    const double pivot = d[i] != 0.0 ? d[i] : tiny;
    rhs[i] = acc / pivot;
  }
  return rhs;
}

std::function<double(std::size_t, PointView)> interpolating_eigenfunction(
    const ManifoldModel& domain, Eigen::MatrixXd vectors, bool periodic) {
  auto shared = std::make_shared<const Eigen::MatrixXd>(std::move(vectors));
  return [shared, domain, periodic](std::size_t index, PointView x) {
    const Eigen::MatrixXd& v = *shared;
    const Eigen::Index nodes = v.rows();
    const double s = domain.coordinate(x) / domain.coordinate_span();
    const double pos = s * (periodic ? nodes : nodes - 1);
    Eigen::Index k = static_cast<Eigen::Index>(std::floor(pos));
    const double frac = pos - k;
    if (periodic) {
      k = ((k % nodes) + nodes) % nodes;
      return (1.0 - frac) * v(k, index) + frac * v((k + 1) % nodes, index);
    }
    k = std::clamp<Eigen::Index>(k, 0, nodes - 2);
    return (1.0 - (pos - k)) * v(k, index) + (pos - k) * v(k + 1, index);
  };
}

}  // namespace

ReferenceSpectrum fd_oracle_1d(const DensitySpec& density, std::size_t m,
                               const ManifoldModel& domain, std::size_t count) {
  if (m < 3) throw InvalidArgument("fd_oracle_1d needs m >= 3");
  if (count > m) throw InvalidArgument("fd_oracle_1d: count exceeds grid size");
  if (count == 0) throw InvalidArgument("fd_oracle_1d: count must be at least 1");
  if (domain.shape() == Shape::sphere)
    throw UnsupportedConfiguration("fd_oracle_1d supports the interval and the circle only");

  const double span = domain.coordinate_span();
  const auto weight = [&](double s) {
    const double p = density.profile(s, span);
    return p * p;
  };

  ReferenceSpectrum result;
  result.provenance = Provenance::fd_oracle;
  result.grid_size = m;

  if (domain.shape() == Shape::interval) {
    // Stiffness K and lumped mass M (half weights at the ends) give the
    // ghost-node Neumann closure; S = M^{-1/2} K M^{-1/2} is tridiagonal.
    const double length = domain.upper() - domain.lower();
    const double h = length / (m - 1);
    const double hs = 1.0 / (m - 1);
    Eigen::VectorXd mass(m), kdiag = Eigen::VectorXd::Zero(m), koff(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      const double end = (i == 0 || i + 1 == m) ? 0.5 : 1.0;
      mass[i] = end * h * weight(i * hs);
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double q = weight((i + 0.5) * hs) / h;
      kdiag[i] += q;
      kdiag[i + 1] += q;
      koff[i] = -q;
    }
    const Eigen::VectorXd inv_sqrt_mass = mass.cwiseSqrt().cwiseInverse();
    const Eigen::VectorXd diag = kdiag.cwiseProduct(inv_sqrt_mass).cwiseProduct(inv_sqrt_mass);
    Eigen::VectorXd off(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) off[i] = koff[i] * inv_sqrt_mass[i] * inv_sqrt_mass[i + 1];

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    if (tri.info() != Eigen::Success) throw NumericalFailure("fd_oracle_1d: tridiagonal QL failed");

    // The stiffness annihilates constants exactly, so the ground state is (0, constant).
    Eigen::MatrixXd vectors(m, count);
    for (std::size_t j = 0; j < count; ++j) {
      const double lambda = j == 0 ? 0.0 : tri.eigenvalues()[j];
      result.eigenvalues.push_back(lambda);
      // Inverse iteration from a fixed, non-degenerate start vector.
      Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(m, 1.0, 2.0);
      const double shift = lambda + 1e-12 * std::max(1.0, std::abs(lambda));
      for (int it = 0; it < 3; ++it) {
        y = tridiagonal_shifted_solve(diag, off, shift, y);
        y /= y.norm();
      }
      Eigen::VectorXd u = y.cwiseProduct(inv_sqrt_mass);
      if (u[0] < 0.0) u = -u;
      vectors.col(j) = u / u.cwiseAbs().maxCoeff();
    }
    result.eigenfunction = interpolating_eigenfunction(domain, std::move(vectors), false);
    return result;
  }

  // Circle: periodic closure, dense symmetric eigensolve.
  const double rho = domain.radius();
  const double h = 2.0 * std::numbers::pi * rho / m;
  const double hs = span / m;
  Eigen::VectorXd mass(m);
  Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) mass[i] = h * weight(i * hs);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = (i + 1) % m;
    const double q = weight((i + 0.5) * hs) / h;
    stiff(i, i) += q;
    stiff(j, j) += q;
    stiff(i, j) -= q;
    stiff(j, i) -= q;
  }
  const Eigen::VectorXd inv_sqrt_mass = mass.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd sym = inv_sqrt_mass.asDiagonal() * stiff * inv_sqrt_mass.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(sym);
  if (dense.info() != Eigen::Success) throw NumericalFailure("fd_oracle_1d: dense eigensolve failed");
  Eigen::MatrixXd vectors(m, count);
  for (std::size_t j = 0; j < count; ++j) {
    result.eigenvalues.push_back(j == 0 ? 0.0 : dense.eigenvalues()[j]);
    Eigen::VectorXd u = dense.eigenvectors().col(j).cwiseProduct(inv_sqrt_mass);
    vectors.col(j) = u / u.cwiseAbs().maxCoeff();
  }
  result.eigenfunction = interpolating_eigenfunction(domain, std::move(vectors), true);
  return result;
}

ReferenceSpectrum reference_spectrum(const ManifoldModel& manifold, const DensitySpec& density,
                                     std::size_t count) {
  if (count == 0 || count > kMaxReferenceCount)
    throw InvalidArgument("reference_spectrum: count must be in [1, 64]");

  if (!density.is_uniform()) {
    if (manifold.shape() == Shape::sphere)
      throw UnsupportedConfiguration("nonuniform densities on the sphere have no reference spectrum");
    const std::size_t m = manifold.shape() == Shape::interval ? kDefaultOracleGrid : 1024;
    return fd_oracle_1d(density, m, manifold, count);
  }

  ReferenceSpectrum result;
  result.provenance = Provenance::closed_form;
  switch (manifold.shape()) {
    case Shape::interval: {
      const double length = manifold.upper() - manifold.lower();
      for (std::size_t k = 0; k < count; ++k) {
        const double freq = k * std::numbers::pi / length;
        result.eigenvalues.push_back(freq * freq);
      }
      result.eigenfunction = [manifold](std::size_t index, PointView x) {
        return std::cos(index * std::numbers::pi * manifold.coordinate(x));
      };
      break;
    }
    case Shape::circle: {
      const double rho = manifold.radius();
      for (std::size_t k = 0; k < count; ++k) {
        const double freq = static_cast<double>((k + 1) / 2) / rho;
        result.eigenvalues.push_back(freq * freq);
      }
      result.eigenfunction = [](std::size_t index, PointView x) {
        const double theta = std::atan2(x[1], x[0]);
        const double freq = static_cast<double>((index + 1) / 2);
        if (index == 0) return 1.0;
        return index % 2 == 1 ? std::cos(freq * theta) : std::sin(freq * theta);
      };
      break;
    }
    case Shape::sphere: {
      const double rho = manifold.radius();
      for (std::size_t k = 0; k < count; ++k) {
        int l = 0;
        while (static_cast<std::size_t>((l + 1) * (l + 1)) <= k) ++l;
        result.eigenvalues.push_back(l * (l + 1.0) / (rho * rho));
      }
      result.eigenfunction = [rho](std::size_t index, PointView x) {
        return spherical_harmonic(index, x, rho);
      };
      break;
    }
  }
  return result;
}

}  // namespace pim
