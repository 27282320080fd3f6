#include "pim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/Polynomials>

#include "pim/error.hpp"

namespace pim {
namespace {

double horner(std::span<const double> coeffs, double r) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * r + *it;
  return acc;
}

// e^{-1} * sum_{k >= first} w^k / k!, all terms positive for w in [0, 1].
double exp_tail(double w, int first) {
  double term = 1.0;
  for (int k = 1; k <= first; ++k) term *= w / k;
  double sum = 0.0;
  for (int k = first; k < first + 30 && term > 0.0; ++k) {
    sum += term;
    term *= w / (k + 1);
  }
  return sum * std::exp(-1.0);
}

double integrate_tail(const std::function<double(double)>& f, double r) {
  if (r >= 1.0) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, r, 1.0, 15, 1e-14, &err);
}

// Exact minimum of a polynomial on [lo, hi]: endpoints plus real critical points.
double polynomial_min(std::span<const double> coeffs, double lo, double hi) {
  double best = std::min(horner(coeffs, lo), horner(coeffs, hi));
  if (coeffs.size() < 3) return best;
  std::vector<double> deriv(coeffs.size() - 1);
  for (std::size_t k = 1; k < coeffs.size(); ++k) deriv[k - 1] = k * coeffs[k];
  while (deriv.size() > 1 && deriv.back() == 0.0) deriv.pop_back();
  if (deriv.size() < 2) return best;
  Eigen::VectorXd dcoef = Eigen::Map<const Eigen::VectorXd>(deriv.data(), deriv.size());
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(dcoef);
  std::vector<double> roots;
  solver.realRoots(roots, 1e-10);
  for (double root : roots) {
    if (root > lo && root < hi) best = std::min(best, horner(coeffs, root));
  }
  return best;
}

}  // namespace

const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::wendland41: return "wendland41";
    case KernelFamily::truncated_gaussian: return "truncated_gaussian";
    case KernelFamily::polynomial: return "polynomial";
    case KernelFamily::custom: return "custom";
  }
  return "unknown";
}

std::optional<KernelFamily> kernel_family_from_string(const std::string& name) {
  if (name == "wendland41") return KernelFamily::wendland41;
  if (name == "truncated_gaussian" || name == "truncated-gaussian-smoothed")
    return KernelFamily::truncated_gaussian;
  if (name == "polynomial") return KernelFamily::polynomial;
  return std::nullopt;
}

KernelSpec KernelSpec::wendland41() {
  KernelSpec spec;
  spec.family_ = KernelFamily::wendland41;
  spec.name_ = "wendland41";
  spec.delta0_ = 3.0 / 16.0;
  return spec;
}

KernelSpec KernelSpec::truncated_gaussian() {
  KernelSpec spec;
  spec.family_ = KernelFamily::truncated_gaussian;
  spec.name_ = "truncated_gaussian";
  spec.normalizer_ = 1.0 / exp_tail(1.0, 3);
  // R is decreasing, so its minimum on [0, 1/2] sits at 1/2.
  spec.delta0_ = spec.raw_R(0.5);
  return spec;
}

KernelSpec KernelSpec::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw InvalidArgument("polynomial kernel needs at least one coefficient");
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw InvalidArgument("polynomial kernel coefficients must be finite");
  }
  KernelSpec spec;
  spec.family_ = KernelFamily::polynomial;
  spec.name_ = "polynomial";
  spec.coeffs_ = std::move(coeffs);
  // \int_r^1 s^k ds = (1 - r^{k+1}) / (k+1)
  spec.bar_coeffs_.assign(spec.coeffs_.size() + 1, 0.0);
  for (std::size_t k = 0; k < spec.coeffs_.size(); ++k) {
    const double c = spec.coeffs_[k] / static_cast<double>(k + 1);
    spec.bar_coeffs_[0] += c;
    spec.bar_coeffs_[k + 1] -= c;
  }
  spec.delta0_ = polynomial_min(spec.coeffs_, 0.0, 0.5);
  return spec;
}

KernelSpec KernelSpec::custom(std::string name, std::function<double(double)> profile) {
  if (!profile) throw InvalidArgument("custom kernel needs a callable profile");
  KernelSpec spec;
  spec.family_ = KernelFamily::custom;
  spec.name_ = std::move(name);
  spec.profile_ = std::make_shared<const std::function<double(double)>>(std::move(profile));
  double lowest = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 10000; ++k) lowest = std::min(lowest, spec.raw_R(0.5 * k / 10000.0));
  spec.delta0_ = lowest;
  return spec;
}

KernelSpec KernelSpec::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("kernel scale must be positive");
  KernelSpec copy = *this;
  copy.scale_ *= c;
  copy.delta0_ *= c;
  return copy;
}

double KernelSpec::raw_R(double r) const {
  if (r > 1.0) return 0.0;
  switch (family_) {
    case KernelFamily::wendland41: {
      const double w = 1.0 - r;
      const double w2 = w * w;
      return w2 * w2 * (4.0 * r + 1.0);
    }
    case KernelFamily::truncated_gaussian:
      return normalizer_ * exp_tail(1.0 - r, 3);
    case KernelFamily::polynomial:
      return horner(coeffs_, r);
    case KernelFamily::custom:
      return (*profile_)(r);
  }
  return 0.0;
}

double KernelSpec::raw_bar_R(double r) const {
  if (r >= 1.0) return 0.0;
  switch (family_) {
    case KernelFamily::wendland41: {
      // \int_r^1 (1-s)^4 (4s+1) ds = (1-r)^5 (1+2r) / 3
      const double w = 1.0 - r;
      const double w2 = w * w;
      return w2 * w2 * w * (1.0 + 2.0 * r) / 3.0;
    }
    case KernelFamily::truncated_gaussian:
      return normalizer_ * exp_tail(1.0 - r, 4);
    case KernelFamily::polynomial:
      return horner(bar_coeffs_, r);
    case KernelFamily::custom:
      return integrate_tail([this](double s) { return raw_R(s); }, std::max(r, 0.0));
  }
  return 0.0;
}

double KernelSpec::R(double r) const { return scale_ * raw_R(r); }

double KernelSpec::bar_R(double r) const { return scale_ * raw_bar_R(r); }

double eval_R(const KernelSpec& spec, double r) { return spec.R(r); }

double eval_barR(const KernelSpec& spec, double r) { return spec.bar_R(r); }

bool ValidationReport::all_passed() const {
  return std::all_of(clauses.begin(), clauses.end(),
                     [](const ClauseResult& c) { return c.passed; });
}

const ClauseResult* ValidationReport::find(const std::string& clause) const {
  for (const auto& c : clauses) {
    if (c.clause == clause) return &c;
  }
  return nullptr;
}

namespace {

struct SideLimits {
  double value;
  double d1;
  double d2;
};

// One-sided limits of f, f', f'' at r from samples r + dir*h, ..., r + 4*dir*h.
// Each is a second-order extrapolation so smooth profiles agree to O(h^2).
SideLimits one_sided(const KernelSpec& spec, double r, double h, double dir) {
  double f[5];
  for (int k = 1; k <= 4; ++k) f[k] = spec.R(r + dir * k * h);
  const double value = 3.0 * f[1] - 3.0 * f[2] + f[3];
  const double d1a = (f[1] - f[2]) / h;
  const double d1b = (f[2] - f[3]) / h;
  const double d1 = -dir * (2.5 * d1a - 1.5 * d1b);
  const double d2a = (f[1] - 2.0 * f[2] + f[3]) / (h * h);
  const double d2b = (f[2] - 2.0 * f[3] + f[4]) / (h * h);
  const double d2 = 3.0 * d2a - 2.0 * d2b;
  return {value, d1, d2};
}

}  // namespace

ValidationReport validate_kernel(const KernelSpec& spec, int grid_points) {
  if (grid_points < 100) throw InvalidArgument("validate_kernel needs grid_points >= 100");

  ValidationReport report;
  report.kernel_name = spec.name();

  const double step = 1.0 / (grid_points - 1);
  const int beyond = grid_points / 2;  // extends the grid to r = 1.5
  std::vector<double> grid;
  grid.reserve(grid_points + beyond);
  for (int k = 0; k < grid_points + beyond; ++k) grid.push_back(k * step);

  // (a) R in C^2: compare one-sided limits of R, R', R'' at each grid point.
  {
    ClauseResult clause{"a", "R in C^2(R+) (one-sided difference jump test)", true, {}, 0.0};
    double worst = 0.0;
    double worst_d2 = 0.0;
    std::optional<double> witness;
    const double h = kC2Step;
    for (double r : grid) {
      if (r < 4.0 * h) continue;
      const SideLimits left = one_sided(spec, r, h, -1.0);
      const SideLimits right = one_sided(spec, r, h, +1.0);
      const double jump_d2 = std::abs(left.d2 - right.d2);
      const double jump = std::max({std::abs(left.value - right.value),
                                    std::abs(left.d1 - right.d1), jump_d2});
      worst_d2 = std::max(worst_d2, jump_d2);
      if (jump > worst) {
        worst = jump;
        if (jump > kC2JumpTolerance) witness = r;
      }
    }
    clause.measured = worst;
    clause.passed = worst <= kC2JumpTolerance;
    if (!clause.passed) clause.witness = witness;
    report.measured_c2_jump = worst_d2;
    report.clauses.push_back(clause);
  }

  // (b) R >= 0 everywhere and R = 0 beyond r = 1.
  {
    ClauseResult clause{"b", "R(r) >= 0 and R(r) = 0 for r > 1", true, {}, 0.0};
    double most_negative = 0.0;
    for (double r : grid) {
      const double value = spec.R(r);
      const bool bad = value < 0.0 || (r > 1.0 && value != 0.0);
      most_negative = std::min(most_negative, value);
      if (bad && clause.passed) {
        clause.passed = false;
        clause.witness = r;
      }
    }
    clause.measured = most_negative;
    report.clauses.push_back(clause);
  }

  // (c) R >= delta0 > 0 on [0, 1/2].
  {
    ClauseResult clause{"c", "exists delta0 > 0 with R(r) >= delta0 on [0, 1/2]", true, {}, 0.0};
    double lowest = std::numeric_limits<double>::infinity();
    double where = 0.0;
    for (double r : grid) {
      if (r > 0.5) break;
      const double value = spec.R(r);
      if (value < lowest) {
        lowest = value;
        where = r;
      }
    }
    lowest = std::min(lowest, spec.R(0.5));
    report.measured_delta0 = lowest;
    clause.measured = lowest;
    clause.passed = lowest > 0.0 && spec.delta0() > 0.0 && spec.delta0() <= lowest * (1.0 + 1e-12);
    if (!clause.passed) clause.witness = where;
    report.clauses.push_back(clause);
  }

  // bar-R against adaptive quadrature of R.
  {
    ClauseResult clause{"antiderivative", "bar-R(r) = \\int_r^1 R(s) ds", true, {}, 0.0};
    const auto profile = [&spec](double s) { return spec.R(s); };
    const int stride = std::max(1, grid_points / 200);
    double worst = 0.0;
    std::optional<double> witness;
    for (std::size_t k = 0; k < grid.size(); k += stride) {
      const double r = grid[k];
      const double quad = integrate_tail(profile, std::min(r, 1.0));
      const double diff = std::abs(spec.bar_R(r) - quad);
      if (diff > worst) {
        worst = diff;
        witness = r;
      }
    }
    report.antiderivative_residual = worst;
    clause.measured = worst;
    clause.passed = worst <= kAntiderivativeTolerance;
    if (!clause.passed) clause.witness = witness;
    report.clauses.push_back(clause);
  }

  return report;
}

}  // namespace pim
