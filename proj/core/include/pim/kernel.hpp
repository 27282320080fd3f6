#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pim {

enum class KernelFamily {
  wendland41,          ///< (1-r)^4 (4r+1) on [0,1]
  truncated_gaussian,  ///< e^{-r} minus its quadratic Taylor polynomial at r=1
  polynomial,          ///< user coefficients c_0 + c_1 r + ... on [0,1]
  custom,              ///< arbitrary callable; bar-R by adaptive quadrature
};

const char* to_string(KernelFamily family);
std::optional<KernelFamily> kernel_family_from_string(const std::string& name);

/**
 * Radial profile R(r) of the integral kernel together with its tail integral
 * bar-R(r) = \int_r^1 R(s) ds. The argument is the scaled squared distance
 * r = |x-y|^2 / 4t, so the support in ambient distance is 2 sqrt(t).
 *
 * Instances are immutable and cheap to copy; the custom family shares its
 * callable between copies.
 */
class KernelSpec {
 public:
  static KernelSpec wendland41();
  static KernelSpec truncated_gaussian();
  /// R(r) = sum_k coeffs[k] r^k for r in [0,1], 0 beyond.
  static KernelSpec polynomial(std::vector<double> coeffs);
  /// Diagnostic-only kernels (validation tests); R is cut off at r > 1.
  static KernelSpec custom(std::string name, std::function<double(double)> profile);

  KernelFamily family() const noexcept { return family_; }
  const std::string& name() const noexcept { return name_; }
  /// Certified lower bound of R on [0, 1/2]; nonpositive if none exists.
  double delta0() const noexcept { return delta0_; }
  /// Overall multiplicative scale (1 unless produced by scaled()).
  double scale() const noexcept { return scale_; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  double R(double r) const;
  double bar_R(double r) const;

  /// Same profile multiplied by c > 0 (and bar-R with it).
  KernelSpec scaled(double c) const;

 private:
  KernelSpec() = default;

  double raw_R(double r) const;
  double raw_bar_R(double r) const;

  KernelFamily family_ = KernelFamily::wendland41;
  std::string name_;
  std::vector<double> coeffs_;
  std::vector<double> bar_coeffs_;
  std::shared_ptr<const std::function<double(double)>> profile_;
  double delta0_ = 0.0;
  double scale_ = 1.0;
  double normalizer_ = 1.0;
};

double eval_R(const KernelSpec& spec, double r);
double eval_barR(const KernelSpec& spec, double r);

struct ClauseResult {
  std::string clause;  ///< "a", "b", "c" or "antiderivative"
  std::string description;
  bool passed = false;
  std::optional<double> witness;  ///< grid point where the clause fails
  double measured = 0.0;
};

struct ValidationReport {
  std::string kernel_name;
  std::vector<ClauseResult> clauses;
  double measured_delta0 = 0.0;
  double measured_c2_jump = 0.0;
  double antiderivative_residual = 0.0;

  bool all_passed() const;
  const ClauseResult* find(const std::string& clause) const;
};

/// Mismatch of one-sided second differences above which R counts as not C^2.
inline constexpr double kC2JumpTolerance = 1e-3;
inline constexpr double kC2Step = 1e-4;
inline constexpr double kAntiderivativeTolerance = 1e-8;

/**
 * Checks the kernel against smoothness (a), sign and support (b) and the
 * positive lower bound on [0, 1/2] (c), plus bar-R against quadrature of R.
 * Failures are reported, never thrown.
 */
ValidationReport validate_kernel(const KernelSpec& spec, int grid_points);

}  // namespace pim
