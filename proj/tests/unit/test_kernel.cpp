#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "pim/error.hpp"
#include "pim/kernel.hpp"

namespace {

using pim::KernelSpec;

TEST(EvalR, WendlandAtZero) { EXPECT_DOUBLE_EQ(pim::eval_R(KernelSpec::wendland41(), 0.0), 1.0); }

TEST(EvalR, WendlandVanishesAtSupportEdge) { EXPECT_EQ(pim::eval_R(KernelSpec::wendland41(), 1.0), 0.0); }

TEST(EvalR, WendlandAtHalf) { EXPECT_NEAR(pim::eval_R(KernelSpec::wendland41(), 0.5), 0.1875, 1e-15); }

TEST(EvalR, ExactlyZeroBeyondSupport) {
  for (const auto& k : {KernelSpec::wendland41(), KernelSpec::truncated_gaussian()}) {
    EXPECT_EQ(pim::eval_R(k, 1.0 + 1e-12), 0.0);
    EXPECT_EQ(pim::eval_R(k, 7.0), 0.0);
    EXPECT_EQ(pim::eval_barR(k, 1.5), 0.0);
  }
}

TEST(EvalBarR, WendlandAtSupportEdge) { EXPECT_EQ(pim::eval_barR(KernelSpec::wendland41(), 1.0), 0.0); }

TEST(EvalBarR, WendlandAtZero) { EXPECT_NEAR(pim::eval_barR(KernelSpec::wendland41(), 0.0), 1.0 / 3.0, 1e-14); }

TEST(EvalBarR, WendlandAtHalf) { EXPECT_NEAR(pim::eval_barR(KernelSpec::wendland41(), 0.5), 1.0 / 48.0, 1e-14); }

TEST(EvalBarR, NonincreasingOnGrid) {
  for (const auto& k : {KernelSpec::wendland41(), KernelSpec::truncated_gaussian(),
                        KernelSpec::polynomial({1.0, -1.0})}) {
    double prev = pim::eval_barR(k, 0.0);
    for (int i = 1; i <= 2000; ++i) {
      const double r = 1.2 * i / 2000.0;
      const double cur = pim::eval_barR(k, r);
      EXPECT_LE(cur, prev) << k.name() << " at r=" << r;
      prev = cur;
    }
  }
}

TEST(EvalBarR, DerivativeIsMinusR) {
  const double h = 1e-5;
  for (const auto& k : {KernelSpec::wendland41(), KernelSpec::truncated_gaussian()}) {
    for (int i = 1; i < 100; ++i) {
      const double r = i / 100.0;
      const double d = (pim::eval_barR(k, r + h) - pim::eval_barR(k, r - h)) / (2 * h);
      EXPECT_NEAR(d, -pim::eval_R(k, r), 1e-6) << k.name() << " at r=" << r;
    }
  }
}

TEST(EvalBarR, CustomKernelUsesQuadrature) {
  const auto k = KernelSpec::custom("linear", [](double r) { return 1.0 - r; });
  for (double r : {0.0, 0.25, 0.5, 0.9}) EXPECT_NEAR(k.bar_R(r), 0.5 * (1 - r) * (1 - r), 1e-12);
}

TEST(EvalR, DeterministicAcrossCopies) {
  const auto a = KernelSpec::truncated_gaussian();
  const auto b = a;
  for (int i = 0; i <= 50; ++i) {
    const double r = i / 40.0;
    EXPECT_EQ(pim::eval_R(a, r), pim::eval_R(b, r));
    EXPECT_EQ(pim::eval_barR(a, r), pim::eval_barR(b, r));
    EXPECT_EQ(pim::eval_R(a, r), pim::eval_R(a, r));
  }
}

TEST(KernelSpec, ScaledMultipliesBothProfiles) {
  const auto k = KernelSpec::wendland41();
  const auto c = k.scaled(2.5);
  EXPECT_DOUBLE_EQ(c.R(0.3), 2.5 * k.R(0.3));
  EXPECT_DOUBLE_EQ(c.bar_R(0.3), 2.5 * k.bar_R(0.3));
  EXPECT_DOUBLE_EQ(c.delta0(), 2.5 * k.delta0());
  EXPECT_THROW(k.scaled(0.0), pim::InvalidArgument);
}

TEST(KernelSpec, WendlandDeltaZero) { EXPECT_DOUBLE_EQ(KernelSpec::wendland41().delta0(), 3.0 / 16.0); }

TEST(KernelSpec, FamilyNamesRoundTrip) {
  for (auto f : {pim::KernelFamily::wendland41, pim::KernelFamily::truncated_gaussian, pim::KernelFamily::polynomial})
    EXPECT_EQ(pim::kernel_family_from_string(pim::to_string(f)), f);
  EXPECT_EQ(pim::kernel_family_from_string("truncated-gaussian-smoothed"), pim::KernelFamily::truncated_gaussian);
  EXPECT_FALSE(pim::kernel_family_from_string("gaussian").has_value());
}

TEST(KernelSpec, PolynomialBarRClosedForm) {
  // R = 1 - r^2: bar-R(r) = (1 - r) - (1 - r^3)/3.
  const auto k = KernelSpec::polynomial({1.0, 0.0, -1.0});
  for (double r : {0.0, 0.3, 0.7, 1.0}) EXPECT_NEAR(k.bar_R(r), (1 - r) - (1 - r * r * r) / 3, 1e-15);
}

TEST(ValidateKernel, WendlandPassesEveryClause) {
  const auto report = pim::validate_kernel(KernelSpec::wendland41(), 1000);
  EXPECT_TRUE(report.all_passed());
  EXPECT_GE(report.measured_delta0, 3.0 / 16.0 - 1e-15);
  EXPECT_LT(report.antiderivative_residual, pim::kAntiderivativeTolerance);
  for (const char* clause : {"a", "b", "c", "antiderivative"}) {
    ASSERT_NE(report.find(clause), nullptr) << clause;
    EXPECT_TRUE(report.find(clause)->passed) << clause;
  }
}

TEST(ValidateKernel, TruncatedGaussianPasses) {
  EXPECT_TRUE(pim::validate_kernel(KernelSpec::truncated_gaussian(), 500).all_passed());
}

TEST(ValidateKernel, NegativeLobeFailsSignClause) {
  const auto k = KernelSpec::custom("cos2pi", [](double r) { return std::cos(2 * std::numbers::pi * r); });
  const auto report = pim::validate_kernel(k, 400);
  ASSERT_NE(report.find("b"), nullptr);
  EXPECT_FALSE(report.find("b")->passed);
  ASSERT_TRUE(report.find("b")->witness.has_value());
  EXPECT_LT(k.R(*report.find("b")->witness), 0.0);
  EXPECT_FALSE(report.all_passed());
}

TEST(ValidateKernel, RaisedCosineFailsSmoothnessClause) {
  const auto k = KernelSpec::custom("raised-cosine", [](double r) { return 0.5 * (1 + std::cos(std::numbers::pi * r)); });
  const auto report = pim::validate_kernel(k, 400);
  ASSERT_NE(report.find("a"), nullptr);
  EXPECT_FALSE(report.find("a")->passed);
  ASSERT_TRUE(report.find("a")->witness.has_value());
  EXPECT_NEAR(*report.find("a")->witness, 1.0, 0.05);
  EXPECT_GT(report.measured_c2_jump, pim::kC2JumpTolerance);
}

TEST(ValidateKernel, VanishingNearOriginFailsLowerBound) {
  const auto k = KernelSpec::polynomial({0.0, 1.0, -2.0, 1.0});  // r (1-r)^2
  const auto report = pim::validate_kernel(k, 200);
  ASSERT_NE(report.find("c"), nullptr);
  EXPECT_FALSE(report.find("c")->passed);
}

TEST(ValidateKernel, RejectsCoarseGrid) {
  EXPECT_THROW(pim::validate_kernel(KernelSpec::wendland41(), 99), pim::InvalidArgument);
}

}  // namespace
