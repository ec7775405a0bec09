#include <cmath>

#include <gtest/gtest.h>

#include "volterra/resolvent.hpp"

using namespace volterra;

TEST(ScalarResolvent, ConstantKernelIsSemigroup) {
  const TimeGrid g(1.0, 1000);
  const double lambda = 4.0 * std::numbers::pi * std::numbers::pi;
  const auto s = scalar_resolvent(constant_kernel(), lambda, g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(s[i], std::exp(-lambda * g[i]), 1e-4);
}

TEST(ScalarResolvent, ExponentialKernelClosedForm) {
  const TimeGrid g(2.0, 2000);
  const auto s = scalar_resolvent(exponential_kernel(), 1.0, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(s[i] - (0.5 + 0.5 * std::exp(-2.0 * g[i]))));
  EXPECT_LE(worst, 1e-5);
}

TEST(ScalarResolvent, LambdaZeroIsOne) {
  const auto s = scalar_resolvent(fractional_kernel(0.5, 0.01), 0.0, TimeGrid(1.0, 100));
  for (double v : s.values()) EXPECT_EQ(v, 1.0);
  EXPECT_THROW(scalar_resolvent(exponential_kernel(), -1.0, TimeGrid(1.0, 10)), std::invalid_argument);
}

TEST(ScalarResolvent, RefinementConvergesSecondOrder) {
  // Error against the closed form over the whole solver mesh, including the
  // graded layer that resolves stiff modes.
  const auto k = exponential_kernel();
  for (double lambda : {1.0, 50.0, 500.0, 5000.0}) {
    auto error = [&](std::size_t n) {
      const auto sol = scalar_resolvent_solution(k, lambda, TimeGrid(1.0, n));
      double e = 0.0;
      for (std::size_t i = 0; i < sol.mesh.size(); ++i) {
        const double exact = (1.0 + lambda * std::exp(-(1.0 + lambda) * sol.mesh[i])) / (1.0 + lambda);
        e = std::max(e, std::abs(sol.values[i] - exact));
      }
      return e;
    };
    EXPECT_GT(error(200) / error(400), 3.0) << "lambda " << lambda;
  }
}

TEST(ResolventFamily, StartsAtIdentityAndCommutes) {
  const auto op = make_laplacian_1d(4);
  const auto fam = build_resolvent_family(op, exponential_kernel(), TimeGrid(1.0, 200));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(fam(k, 0), 1.0);
  for (std::size_t i : {0u, 50u, 200u})
    for (std::size_t k = 0; k < 4; ++k) {
      const auto e = HVector::basis(4, k);
      EXPECT_EQ(op.apply(fam.apply(i, e)), fam.apply(i, op.apply(e)));
    }
  EXPECT_TRUE(fam.warnings().empty());
}

TEST(ResolventFamily, ConstantKernelMatchesSemigroup) {
  const auto op = make_laplacian_1d(4);
  const TimeGrid g(1.0, 1000);
  const auto fam = build_resolvent_family(op, constant_kernel(), g);
  for (std::size_t i = 0; i < g.size(); i += 25)
    for (std::size_t k = 0; k < 4; ++k) {
      const auto e = HVector::basis(4, k);
      EXPECT_NEAR((fam.apply(i, e) - semigroup_apply(op, g[i], e)).norm(), 0.0, 1e-4);
    }
}

TEST(ResolventFamily, ExponentialKernelBoundsAndLimit) {
  const auto op = make_laplacian_1d(4);
  const TimeGrid g(5.0, 2000);
  const auto fam = build_resolvent_family(op, exponential_kernel(), g);
  for (std::size_t k = 0; k < 4; ++k) {
    const double l = op.eigenvalue(k);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_GE(fam(k, i), -1e-10);
      EXPECT_LE(fam(k, i), 1.0);
      const double exact = 1.0 / (1.0 + l) + l * std::exp(-(1.0 + l) * g[i]) / (1.0 + l);
      EXPECT_NEAR(fam(k, i), exact, 2e-4);
    }
    EXPECT_NEAR(fam(k, g.steps()), 1.0 / (1.0 + l), 1e-6);
  }
}

TEST(ResolventFamily, WarnsForUnknownPositivity) {
  std::vector<double> v(201, 1.0);
  const auto fam = build_resolvent_family(make_laplacian_1d(2), tabulated_kernel(0.01, v), TimeGrid(1.0, 50));
  EXPECT_FALSE(fam.warnings().empty());
}

TEST(ResolventResidual, FreshFamilyIsSolvedAndPerturbationIsSeen) {
  const auto op = make_laplacian_1d(4);
  for (const auto& k : {exponential_kernel(), constant_kernel(), fractional_kernel(0.5, 0.01)}) {
    const auto fam = build_resolvent_family(op, k, TimeGrid(1.0, 500));
    EXPECT_LE(resolvent_residual(fam), 1e-10) << to_string(k.kind());
    EXPECT_GE(resolvent_residual(fam.with_perturbation(2, 100, 0.1)), 0.05) << to_string(k.kind());
  }
}

TEST(ResolventResidual, LambdaZeroRowsContributeNothing) {
  // Tiny eigenvalue stands in for a kernel mode: row stays at one and residual vanishes.
  const SpectralOperator op({1e-300});
  const auto fam = build_resolvent_family(op, exponential_kernel(), TimeGrid(1.0, 100));
  EXPECT_EQ(resolvent_residual(fam), 0.0);
}

TEST(YosidaConvergence, DecreasingWithOneOverNRate) {
  const auto op = make_laplacian_1d(4);
  const std::vector<double> ns{1e2, 1e3, 1e4, 1e5};
  const auto rep = yosida_resolvent_convergence(op, exponential_kernel(), TimeGrid(1.0, 1000), ns);
  ASSERT_EQ(rep.rows.size(), 4u);
  EXPECT_TRUE(rep.strictly_decreasing);
  for (std::size_t j = 1; j < 4; ++j) {
    EXPECT_GE(rep.rows[j].ratio, 5.0);
    EXPECT_LE(rep.rows[j].ratio, 15.0);
  }
  EXPECT_LE(rep.empirical_M, 1.0);
  EXPECT_EQ(rep.empirical_w0, 0.0);
}

TEST(YosidaConvergence, LargeNBound) {
  const auto op = make_laplacian_1d(16);
  const std::vector<double> ns{1e6};
  const auto rep = yosida_resolvent_convergence(op, exponential_kernel(), TimeGrid(1.0, 1000), ns);
  EXPECT_LE(rep.rows[0].sup_difference, 1e-3);
}

TEST(YosidaConvergence, RejectsBadNList) {
  const auto op = make_laplacian_1d(2);
  const std::vector<double> bad{10.0, 5.0}, neg{-1.0};
  EXPECT_THROW(yosida_resolvent_convergence(op, exponential_kernel(), TimeGrid(1.0, 10), bad), std::invalid_argument);
  EXPECT_THROW(yosida_resolvent_convergence(op, exponential_kernel(), TimeGrid(1.0, 10), neg), std::invalid_argument);
}
