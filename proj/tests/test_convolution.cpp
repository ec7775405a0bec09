#include <cmath>

#include <gtest/gtest.h>

#include "volterra/convolution.hpp"
#include "volterra/studies.hpp"

using namespace volterra;

namespace {

NoisePath single_jump(const TimeGrid& g, std::size_t modes, std::size_t mode, double w) {
  std::vector<double> inc(modes * g.steps(), 0.0);
  inc[mode * g.steps()] = w;
  return NoisePath(g, modes, std::move(inc));
}

// Forcing f_k(t) = t on mode 0, zero elsewhere.
HilbertPath ramp(const TimeGrid& g, std::size_t modes) {
  HilbertPath f(g, modes);
  for (std::size_t i = 0; i < g.size(); ++i) f(0, i) = g[i];
  return f;
}

}  // namespace

TEST(Direct, ZeroNoiseGivesZero) {
  const TimeGrid g(1.0, 100);
  const auto fam = build_resolvent_family(make_laplacian_1d(3), exponential_kernel(), g);
  const auto r = convolve_direct(fam, NoisePath::zero(g, 3));
  EXPECT_EQ(r.w_s.sup_norm(), 0.0);
  EXPECT_EQ(r.method, ConvolutionMethod::Direct);
}

TEST(Direct, SingleJumpIsScaledResolvent) {
  const TimeGrid g(1.0, 100);
  const auto fam = build_resolvent_family(make_laplacian_1d(3), exponential_kernel(), g);
  const auto r = convolve_direct(fam, single_jump(g, 3, 1, 0.7));
  for (std::size_t i = 1; i < g.size(); ++i) {
    EXPECT_DOUBLE_EQ(r.w_s(1, i), fam(1, i) * 0.7);
    EXPECT_EQ(r.w_s(0, i), 0.0);
  }
  EXPECT_EQ(r.w_s(1, 0), 0.0);
}

TEST(Direct, LinearInTheNoise) {
  const TimeGrid g(1.0, 200);
  const auto q = QCovariance::power_law(4, 4.0);
  const auto fam = build_resolvent_family(make_laplacian_1d(4), exponential_kernel(), g);
  const auto w1 = sample_path(q, g, 1), w2 = sample_path(q, g, 2);
  const auto lhs = convolve_direct(fam, combine(2.0, w1, -0.5, w2)).w_s;
  const auto rhs = 2.0 * convolve_direct(fam, w1).w_s - 0.5 * convolve_direct(fam, w2).w_s;
  EXPECT_LE(sup_discrepancy(lhs, rhs), 1e-13);
}

TEST(Direct, RejectsShapeMismatch) {
  const TimeGrid g(1.0, 100);
  const auto fam = build_resolvent_family(make_laplacian_1d(3), exponential_kernel(), g);
  EXPECT_THROW(convolve_direct(fam, NoisePath::zero(g, 2)), std::invalid_argument);
  EXPECT_THROW(convolve_direct(fam, NoisePath::zero(TimeGrid(1.0, 50), 3)), std::invalid_argument);
}

TEST(Direct, OrnsteinUhlenbeckVariance) {
  // Constant kernel: W^S_k(T) ~ N(0, q_k sum_j e^{-2 lambda_k (T - t_j)} dt).
  const TimeGrid g(1.0, 200);
  const auto op = make_laplacian_1d(2);
  const auto q = QCovariance::power_law(2, 2.0);
  const auto fam = build_resolvent_family(op, constant_kernel(), g);
  const std::size_t n = 2000;
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> x;
    for (std::size_t e = 0; e < n; ++e) x.push_back(convolve_direct(fam, sample_path(q, g, ensemble_seed(17, e))).w_s(k, g.steps()));
    double m = 0.0, v = 0.0;
    for (double s : x) m += s;
    m /= n;
    for (double s : x) v += (s - m) * (s - m);
    v /= (n - 1);
    double expected = 0.0;
    for (std::size_t j = 0; j < g.steps(); ++j) expected += q[k] * std::exp(-2.0 * op.eigenvalue(k) * (1.0 - g[j])) * g.dt();
    const double continuum = q[k] * (1.0 - std::exp(-2.0 * op.eigenvalue(k))) / (2.0 * op.eigenvalue(k));
    EXPECT_NEAR(v, expected, 3.0 * expected * std::sqrt(2.0 / (n - 1))) << "mode " << k;
    // left-point sum is first order in lambda dt
    EXPECT_NEAR(expected, continuum, 1.2 * op.eigenvalue(k) * g.dt() * continuum);
  }
}

TEST(MemoryTerm, ConstantKernelAndZeroPathVanish) {
  const TimeGrid g(1.0, 100);
  const auto q = QCovariance::power_law(2, 4.0);
  const auto ws = convolve_direct(build_resolvent_family(make_laplacian_1d(2), constant_kernel(), g), sample_path(q, g, 4)).w_s;
  EXPECT_EQ(memory_term(constant_kernel(), ws).w_tilde.sup_norm(), 0.0);
  EXPECT_EQ(memory_term(exponential_kernel(), HilbertPath(g, 2)).w_tilde.sup_norm(), 0.0);
}

TEST(MemoryTerm, ExponentialKernelMatchesNaiveQuadrature) {
  const TimeGrid g(1.0, 200);
  const auto q = QCovariance::power_law(2, 4.0);
  const auto ws = convolve_direct(build_resolvent_family(make_laplacian_1d(2), exponential_kernel(), g), sample_path(q, g, 4)).w_s;
  const auto wt = memory_term(exponential_kernel(), ws).w_tilde;
  EXPECT_EQ(wt(0, 0), 0.0);
  for (std::size_t i : {1u, 37u, 200u})
    for (std::size_t k = 0; k < 2; ++k) {
      double naive = 0.0;  // trapezoid of -e^{-(t_i - s)} W^S(s)
      for (std::size_t j = 0; j <= i; ++j) {
        const double w = (j == 0 || j == i) ? 0.5 : 1.0;
        naive += w * g.dt() * -std::exp(-(g[i] - g[j])) * ws(k, j);
      }
      EXPECT_NEAR(wt(k, i), naive, 1e-14);
    }
}

TEST(MemoryTerm, FractionalKernelMatchesFineQuadrature) {
  // Q[a', u] against a fine midpoint sum for a smooth u.
  const TimeGrid g(1.0, 100);
  const auto k = fractional_kernel(0.5, 0.1);
  HilbertPath u(g, 1);
  for (std::size_t i = 0; i < g.size(); ++i) u(0, i) = std::sin(3.0 * g[i]);
  const auto wt = memory_term(k, u).w_tilde;
  double fine = 0.0;
  const int m = 200000;
  for (int j = 0; j < m; ++j) {
    const double s = (j + 0.5) / m;
    fine += k.derivative(1.0 - s) * std::sin(3.0 * s) / m;
  }
  EXPECT_NEAR(wt(0, 100), fine, 1e-3 * std::abs(fine));
}

TEST(Reformulated, ZeroNoiseGivesZero) {
  const TimeGrid g(1.0, 100);
  const auto r = convolve_reformulated(make_laplacian_1d(3), exponential_kernel(), NoisePath::zero(g, 3));
  EXPECT_EQ(r.convolution.w_s.sup_norm(), 0.0);
  EXPECT_EQ(r.cauchy.y.sup_norm(), 0.0);
  EXPECT_EQ(r.memory.w_tilde.sup_norm(), 0.0);
}

TEST(Reformulated, InitialValuesAreZero) {
  const TimeGrid g(1.0, 100);
  const auto op = make_laplacian_1d(3);
  const auto r = convolve_reformulated(op, exponential_kernel(), sample_path(QCovariance::power_law(3, 4.0), g, 8));
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r.convolution.w_s(k, 0), 0.0);
    EXPECT_EQ(r.cauchy.y(k, 0), 0.0);
    EXPECT_EQ(r.memory.w_tilde(k, 0), 0.0);
  }
  EXPECT_EQ(r.c, 1.0);
}

TEST(Reformulated, ConstantKernelReducesToSemigroupFormula) {
  // W~ = 0 and W^S = A int T(t-s) W(s) ds + W, with the integral stepped independently.
  const TimeGrid g(1.0, 400);
  const auto op = make_laplacian_1d(3);
  const auto noise = sample_path(QCovariance::power_law(3, 4.0), g, 21);
  const auto r = convolve_reformulated(op, constant_kernel(), noise);
  EXPECT_EQ(r.memory.w_tilde.sup_norm(), 0.0);
  for (std::size_t k = 0; k < 3; ++k) {
    const double l = op.eigenvalue(k);
    double y = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
      // exact integral of e^{-l (t_i - s)} against W frozen at t_{i-1}
      y = std::exp(-l * g.dt()) * y + (1.0 - std::exp(-l * g.dt())) / l * noise(k, i - 1);
      EXPECT_NEAR(r.convolution.w_s(k, i), -l * y + noise(k, i), 1e-12);
    }
  }
}

TEST(Reformulated, RejectsUndefinedOrZeroOrigin) {
  const TimeGrid g(1.0, 10);
  const auto op = make_laplacian_1d(2);
  const auto noise = NoisePath::zero(g, 2);
  try {
    convolve_reformulated(op, fractional_kernel(0.5), noise);
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("a(0) undefined"), std::string::npos);
  }
  try {
    convolve_reformulated(op, tabulated_kernel(0.5, {0.0, 1.0, 1.0}), noise);
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("a(0) = 0"), std::string::npos);
  }
}

TEST(CrossMethod, DiscrepancyShrinksForEveryBuiltInKernel) {
  for (const auto& k : {exponential_kernel(), constant_kernel(), fractional_kernel(0.5, 0.01), fractional_kernel(0.7, 0.05)}) {
    StudySetup s{make_laplacian_1d(4), k, QCovariance::power_law(4, 4.0), 1.0, {250, 500, 1000}, 3, 3, {}};
    const auto t = cross_method_study(s);
    EXPECT_EQ(count_strictly_decreasing(t), 3u) << to_string(k.kind());
    const auto med = level_medians(t);
    EXPECT_LE(med.back(), 0.5 * med.front()) << to_string(k.kind());
  }
}

TEST(CrossMethod, PicardTrapezoidRuleAlsoConverges) {
  StudySetup s{make_laplacian_1d(4), exponential_kernel(), QCovariance::power_law(4, 4.0), 1.0, {250, 500, 1000}, 5, 3, {}};
  const auto t = cross_method_study(s, ForcingRule::PicardTrapezoid);
  EXPECT_EQ(count_strictly_decreasing(t), 3u);
}

TEST(Cauchy, ZeroForcingGivesZero) {
  const TimeGrid g(1.0, 50);
  const std::vector<double> rates{1.0, 10.0};
  const auto y = solve_cauchy(rates, HilbertPath(g, 2));
  EXPECT_EQ(y.sup_norm(), 0.0);
  EXPECT_EQ(cauchy_derivative_check(y, rates, HilbertPath(g, 2)), 0.0);
}

TEST(Cauchy, RampForcingResidualIsFirstOrder) {
  const std::vector<double> rates{5.0, 40.0};
  double prev = 0.0;
  for (std::size_t n : {200, 400, 800}) {
    const TimeGrid g(1.0, n);
    const auto f = ramp(g, 2);
    const double r = cauchy_derivative_check(solve_cauchy(rates, f), rates, f);
    if (prev > 0.0) {
      EXPECT_NEAR(prev / r, 2.0, 0.3);
    }
    prev = r;
  }
}

TEST(Cauchy, PerturbationRaisesResidual) {
  const TimeGrid g(1.0, 200);
  const std::vector<double> rates{5.0};
  const auto f = ramp(g, 1);
  auto y = solve_cauchy(rates, f);
  const double base = cauchy_derivative_check(y, rates, f);
  y(0, 100) += 0.1;
  EXPECT_GT(cauchy_derivative_check(y, rates, f), base + 1.0);
}

TEST(Cauchy, ReformulatedRunSatisfiesItsCauchyProblem) {
  const auto op = make_laplacian_1d(4);
  const auto q = QCovariance::power_law(4, 4.0);
  std::vector<double> res;
  for (std::size_t n : {500, 1000, 2000}) {
    const auto noise = sample_path(q, TimeGrid(1.0, n), 5);
    const auto r = convolve_reformulated(op, exponential_kernel(), noise);
    res.push_back(cauchy_derivative_check(r.cauchy, op, r.memory, noise, r.c));
  }
  // Brownian forcing: the residual is dominated by increments of W and shrinks like dt^{1/2}.
  EXPECT_LT(res[2], res[0]);
}

TEST(Identity, MildIdentityNeedsBoundedOperator) {
  const TimeGrid g(1.0, 50);
  const auto op = make_laplacian_1d(2);
  const auto fam = build_resolvent_family(op, exponential_kernel(), g);
  const auto noise = NoisePath::zero(g, 2);
  EXPECT_THROW(mild_identity_residual_bounded(op, exponential_kernel(), convolve_direct(fam, noise), noise),
               std::invalid_argument);
  const auto op_n = yosida(op, 1e3);
  const auto fam_n = build_resolvent_family(op_n, exponential_kernel(), g);
  EXPECT_EQ(mild_identity_residual_bounded(op_n, exponential_kernel(), convolve_direct(fam_n, noise), noise), 0.0);
}

TEST(Identity, MildIdentityResidualHalvesWithStep) {
  StudySetup s{make_laplacian_1d(4), exponential_kernel(), QCovariance::power_law(4, 4.0), 1.0, {500, 1000, 2000}, 1, 2, {}};
  for (const auto& row : identity_study(s, 1e3))
    for (std::size_t j = 1; j < row.size(); ++j) EXPECT_NEAR(row[j - 1] / row[j], 2.0, 0.6);
}

TEST(Identity, ConstantKernelOrnsteinUhlenbeck) {
  StudySetup s{make_laplacian_1d(3), constant_kernel(), QCovariance::power_law(3, 4.0), 1.0, {500, 1000, 2000}, 1, 2, {}};
  for (const auto& row : identity_study(s, 1e6))
    for (std::size_t j = 1; j < row.size(); ++j) EXPECT_LT(row[j], row[j - 1]);
}

TEST(Identity, WeakEqualsMildForOneMode) {
  const TimeGrid g(1.0, 300);
  const auto op_n = yosida(SpectralOperator({std::numbers::pi * std::numbers::pi}), 1e3);
  const auto noise = sample_path(QCovariance({1.0}), g, 12);
  const auto ws = convolve_direct(build_resolvent_family(op_n, exponential_kernel(), g), noise);
  EXPECT_DOUBLE_EQ(weak_identity_residual(op_n, exponential_kernel(), ws, noise, 0),
                   mild_identity_residual_bounded(op_n, exponential_kernel(), ws, noise));
  EXPECT_THROW(weak_identity_residual(op_n, exponential_kernel(), ws, noise, 1), std::out_of_range);
  const auto zero = NoisePath::zero(g, 1);
  const auto ws0 = convolve_direct(build_resolvent_family(op_n, exponential_kernel(), g), zero);
  EXPECT_EQ(weak_identity_residual(op_n, exponential_kernel(), ws0, zero, 0), 0.0);
}

TEST(Identity, WeakResidualShrinksUnderRefinement) {
  const auto op = make_laplacian_1d(4);
  const auto q = QCovariance::power_law(4, 4.0);
  std::vector<double> res;
  for (std::size_t n : {500, 1000, 2000}) {
    const TimeGrid g(1.0, n);
    const auto noise = sample_path(q, g, 31);
    const auto ws = convolve_direct(build_resolvent_family(op, exponential_kernel(), g), noise);
    res.push_back(weak_identity_residual(op, exponential_kernel(), ws, noise, 0));
  }
  EXPECT_LT(res[1], res[0]);
  EXPECT_LT(res[2], res[1]);
}

TEST(MildSolution, ZeroNoiseAndZeroInitialValue) {
  const TimeGrid g(1.0, 100);
  const auto op = make_laplacian_1d(3);
  const auto fam = build_resolvent_family(op, exponential_kernel(), g);
  const HVector x0({1.0, -2.0, 0.5});
  const auto x = mild_solution(fam, x0, NoisePath::zero(g, 3));
  EXPECT_EQ(x.at(0), x0);
  for (std::size_t i = 0; i < g.size(); i += 10) EXPECT_EQ(x.at(i), fam.apply(i, x0));
  const auto noise = sample_path(QCovariance::power_law(3, 4.0), g, 2);
  EXPECT_EQ(sup_discrepancy(mild_solution(fam, HVector(3), noise), convolve_direct(fam, noise).w_s), 0.0);
}

TEST(MildSolution, OrnsteinUhlenbeckMean) {
  const TimeGrid g(0.1, 100);
  const auto op = make_laplacian_1d(2);
  const auto fam = build_resolvent_family(op, constant_kernel(), g);
  const HVector x0({1.0, 1.0});
  const auto q = QCovariance::power_law(2, 4.0);
  const std::size_t n = 1000;
  for (std::size_t k = 0; k < 2; ++k) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      const double v = mild_solution(fam, x0, sample_path(q, g, ensemble_seed(77, e)))(k, g.steps());
      m += v;
      m2 += v * v;
    }
    m /= n;
    const double se = std::sqrt((m2 / n - m * m) / n);
    EXPECT_NEAR(m, std::exp(-op.eigenvalue(k) * 0.1) * x0[k], 3.0 * se + 1e-4);
  }
}
