#pragma once

// Stochastic convolution W^S(t) = int_0^t S(t - s) dW(s), computed two ways:
//
//  * Direct: the Ito sum against the resolvent family.
//  * Reformulated: with c = a(0) != 0 and Y = a * W^S, differentiating gives
//      Y' = c A Y + W~ + c W,   W~(t) = int_0^t a'(t - s) W^S(s) ds,
//      W^S = A Y + W,
//    integrated causally with exponential Euler per mode. For c = 1 this is
//    the Cauchy problem Y' = A Y + W~ + W.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "volterra/kernel.hpp"
#include "volterra/resolvent.hpp"
#include "volterra/spectral_operator.hpp"
#include "volterra/wiener.hpp"

namespace volterra {

enum class ConvolutionMethod { Direct, Reformulated };

inline std::string to_string(ConvolutionMethod m) { return m == ConvolutionMethod::Direct ? "direct" : "reformulated"; }

struct ConvolutionMetadata {
  std::string kernel;
  std::size_t modes = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
};

struct ConvolutionResult {
  HilbertPath w_s;
  ConvolutionMethod method = ConvolutionMethod::Direct;
  ConvolutionMetadata meta;
};

struct MemoryTerm {
  HilbertPath w_tilde;
};

struct CauchyState {
  HilbertPath y;
};

/// How the forcing of the Cauchy problem is held over a step.
enum class ForcingRule {
  LeftPoint,        // forcing frozen at t_{i-1}
  PicardTrapezoid,  // linear in time, one predictor-corrector pass
};

struct ReformulatedResult {
  ConvolutionResult convolution;
  CauchyState cauchy;
  MemoryTerm memory;
  double c = 1.0;  // a(0)
};

inline void check_shapes(const ResolventFamily& fam, const NoisePath& noise) {
  if (!(fam.grid() == noise.grid())) throw std::invalid_argument("resolvent family and noise use different grids");
  if (fam.modes() != noise.modes()) throw std::invalid_argument("resolvent family and noise differ in mode count");
}

/// W^S_k(t_i) = sum_{j<i} s_k(t_i - t_j) dW_{j,k} (left-point Ito rule).
inline ConvolutionResult convolve_direct(const ResolventFamily& fam, const NoisePath& noise) {
  check_shapes(fam, noise);
  const TimeGrid& grid = fam.grid();
  ConvolutionResult out{HilbertPath(grid, fam.modes()), ConvolutionMethod::Direct,
                        {to_string(fam.kernel().kind()), fam.modes(), grid.dt(), noise.seed()}};
  for (std::size_t k = 0; k < fam.modes(); ++k) {
    const auto s = fam.mode(k);
    const auto dw = noise.increments(k);
    auto ws = out.w_s.mode(k);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < i; ++j) acc += s[i - j] * dw[j];
      ws[i] = acc;
    }
  }
  return out;
}

/// W~(t_i) = Q[a', W^S](t_i) per mode.
inline MemoryTerm memory_term(const Kernel& kernel, const HilbertPath& w_s) {
  const TimeGrid& grid = w_s.grid();
  MemoryTerm out{HilbertPath(grid, w_s.modes())};
  const ProductQuadrature quad(kernel, KernelTerm::Derivative, grid);
  for (std::size_t k = 0; k < w_s.modes(); ++k) {
    const auto wt = quad.apply_all(w_s.mode(k));
    std::copy(wt.begin(), wt.end(), out.w_tilde.mode(k).begin());
  }
  return out;
}

namespace detail {

// (1 - e^{-x}) / x
inline double phi1(double x) { return x == 0.0 ? 1.0 : -std::expm1(-x) / x; }

// (x - 1 + e^{-x}) / x^2
inline double phi2(double x) {
  if (x < 1e-3) return 0.5 - x / 6.0 + x * x / 24.0;
  return (x + std::expm1(-x)) / (x * x);
}

}  // namespace detail

/// Exponential Euler for y' = -rate_k y + F_k(t), y(0) = 0, per mode.
inline HilbertPath solve_cauchy(std::span<const double> rates, const HilbertPath& forcing,
                                ForcingRule rule = ForcingRule::LeftPoint) {
  if (rates.size() != forcing.modes()) throw std::invalid_argument("solve_cauchy: mode count mismatch");
  const TimeGrid& grid = forcing.grid();
  const double dt = grid.dt();
  HilbertPath y(grid, forcing.modes());
  for (std::size_t k = 0; k < forcing.modes(); ++k) {
    const double x = rates[k] * dt;
    const double decay = std::exp(-x);
    const double p1 = dt * detail::phi1(x);
    const double p2 = dt * detail::phi2(x);
    const auto f = forcing.mode(k);
    auto yk = y.mode(k);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      yk[i] = decay * yk[i - 1] + p1 * f[i - 1];
      if (rule == ForcingRule::PicardTrapezoid) yk[i] += p2 * (f[i] - f[i - 1]);
    }
  }
  return y;
}

/// Y' = A Y + F for the operator A (c = 1).
inline HilbertPath solve_cauchy(const SpectralOperator& op, const HilbertPath& forcing,
                                ForcingRule rule = ForcingRule::LeftPoint) {
  return solve_cauchy(op.eigenvalues(), forcing, rule);
}

inline ReformulatedResult convolve_reformulated(const SpectralOperator& op, const Kernel& kernel,
                                                const NoisePath& noise, ForcingRule rule = ForcingRule::LeftPoint) {
  const auto origin = kernel.origin_value();
  if (!origin)
    throw std::domain_error(
        "a(0) undefined: the reformulated convolution needs a finite a(0); only the implicit identity "
        "W^S = int a(t-s) A W^S ds + W is available, use the direct method");
  if (*origin == 0.0)
    throw std::domain_error(
        "a(0) = 0: the reformulated convolution needs a(0) != 0; only the implicit identity is available");
  if (op.dimension() != noise.modes()) throw std::invalid_argument("operator and noise differ in mode count");

  const double c = *origin;
  const TimeGrid& grid = noise.grid();
  const double dt = grid.dt();
  const std::size_t n = grid.size();
  const ProductQuadrature quad(kernel, KernelTerm::Derivative, grid);

  ReformulatedResult out{{HilbertPath(grid, op.dimension()), ConvolutionMethod::Reformulated,
                          {to_string(kernel.kind()), op.dimension(), dt, noise.seed()}},
                         {HilbertPath(grid, op.dimension())},
                         {HilbertPath(grid, op.dimension())},
                         c};

  for (std::size_t k = 0; k < op.dimension(); ++k) {
    const double lambda = op.eigenvalue(k);
    const double x = c * lambda * dt;
    const double decay = std::exp(-x);
    const double p1 = dt * detail::phi1(x);
    const double p2 = dt * detail::phi2(x);
    const auto w = noise.values().mode(k);
    auto ws = out.convolution.w_s.mode(k);
    auto y = out.cauchy.y.mode(k);
    auto wt = out.memory.w_tilde.mode(k);
    for (std::size_t i = 1; i < n; ++i) {
      // W^S is known up to t_{i-1}, so W~(t_{i-1}) is complete.
      wt[i - 1] = quad.apply(ws, i - 1);
      const double f_prev = wt[i - 1] + c * w[i - 1];
      y[i] = decay * y[i - 1] + p1 * f_prev;
      ws[i] = -lambda * y[i] + w[i];
      if (rule == ForcingRule::PicardTrapezoid) {
        const double f_next = quad.apply(ws, i) + c * w[i];
        y[i] += p2 * (f_next - f_prev);
        ws[i] = -lambda * y[i] + w[i];
      }
    }
    wt[n - 1] = quad.apply(ws, n - 1);
  }
  return out;
}

/// max over interior grid points of |(Y_{i+1} - Y_{i-1}) / 2dt - (-rate Y_i + F_i)|_H.
inline double cauchy_derivative_check(const HilbertPath& y, std::span<const double> rates, const HilbertPath& forcing) {
  y.check_compatible(forcing);
  if (rates.size() != y.modes()) throw std::invalid_argument("cauchy_derivative_check: mode count mismatch");
  const double dt = y.grid().dt();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < y.times(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < y.modes(); ++k) {
      const double d = (y(k, i + 1) - y(k, i - 1)) / (2.0 * dt) - (-rates[k] * y(k, i) + forcing(k, i));
      s += d * d;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

/// Residual of Y' = c A Y + W~ + c W along a reformulated run.
inline double cauchy_derivative_check(const CauchyState& y, const SpectralOperator& op, const MemoryTerm& w_tilde,
                                      const NoisePath& noise, double c = 1.0) {
  HilbertPath forcing = w_tilde.w_tilde;
  HilbertPath cw = noise.values();
  cw *= c;
  forcing += cw;
  std::vector<double> rates(op.eigenvalues().begin(), op.eigenvalues().end());
  for (double& r : rates) r *= c;
  return cauchy_derivative_check(y.y, rates, forcing);
}

namespace detail {

inline double mode_identity_residual(const ProductQuadrature& quad, double lambda, std::span<const double> ws,
                                     std::span<const double> w, std::size_t i) {
  return ws[i] + lambda * quad.apply(ws, i) - w[i];
}

}  // namespace detail

/// max_i |W^S(t_i) - Q[a, A_n W^S](t_i) - W(t_i)|_H for a bounded (Yosida) operator.
inline double mild_identity_residual_bounded(const SpectralOperator& op_n, const Kernel& kernel,
                                             const ConvolutionResult& result, const NoisePath& noise) {
  if (!op_n.bounded()) throw std::invalid_argument("mild identity check requires a bounded (Yosida) operator");
  result.w_s.check_compatible(noise.values());
  if (op_n.dimension() != result.w_s.modes()) throw std::invalid_argument("operator and path differ in mode count");
  const ProductQuadrature quad(kernel, KernelTerm::Value, result.w_s.grid());
  std::vector<double> sq(result.w_s.times(), 0.0);
  for (std::size_t k = 0; k < op_n.dimension(); ++k) {
    const auto ws = result.w_s.mode(k);
    const auto w = noise.values().mode(k);
    for (std::size_t i = 0; i < sq.size(); ++i) {
      const double r = detail::mode_identity_residual(quad, op_n.eigenvalue(k), ws, w, i);
      sq[i] += r * r;
    }
  }
  double worst = 0.0;
  for (double v : sq) worst = std::max(worst, std::sqrt(v));
  return worst;
}

/// Weak identity tested against e_k: max_i |<W^S, e_k> + lambda_k Q[a, <W^S, e_k>] - <W, e_k>|.
inline double weak_identity_residual(const SpectralOperator& op, const Kernel& kernel, const ConvolutionResult& result,
                                     const NoisePath& noise, std::size_t mode) {
  if (mode >= op.dimension() || mode >= result.w_s.modes())
    throw std::out_of_range("weak_identity_residual: invalid mode index");
  result.w_s.check_compatible(noise.values());
  const ProductQuadrature quad(kernel, KernelTerm::Value, result.w_s.grid());
  const auto ws = result.w_s.mode(mode);
  const auto w = noise.values().mode(mode);
  double worst = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i)
    worst = std::max(worst, std::abs(detail::mode_identity_residual(quad, op.eigenvalue(mode), ws, w, i)));
  return worst;
}

/// X(t) = S(t) x0 + W^S(t).
inline HilbertPath mild_solution(const ResolventFamily& fam, const HVector& x0, const NoisePath& noise) {
  check_shapes(fam, noise);
  fam.op().check_dimension(x0);
  HilbertPath x = convolve_direct(fam, noise).w_s;
  for (std::size_t k = 0; k < fam.modes(); ++k)
    for (std::size_t i = 0; i < x.times(); ++i) x(k, i) += fam(k, i) * x0[k];
  return x;
}

/// sup_i |X(t_i) - Z(t_i)|_H.
inline double sup_discrepancy(const HilbertPath& x, const HilbertPath& z) {
  x.check_compatible(z);
  return (x - z).sup_norm();
}

}  // namespace volterra
