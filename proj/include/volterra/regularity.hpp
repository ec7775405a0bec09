#pragma once

// Temporal and spatial regularity diagnostics for discretized H-valued
// paths: increment moduli under refinement, fractional-power norms,
// Sobolev-Slobodeckij and interpolation-space norms, and maximal-regularity
// norms. Everything here is a finite-dimensional surrogate; nothing asserts
// a constant.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "volterra/spectral_operator.hpp"
#include "volterra/wiener.hpp"

namespace volterra {

/// max_i |X(t_{i+1}) - X(t_i)|_H.
inline double max_increment(const HilbertPath& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < x.times(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.modes(); ++k) {
      const double d = x(k, i + 1) - x(k, i);
      s += d * d;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

struct ModulusRow {
  double dt = 0.0;
  double max_increment = 0.0;
};

struct ModulusTable {
  std::vector<ModulusRow> rows;
  /// Least-squares slope of log(max increment) against log(dt). Empirical
  /// diagnostic only; empty when some increment is zero.
  std::optional<double> exponent;
  double regression_residual = 0.0;

  /// Max increment strictly decreases from each level to the next finer one.
  bool decreasing() const {
    for (std::size_t j = 1; j < rows.size(); ++j)
      if (!(rows[j].max_increment < rows[j - 1].max_increment)) return false;
    return true;
  }
};

/// levels ordered from coarse to fine.
inline ModulusTable path_modulus(std::span<const HilbertPath> levels) {
  if (levels.size() < 2) throw std::invalid_argument("path_modulus: need at least 2 refinement levels");
  ModulusTable t;
  bool positive = true;
  for (const auto& x : levels) {
    const double m = max_increment(x);
    t.rows.push_back({x.grid().dt(), m});
    if (!(m > 0.0)) positive = false;
  }
  if (!positive) return t;
  const double n = static_cast<double>(t.rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : t.rows) {
    const double lx = std::log(r.dt), ly = std::log(r.max_increment);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return t;
  const double slope = (n * sxy - sx * sy) / denom;
  const double icept = (sy - slope * sx) / n;
  double ss = 0.0;
  for (const auto& r : t.rows) {
    const double e = std::log(r.max_increment) - (icept + slope * std::log(r.dt));
    ss += e * e;
  }
  t.exponent = slope;
  t.regression_residual = std::sqrt(ss / n);
  return t;
}

/// (-A)^gamma applied at every grid time.
inline HilbertPath fractional_power_path(const SpectralOperator& op, double gamma, const HilbertPath& x) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::domain_error("fractional power: gamma must lie in (0, 1)");
  if (op.dimension() != x.modes()) throw std::invalid_argument("operator and path differ in mode count");
  HilbertPath out = x;
  for (std::size_t k = 0; k < x.modes(); ++k) {
    const double f = std::pow(op.eigenvalue(k), gamma);
    for (double& v : out.mode(k)) v *= f;
  }
  return out;
}

struct SpatialRegularityReport {
  double gamma = 0.0;
  std::vector<double> norm_path;  // |(-A)^gamma W^S(t_i)|_H
  bool all_finite = true;
  double max_increment = 0.0;     // of t -> (-A)^gamma W^S(t)
  /// sum_{k <= K'} q_k lambda_k^{2 gamma}, K' = 1..K.
  std::vector<double> partial_sums;
};

inline std::vector<double> hypothesis_partial_sums(const SpectralOperator& op, const QCovariance& q, double gamma) {
  if (op.dimension() != q.modes()) throw std::invalid_argument("operator and covariance differ in mode count");
  std::vector<double> sums(op.dimension());
  double acc = 0.0;
  for (std::size_t k = 0; k < op.dimension(); ++k) {
    acc += q[k] * std::pow(op.eigenvalue(k), 2.0 * gamma);
    sums[k] = acc;
  }
  return sums;
}

inline SpatialRegularityReport spatial_regularity(const SpectralOperator& op, double gamma, const HilbertPath& w_s,
                                                  const QCovariance& q) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("spatial_regularity: gamma must lie in (0, 1)");
  SpatialRegularityReport rep;
  rep.gamma = gamma;
  const auto frac = fractional_power_path(op, gamma, w_s);
  rep.norm_path.resize(frac.times());
  for (std::size_t i = 0; i < frac.times(); ++i) {
    rep.norm_path[i] = frac.norm_at(i);
    if (!std::isfinite(rep.norm_path[i])) rep.all_finite = false;
  }
  rep.max_increment = max_increment(frac);
  rep.partial_sums = hypothesis_partial_sums(op, q, gamma);
  return rep;
}

struct ModeGaussianity {
  double skewness = 0.0;
  double z_skewness = 0.0;
  double excess_kurtosis = 0.0;
  double z_kurtosis = 0.0;
  bool pass = true;
};

struct GaussianityReport {
  std::vector<ModeGaussianity> modes;
  double pass_fraction() const {
    if (modes.empty()) return 0.0;
    const auto n = std::count_if(modes.begin(), modes.end(), [](const ModeGaussianity& m) { return m.pass; });
    return static_cast<double>(n) / static_cast<double>(modes.size());
  }
};

/// Skewness and excess-kurtosis z-tests (standard errors sqrt(6/n), sqrt(24/n))
/// per mode; samples[e][k] is member e, mode k.
inline GaussianityReport gaussianity_ztests(std::span<const HVector> samples, double threshold = 3.0) {
  if (samples.size() < 8) throw std::invalid_argument("gaussianity_ztests: need at least 8 samples");
  const std::size_t modes = samples.front().size();
  const double n = static_cast<double>(samples.size());
  GaussianityReport rep;
  for (std::size_t k = 0; k < modes; ++k) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s[k];
    mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (const auto& s : samples) {
      const double d = s[k] - mean;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    ModeGaussianity g;
    if (m2 > 0.0) {
      g.skewness = m3 / std::pow(m2, 1.5);
      g.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    g.z_skewness = g.skewness / std::sqrt(6.0 / n);
    g.z_kurtosis = g.excess_kurtosis / std::sqrt(24.0 / n);
    g.pass = std::abs(g.z_skewness) <= threshold && std::abs(g.z_kurtosis) <= threshold;
    rep.modes.push_back(g);
  }
  return rep;
}

namespace detail {

inline std::vector<double> trapezoid_weights(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n > 0) {
    w.front() = 0.5;
    w.back() = 0.5;
  }
  return w;
}

/// (int |f|^2 dt)^{1/2} by the trapezoid rule.
inline double l2_norm(std::span<const double> f, double dt) {
  const auto w = trapezoid_weights(f.size());
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] * f[i];
  return std::sqrt(s * dt);
}

/// Slobodeckij double sum over i != j with trapezoid weights; `dist(i, j)`
/// is the H-type norm of Y(t_i) - Y(t_j).
template <class Dist>
double slobodeckij_seminorm(std::size_t n, double dt, double order, Dist&& dist) {
  const auto w = trapezoid_weights(n);
  std::vector<double> lag(n, 0.0);
  for (std::size_t d = 1; d < n; ++d) lag[d] = std::pow(static_cast<double>(d) * dt, -(1.0 + 2.0 * order));
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = dist(i, j);
      s += w[i] * w[j] * v * v * lag[j - i];
    }
  return std::sqrt(2.0 * s * dt * dt);
}

}  // namespace detail

struct InterpolationReport {
  double gamma = 0.0;
  std::optional<double> theta;
  double l2 = 0.0;                  // |Y|_{L^2(H)}
  double seminorm = 0.0;            // [Y]_{W^{gamma,2}(H)}
  double sobolev = 0.0;             // |Y|_{W^{gamma,2}(H)}
  double interpolation = 0.0;       // |Y|_{L^2(D_A(gamma,2))}, proxy |x| + |(-A)^gamma x|
  double forcing_l2 = 0.0;          // |W + W~|_{L^2(H)}
  double m_hat = 0.0;               // (sobolev + interpolation) / forcing_l2
  std::optional<double> mixed;      // |Y|_{W^{gamma-theta,2}(D_A(theta,2))}, experimental
};

inline InterpolationReport interpolation_norms(const HilbertPath& y, const SpectralOperator& op, double gamma,
                                               const HilbertPath& forcing, std::optional<double> theta = {}) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("interpolation_norms: gamma must lie in (0, 1)");
  if (theta && !(*theta > 0.0 && *theta < gamma))
    throw std::domain_error("interpolation_norms: theta must lie in (0, gamma)");
  y.check_compatible(forcing);
  if (op.dimension() != y.modes()) throw std::invalid_argument("operator and path differ in mode count");

  const std::size_t n = y.times();
  const double dt = y.grid().dt();
  InterpolationReport rep;
  rep.gamma = gamma;
  rep.theta = theta;

  std::vector<double> h_norm(n), proxy(n), f_norm(n);
  const auto frac = fractional_power_path(op, gamma, y);
  for (std::size_t i = 0; i < n; ++i) {
    h_norm[i] = y.norm_at(i);
    proxy[i] = h_norm[i] + frac.norm_at(i);
    f_norm[i] = forcing.norm_at(i);
  }
  rep.l2 = detail::l2_norm(h_norm, dt);
  rep.interpolation = detail::l2_norm(proxy, dt);
  rep.forcing_l2 = detail::l2_norm(f_norm, dt);

  auto h_dist = [&y](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < y.modes(); ++k) {
      const double d = y(k, i) - y(k, j);
      s += d * d;
    }
    return std::sqrt(s);
  };
  rep.seminorm = detail::slobodeckij_seminorm(n, dt, gamma, h_dist);
  rep.sobolev = std::hypot(rep.l2, rep.seminorm);
  rep.m_hat = rep.forcing_l2 > 0.0 ? (rep.sobolev + rep.interpolation) / rep.forcing_l2 : 0.0;

  if (theta) {
    const auto ftheta = fractional_power_path(op, *theta, y);
    std::vector<double> ptheta(n);
    for (std::size_t i = 0; i < n; ++i) ptheta[i] = h_norm[i] + ftheta.norm_at(i);
    auto proxy_dist = [&](std::size_t i, std::size_t j) {
      double s = 0.0, sf = 0.0;
      for (std::size_t k = 0; k < y.modes(); ++k) {
        const double d = y(k, i) - y(k, j);
        const double df = ftheta(k, i) - ftheta(k, j);
        s += d * d;
        sf += df * df;
      }
      return std::sqrt(s) + std::sqrt(sf);
    };
    const double semi = detail::slobodeckij_seminorm(n, dt, gamma - *theta, proxy_dist);
    rep.mixed = std::hypot(detail::l2_norm(ptheta, dt), semi);
  }
  return rep;
}

struct MaximalRegularityReport {
  double l2 = 0.0;             // |Y|_{L^2(H)}
  double derivative_l2 = 0.0;  // |Y'|_{L^2(H)} by forward difference quotients
  double w12 = 0.0;            // |Y|_{W^{1,2}(H)}
  double a_l2 = 0.0;           // |AY|_{L^2(H)}
  double total() const noexcept { return w12 + a_l2; }
};

inline MaximalRegularityReport maximal_regularity_norms(const HilbertPath& y, const SpectralOperator& op) {
  if (op.dimension() != y.modes()) throw std::invalid_argument("operator and path differ in mode count");
  const std::size_t n = y.times();
  const double dt = y.grid().dt();
  MaximalRegularityReport rep;
  std::vector<double> h(n), ay(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = y.norm_at(i);
    double s = 0.0;
    for (std::size_t k = 0; k < y.modes(); ++k) {
      const double v = op.eigenvalue(k) * y(k, i);
      s += v * v;
    }
    ay[i] = std::sqrt(s);
  }
  rep.l2 = detail::l2_norm(h, dt);
  rep.a_l2 = detail::l2_norm(ay, dt);
  double d2 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < y.modes(); ++k) {
      const double d = (y(k, i + 1) - y(k, i)) / dt;
      s += d * d;
    }
    d2 += s * dt;
  }
  rep.derivative_l2 = std::sqrt(d2);
  rep.w12 = std::hypot(rep.l2, rep.derivative_l2);
  return rep;
}

}  // namespace volterra
