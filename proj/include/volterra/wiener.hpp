#pragma once

// Trace-class Q-Wiener process with Q diagonal in the eigenbasis of A.
//
// Paths are generated per mode from an independent stream keyed by
// (seed, mode). The stream first fills the odd base grid N0 = N / 2^L and
// then refines it level by level with Brownian-bridge midpoints, so grids
// N0 * 2^l sampled with the same seed agree at their shared times.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "volterra/spectral_operator.hpp"
#include "volterra/time_grid.hpp"

namespace volterra {

/// Discretized H-valued process: coefficient X_k(t_i) for every mode and grid point.
class HilbertPath {
public:
  HilbertPath(TimeGrid grid, std::size_t modes) : grid_(grid), modes_(modes), data_(modes * grid.size(), 0.0) {
    if (modes == 0) throw std::invalid_argument("HilbertPath: need at least one mode");
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t modes() const noexcept { return modes_; }
  std::size_t times() const noexcept { return grid_.size(); }

  double operator()(std::size_t k, std::size_t i) const noexcept { return data_[k * grid_.size() + i]; }
  double& operator()(std::size_t k, std::size_t i) noexcept { return data_[k * grid_.size() + i]; }

  std::span<const double> mode(std::size_t k) const noexcept { return {data_.data() + k * grid_.size(), grid_.size()}; }
  std::span<double> mode(std::size_t k) noexcept { return {data_.data() + k * grid_.size(), grid_.size()}; }

  HVector at(std::size_t i) const {
    HVector x(modes_);
    for (std::size_t k = 0; k < modes_; ++k) x[k] = (*this)(k, i);
    return x;
  }

  double norm_at(std::size_t i) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < modes_; ++k) s += (*this)(k, i) * (*this)(k, i);
    return std::sqrt(s);
  }

  bool finite() const noexcept {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void check_compatible(const HilbertPath& o) const {
    if (!(o.grid_ == grid_) || o.modes_ != modes_)
      throw std::invalid_argument("HilbertPath: grid or mode count mismatch");
  }

  HilbertPath& operator+=(const HilbertPath& o) {
    check_compatible(o);
    for (std::size_t j = 0; j < data_.size(); ++j) data_[j] += o.data_[j];
    return *this;
  }
  HilbertPath& operator-=(const HilbertPath& o) {
    check_compatible(o);
    for (std::size_t j = 0; j < data_.size(); ++j) data_[j] -= o.data_[j];
    return *this;
  }
  HilbertPath& operator*=(double a) noexcept {
    for (double& v : data_) v *= a;
    return *this;
  }
  friend HilbertPath operator+(HilbertPath a, const HilbertPath& b) { return a += b; }
  friend HilbertPath operator-(HilbertPath a, const HilbertPath& b) { return a -= b; }
  friend HilbertPath operator*(double s, HilbertPath a) { return a *= s; }

  /// Largest |X(t_i)|_H over the grid.
  double sup_norm() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < times(); ++i) m = std::max(m, norm_at(i));
    return m;
  }

  /// Every `factor`-th grid point, on the coarser grid.
  HilbertPath subsample(std::size_t factor) const {
    if (factor == 0 || grid_.steps() % factor != 0)
      throw std::invalid_argument("HilbertPath::subsample: factor must divide the step count");
    HilbertPath out(TimeGrid(grid_.horizon(), grid_.steps() / factor), modes_);
    for (std::size_t k = 0; k < modes_; ++k)
      for (std::size_t i = 0; i < out.times(); ++i) out(k, i) = (*this)(k, i * factor);
    return out;
  }

private:
  TimeGrid grid_;
  std::size_t modes_;
  std::vector<double> data_;
};

/// Diagonal covariance Q e_k = q_k e_k.
class QCovariance {
public:
  explicit QCovariance(std::vector<double> q) : q_(std::move(q)) {
    if (q_.empty()) throw std::invalid_argument("QCovariance: need at least one mode");
    for (double v : q_)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("QCovariance: q_k must be finite and >= 0");
  }

  /// q_k = scale * k^{-power}, k = 1..K.
  static QCovariance power_law(std::size_t modes, double power, double scale = 1.0) {
    std::vector<double> q(modes);
    for (std::size_t k = 0; k < modes; ++k) q[k] = scale * std::pow(static_cast<double>(k + 1), -power);
    return QCovariance(std::move(q));
  }

  std::size_t modes() const noexcept { return q_.size(); }
  double operator[](std::size_t k) const noexcept { return q_[k]; }
  std::span<const double> eigenvalues() const noexcept { return q_; }

  double trace() const noexcept {
    double s = 0.0;
    for (double v : q_) s += v;
    return s;
  }

private:
  std::vector<double> q_;
};

/// A sampled Q-Wiener path: increments dW_{j,k} over [t_j, t_{j+1}] and
/// cumulative values W_k(t_i).
class NoisePath {
public:
  /// Builds the cumulative path from increments (modes x steps, mode-major).
  NoisePath(TimeGrid grid, std::size_t modes, std::vector<double> increments, std::uint64_t seed = 0)
      : grid_(grid), seed_(seed), increments_(std::move(increments)), values_(grid, modes) {
    if (increments_.size() != modes * grid.steps())
      throw std::invalid_argument("NoisePath: increment count must be modes * steps");
    for (std::size_t k = 0; k < modes; ++k) {
      double acc = 0.0;
      values_(k, 0) = 0.0;
      for (std::size_t j = 0; j < grid.steps(); ++j) {
        acc += increments_[k * grid.steps() + j];
        values_(k, j + 1) = acc;
      }
    }
  }

  static NoisePath zero(TimeGrid grid, std::size_t modes) {
    return NoisePath(grid, modes, std::vector<double>(modes * grid.steps(), 0.0));
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t modes() const noexcept { return values_.modes(); }
  std::uint64_t seed() const noexcept { return seed_; }

  double increment(std::size_t k, std::size_t j) const noexcept { return increments_[k * grid_.steps() + j]; }
  std::span<const double> increments(std::size_t k) const noexcept {
    return {increments_.data() + k * grid_.steps(), grid_.steps()};
  }
  const HilbertPath& values() const noexcept { return values_; }
  double operator()(std::size_t k, std::size_t i) const noexcept { return values_(k, i); }

  /// Path on the grid with steps / factor points, increments summed in groups.
  NoisePath coarsen(std::size_t factor) const {
    if (factor == 0 || grid_.steps() % factor != 0)
      throw std::invalid_argument("NoisePath::coarsen: factor must divide the step count");
    const std::size_t steps = grid_.steps() / factor;
    std::vector<double> inc(modes() * steps, 0.0);
    for (std::size_t k = 0; k < modes(); ++k)
      for (std::size_t j = 0; j < steps; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < factor; ++r) s += increment(k, j * factor + r);
        inc[k * steps + j] = s;
      }
    return NoisePath(TimeGrid(grid_.horizon(), steps), modes(), std::move(inc), seed_);
  }

  friend NoisePath combine(double a, const NoisePath& x, double b, const NoisePath& y) {
    if (!(x.grid_ == y.grid_) || x.modes() != y.modes()) throw std::invalid_argument("NoisePath: shape mismatch");
    std::vector<double> inc(x.increments_.size());
    for (std::size_t j = 0; j < inc.size(); ++j) inc[j] = a * x.increments_[j] + b * y.increments_[j];
    return NoisePath(x.grid_, x.modes(), std::move(inc));
  }

private:
  TimeGrid grid_;
  std::uint64_t seed_;
  std::vector<double> increments_;
  HilbertPath values_;
};

namespace detail {

inline std::mt19937_64 mode_stream(std::uint64_t seed, std::size_t mode) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(mode), 0x5eedu};
  return std::mt19937_64(seq);
}

/// Standard Brownian motion on grid N = N0 * 2^L built from one stream.
inline std::vector<double> coupled_brownian(std::mt19937_64& rng, double horizon, std::size_t steps) {
  const auto levels = static_cast<std::size_t>(std::countr_zero(steps));
  const std::size_t base = steps >> levels;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(base + 1, 0.0);
  const double base_dt = horizon / static_cast<double>(base);
  for (std::size_t j = 0; j < base; ++j) w[j + 1] = w[j] + std::sqrt(base_dt) * normal(rng);
  double width = base_dt;
  for (std::size_t l = 0; l < levels; ++l) {
    std::vector<double> finer(2 * (w.size() - 1) + 1);
    const double sd = std::sqrt(width / 4.0);
    for (std::size_t j = 0; j + 1 < w.size(); ++j) {
      finer[2 * j] = w[j];
      finer[2 * j + 1] = 0.5 * (w[j] + w[j + 1]) + sd * normal(rng);
    }
    finer.back() = w.back();
    w = std::move(finer);
    width *= 0.5;
  }
  return w;
}

}  // namespace detail

/// Reproducible path: identical (q, grid, seed) gives identical increments.
inline NoisePath sample_path(const QCovariance& q, const TimeGrid& grid, std::uint64_t seed) {
  const std::size_t modes = q.modes();
  const std::size_t steps = grid.steps();
  std::vector<double> inc(modes * steps);
  for (std::size_t k = 0; k < modes; ++k) {
    auto rng = detail::mode_stream(seed, k);
    const auto w = detail::coupled_brownian(rng, grid.horizon(), steps);
    const double scale = std::sqrt(q[k]);
    for (std::size_t j = 0; j < steps; ++j) inc[k * steps + j] = scale * (w[j + 1] - w[j]);
  }
  return NoisePath(grid, modes, std::move(inc), seed);
}

/// Seed of ensemble member `member` derived from a base seed.
inline std::uint64_t ensemble_seed(std::uint64_t base, std::size_t member) {
  return base * 1000003ULL + static_cast<std::uint64_t>(member);
}

struct CovarianceRow {
  double t = 0.0;
  double estimate = 0.0;        // sample mean of |W(t)|_H^2
  double expected = 0.0;        // t Tr Q
  double standard_error = 0.0;
  double z = 0.0;
};

struct CovarianceReport {
  std::size_t ensemble_size = 0;
  double trace = 0.0;
  std::vector<CovarianceRow> rows;
  /// z-scores of the sample cross-covariances of W_j(T), W_k(T), j < k.
  std::vector<double> cross_z;
  double max_abs_cross_z = 0.0;
  std::size_t cross_outside_3se = 0;
};

/// Monte-Carlo estimate of E|W(t)|_H^2 = t Tr Q at five times, and
/// cross-covariances of modes at T.
inline CovarianceReport covariance_check(const QCovariance& q, const TimeGrid& grid, std::size_t ensemble_size,
                                         std::uint64_t seed) {
  if (ensemble_size < 100) throw std::invalid_argument("covariance_check: ensemble_size must be >= 100");
  const std::size_t modes = q.modes();
  std::vector<std::size_t> idx;
  for (std::size_t f = 0; f <= 4; ++f) idx.push_back(grid.steps() * f / 4);

  std::vector<std::vector<double>> sq(idx.size(), std::vector<double>(ensemble_size));
  std::vector<double> terminal(ensemble_size * modes);
  for (std::size_t e = 0; e < ensemble_size; ++e) {
    const auto path = sample_path(q, grid, ensemble_seed(seed, e));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double n = path.values().norm_at(idx[r]);
      sq[r][e] = n * n;
    }
    for (std::size_t k = 0; k < modes; ++k) terminal[e * modes + k] = path(k, grid.steps());
  }

  CovarianceReport rep;
  rep.ensemble_size = ensemble_size;
  rep.trace = q.trace();
  const double n = static_cast<double>(ensemble_size);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    CovarianceRow row;
    row.t = grid[idx[r]];
    row.expected = row.t * rep.trace;
    double mean = 0.0;
    for (double v : sq[r]) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : sq[r]) var += (v - mean) * (v - mean);
    var /= (n - 1.0);
    row.estimate = mean;
    row.standard_error = std::sqrt(var / n);
    row.z = row.standard_error > 0.0 ? (mean - row.expected) / row.standard_error : 0.0;
    rep.rows.push_back(row);
  }

  for (std::size_t j = 0; j < modes; ++j)
    for (std::size_t k = j + 1; k < modes; ++k) {
      double mj = 0.0, mk = 0.0;
      for (std::size_t e = 0; e < ensemble_size; ++e) {
        mj += terminal[e * modes + j];
        mk += terminal[e * modes + k];
      }
      mj /= n;
      mk /= n;
      std::vector<double> prod(ensemble_size);
      double cov = 0.0;
      for (std::size_t e = 0; e < ensemble_size; ++e) {
        prod[e] = (terminal[e * modes + j] - mj) * (terminal[e * modes + k] - mk);
        cov += prod[e];
      }
      cov /= n;
      double var = 0.0;
      for (double p : prod) var += (p - cov) * (p - cov);
      var /= (n - 1.0);
      const double se = std::sqrt(var / n);
      const double z = se > 0.0 ? cov / se : 0.0;
      rep.cross_z.push_back(z);
      rep.max_abs_cross_z = std::max(rep.max_abs_cross_z, std::abs(z));
      if (std::abs(z) > 3.0) ++rep.cross_outside_3se;
    }
  return rep;
}

}  // namespace volterra
