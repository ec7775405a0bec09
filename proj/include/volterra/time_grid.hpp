#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace volterra {

/// Uniform grid t_i = i * dt on [0, T], i = 0..N.
class TimeGrid {
public:
  TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw std::invalid_argument("TimeGrid: horizon must be positive and finite");
    if (steps == 0) throw std::invalid_argument("TimeGrid: step count must be positive");
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }

  // The last point is pinned to T so that t_N == T exactly.
  double operator[](std::size_t i) const noexcept {
    return i == steps_ ? horizon_ : static_cast<double>(i) * dt();
  }

  std::vector<double> points() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[i];
    return out;
  }

  /// Grid with `factor` times as many steps on the same horizon.
  TimeGrid refined(std::size_t factor = 2) const { return TimeGrid(horizon_, steps_ * factor); }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
    return a.horizon_ == b.horizon_ && a.steps_ == b.steps_;
  }

private:
  double horizon_;
  std::size_t steps_;
};

/// Real-valued function sampled on a TimeGrid.
class ScalarPath {
public:
  explicit ScalarPath(TimeGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

  ScalarPath(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("ScalarPath: value count does not match grid size");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("ScalarPath: non-finite value");
  }

  template <class F>
  static ScalarPath sample(TimeGrid grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid[i]);
    return ScalarPath(grid, std::move(v));
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Piecewise-linear interpolation; t is clamped to [0, T].
  double at(double t) const noexcept {
    const double dt = grid_.dt();
    if (t <= 0.0) return values_.front();
    if (t >= grid_.horizon()) return values_.back();
    auto j = static_cast<std::size_t>(t / dt);
    if (j >= grid_.steps()) j = grid_.steps() - 1;
    if (t == grid_[j]) return values_[j];
    if (t == grid_[j + 1]) return values_[j + 1];
    const double w = (t - grid_[j]) / dt;
    return (1.0 - w) * values_[j] + w * values_[j + 1];
  }

private:
  TimeGrid grid_;
  std::vector<double> values_;
};

}  // namespace volterra
