#pragma once

// Scalar memory kernels a(t), product quadrature against piecewise-linear
// functions, and a second-kind linear Volterra solver
//
//   u(t) + mu * int_0^t a(t - tau) u(tau) dtau = f(t).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "volterra/time_grid.hpp"

namespace volterra {

enum class KernelKind { Exponential, Constant, Fractional, Tabulated };

inline std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Exponential: return "exponential";
    case KernelKind::Constant: return "constant";
    case KernelKind::Fractional: return "fractional";
    case KernelKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

/// Description of a kernel as read from configuration.
struct KernelSpec {
  KernelKind kind = KernelKind::Exponential;
  double alpha = 1.0;    // Fractional order, in (0, 1]
  double epsilon = 0.0;  // Fractional time offset, >= 0
  double table_step = 0.0;
  std::vector<double> table_values;  // a(j * table_step), j = 0..M
};

/// Which function of the kernel a quadrature integrates against.
enum class KernelTerm { Value, Derivative };

class Kernel {
public:
  explicit Kernel(KernelSpec spec) : spec_(std::move(spec)) {
    switch (spec_.kind) {
      case KernelKind::Exponential:
      case KernelKind::Constant:
        break;
      case KernelKind::Fractional:
        if (!(spec_.alpha > 0.0 && spec_.alpha <= 1.0))
          throw std::invalid_argument("fractional kernel: alpha must lie in (0, 1]");
        if (!(spec_.epsilon >= 0.0) || !std::isfinite(spec_.epsilon))
          throw std::invalid_argument("fractional kernel: epsilon must be >= 0");
        gamma_alpha_ = std::tgamma(spec_.alpha);
        break;
      case KernelKind::Tabulated:
        if (!(spec_.table_step > 0.0))
          throw std::invalid_argument("tabulated kernel: table step must be positive");
        if (spec_.table_values.size() < 3)
          throw std::invalid_argument("tabulated kernel: need at least 3 table values");
        for (double v : spec_.table_values)
          if (!std::isfinite(v)) throw std::invalid_argument("tabulated kernel: non-finite value");
        build_table_derivative();
        break;
    }
  }

  KernelKind kind() const noexcept { return spec_.kind; }
  const KernelSpec& spec() const noexcept { return spec_; }
  double alpha() const noexcept { return spec_.alpha; }
  double epsilon() const noexcept { return spec_.epsilon; }

  /// c = a(0) when finite. Empty for the weakly singular fractional kernel.
  std::optional<double> origin_value() const noexcept {
    if (spec_.kind == KernelKind::Fractional && spec_.alpha < 1.0 && spec_.epsilon == 0.0)
      return std::nullopt;
    return value_unchecked(0.0);
  }

  /// Upper end of the interval on which the kernel is defined.
  double support_end() const noexcept {
    if (spec_.kind == KernelKind::Tabulated)
      return spec_.table_step * static_cast<double>(spec_.table_values.size() - 1);
    return std::numeric_limits<double>::infinity();
  }

  bool covers(double horizon) const noexcept {
    return support_end() >= horizon * (1.0 - 1e-12);
  }

  /// True when quadratures use exact panel integrals instead of the trapezoid.
  bool uses_product_weights() const noexcept { return spec_.kind == KernelKind::Fractional; }

  double value(double t) const {
    check_argument(t);
    if (t == 0.0 && !origin_value())
      throw std::domain_error("kernel value a(0) is undefined (fractional kernel with epsilon = 0)");
    return value_unchecked(t);
  }

  double derivative(double t) const {
    check_argument(t);
    if (t == 0.0 && !origin_value())
      throw std::domain_error("kernel derivative is undefined at t = 0 (fractional kernel with epsilon = 0)");
    switch (spec_.kind) {
      case KernelKind::Exponential: return -std::exp(-t);
      case KernelKind::Constant: return 0.0;
      case KernelKind::Fractional:
        if (spec_.alpha == 1.0) return 0.0;
        return (spec_.alpha - 1.0) * std::pow(t + spec_.epsilon, spec_.alpha - 2.0) / gamma_alpha_;
      case KernelKind::Tabulated: return interpolate(table_derivative_, t);
    }
    return 0.0;
  }

  /// int_0^x a(y) dy.
  double integral(double x) const {
    check_argument(x);
    switch (spec_.kind) {
      case KernelKind::Exponential: return -std::expm1(-x);
      case KernelKind::Constant: return x;
      case KernelKind::Fractional:
        return power_moment0(spec_.epsilon, x, spec_.alpha) / gamma_alpha_;
      case KernelKind::Tabulated: {
        const double h = spec_.table_step;
        const auto& v = spec_.table_values;
        double acc = 0.0;
        std::size_t j = 0;
        for (; j + 1 < v.size() && h * static_cast<double>(j + 1) <= x; ++j) acc += 0.5 * h * (v[j] + v[j + 1]);
        const double rest = x - h * static_cast<double>(j);
        if (rest > 0.0 && j + 1 < v.size()) {
          const double end = v[j] + (v[j + 1] - v[j]) * rest / h;
          acc += 0.5 * rest * (v[j] + end);
        }
        return acc;
      }
    }
    return 0.0;
  }

  /// Weights (far, near) of the panel [lo, hi] in lag space:
  ///   int_lo^hi g(x) u(x) dx  ~=  far * u(hi) + near * u(lo)
  /// for u linear on the panel, with g = a or g = a'.
  std::pair<double, double> panel_weights(KernelTerm term, double lo, double hi) const {
    const double width = hi - lo;
    if (!uses_product_weights()) {
      if (term == KernelTerm::Value) return {0.5 * width * value(hi), 0.5 * width * value(lo)};
      return {0.5 * width * derivative(hi), 0.5 * width * derivative(lo)};
    }
    const double alpha = spec_.alpha;
    const double base = lo + spec_.epsilon;
    if (term == KernelTerm::Value) {
      const double m0 = power_moment0(base, width, alpha);
      const double m1 = power_moment1(base, width, alpha);
      return {m1 / width / gamma_alpha_, (m0 - m1 / width) / gamma_alpha_};
    }
    if (alpha == 1.0) return {0.0, 0.0};
    if (base == 0.0)
      throw std::domain_error("kernel derivative is not integrable at 0 (fractional kernel with epsilon = 0)");
    const double coef = (alpha - 1.0) / gamma_alpha_;
    const double m0 = power_moment0(base, width, alpha - 1.0);
    const double m1 = power_moment1(base, width, alpha - 1.0);
    return {coef * m1 / width, coef * (m0 - m1 / width)};
  }

private:
  void check_argument(double t) const {
    if (!(t >= 0.0)) throw std::domain_error("kernel argument must be >= 0");
    if (t > support_end() * (1.0 + 1e-12))
      throw std::domain_error("kernel argument beyond the tabulated range");
  }

  double value_unchecked(double t) const {
    switch (spec_.kind) {
      case KernelKind::Exponential: return std::exp(-t);
      case KernelKind::Constant: return 1.0;
      case KernelKind::Fractional:
        if (spec_.alpha == 1.0) return 1.0;
        return std::pow(t + spec_.epsilon, spec_.alpha - 1.0) / gamma_alpha_;
      case KernelKind::Tabulated: return interpolate(spec_.table_values, t);
    }
    return 0.0;
  }

  double interpolate(const std::vector<double>& table, double t) const {
    const double h = spec_.table_step;
    const double pos = t / h;
    auto j = static_cast<std::size_t>(pos);
    if (j >= table.size() - 1) return table.back();
    const double w = pos - static_cast<double>(j);
    return (1.0 - w) * table[j] + w * table[j + 1];
  }

  // Centered differences inside, second-order one-sided at the ends.
  void build_table_derivative() {
    const auto& v = spec_.table_values;
    const double h = spec_.table_step;
    const std::size_t n = v.size();
    table_derivative_.resize(n);
    for (std::size_t j = 1; j + 1 < n; ++j) table_derivative_[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
    table_derivative_[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    table_derivative_[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  }

  // int_b^{b+w} y^{p-1} dy for p != 0; b = 0 requires p > 0.
  static double power_moment0(double b, double w, double p) {
    if (b == 0.0) return std::pow(w, p) / p;
    return std::pow(b, p) * std::expm1(p * std::log1p(w / b)) / p;
  }

  // int_b^{b+w} y^{p-1} (y - b) dy, p > -1.
  static double power_moment1(double b, double w, double p) {
    if (b == 0.0) return std::pow(w, p + 1.0) / (p + 1.0);
    const double r = w / b;
    if (r < 0.1) {
      // b^{p+1} * sum_n binom(p-1, n) r^{n+2} / (n+2)
      double coef = 1.0;
      double rp = r * r;
      double acc = 0.0;
      for (int n = 0; n < 40; ++n) {
        const double term = coef * rp / (n + 2);
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc)) break;
        coef *= (p - 1.0 - n) / (n + 1.0);
        rp *= r;
      }
      return std::pow(b, p + 1.0) * acc;
    }
    const double lg = std::log1p(r);
    return std::pow(b, p + 1.0) * std::expm1((p + 1.0) * lg) / (p + 1.0) -
           b * power_moment0(b, w, p);
  }

  KernelSpec spec_;
  double gamma_alpha_ = 1.0;
  std::vector<double> table_derivative_;
};

inline Kernel make_kernel(const KernelSpec& spec) { return Kernel(spec); }

inline Kernel exponential_kernel() { return Kernel(KernelSpec{KernelKind::Exponential, 1.0, 0.0, 0.0, {}}); }
inline Kernel constant_kernel() { return Kernel(KernelSpec{KernelKind::Constant, 1.0, 0.0, 0.0, {}}); }
inline Kernel fractional_kernel(double alpha, double epsilon = 0.0) {
  return Kernel(KernelSpec{KernelKind::Fractional, alpha, epsilon, 0.0, {}});
}
inline Kernel tabulated_kernel(double step, std::vector<double> values) {
  return Kernel(KernelSpec{KernelKind::Tabulated, 1.0, 0.0, step, std::move(values)});
}

inline double eval_kernel(const Kernel& k, double t) { return k.value(t); }
inline double eval_kernel_derivative(const Kernel& k, double t) { return k.derivative(t); }

// ---------------------------------------------------------------------------
// Product quadrature on a uniform grid.

namespace detail {

// Neumaier summation: history sums over thousands of panels stay at
// machine-precision residual.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

/// Q[g, u](t_i) = int_0^{t_i} g(t_i - s) u(s) ds for u piecewise linear on a
/// uniform grid, with g = a or a'. Weights depend only on the lag.
class ProductQuadrature {
public:
  ProductQuadrature(const Kernel& kernel, KernelTerm term, double step, std::size_t steps)
      : step_(step), far_(steps), near_(steps) {
    for (std::size_t m = 0; m < steps; ++m) {
      const double lo = step * static_cast<double>(m);
      auto [f, n] = kernel.panel_weights(term, lo, lo + step);
      far_[m] = f;
      near_[m] = n;
    }
  }

  ProductQuadrature(const Kernel& kernel, KernelTerm term, const TimeGrid& grid)
      : ProductQuadrature(kernel, term, grid.dt(), grid.steps()) {}

  std::size_t steps() const noexcept { return far_.size(); }
  double step() const noexcept { return step_; }

  /// Weight multiplying u(t_i) in Q(t_i).
  double diagonal() const noexcept { return near_.empty() ? 0.0 : near_[0]; }

  /// Weight of u(t_{i-d}) in Q(t_i), 0 <= d <= i.
  double weight(std::size_t i, std::size_t d) const noexcept {
    if (i == 0) return 0.0;
    if (d == 0) return near_[0];
    if (d == i) return far_[i - 1];
    return far_[d - 1] + near_[d];
  }

  /// Q(t_i) over u_0..u_i, optionally leaving out the u_i term.
  double apply(std::span<const double> u, std::size_t i, bool include_diagonal = true) const {
    if (i == 0) return 0.0;
    detail::CompensatedSum acc;
    acc.add(far_[i - 1] * u[0]);
    for (std::size_t l = 1; l < i; ++l) {
      acc.add(far_[i - 1 - l] * u[l]);
      acc.add(near_[i - l] * u[l]);
    }
    if (include_diagonal) acc.add(near_[0] * u[i]);
    return acc.value();
  }

  std::vector<double> apply_all(std::span<const double> u) const {
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t i = 1; i < u.size(); ++i) out[i] = apply(u, i);
    return out;
  }

private:
  double step_;
  std::vector<double> far_;
  std::vector<double> near_;
};

/// Q[g, u](mesh[i]) on an arbitrary increasing mesh starting at 0.
inline double mesh_quadrature(const Kernel& kernel, KernelTerm term, std::span<const double> mesh,
                              std::span<const double> u, std::size_t i, bool include_diagonal = true) {
  detail::CompensatedSum acc;
  for (std::size_t j = 0; j < i; ++j) {
    const double lo = mesh[i] - mesh[j + 1];
    const double hi = mesh[i] - mesh[j];
    auto [far, near] = kernel.panel_weights(term, lo, hi);
    acc.add(far * u[j]);
    if (j + 1 < i || include_diagonal) acc.add(near * u[j + 1]);
  }
  return acc.value();
}

// ---------------------------------------------------------------------------
// Second-kind Volterra solver.

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

struct VolterraOptions {
  /// Insert a geometrically graded layer near t = 0 when the relaxation time
  /// of the equation is shorter than the grid step.
  bool graded = true;
  /// First graded step is first_step * t* / N for relaxation time t*.
  double first_step = 20.0;
  /// Consecutive graded steps grow by the factor 1 + growth / N.
  double growth = 10.0;
};

/// Discrete solution on the mesh that was actually integrated. Grid points of
/// the requested TimeGrid are a subset of the mesh.
struct VolterraSolution {
  TimeGrid grid;
  std::vector<double> mesh;
  std::vector<double> values;
  std::vector<std::size_t> grid_index;  // mesh position of each grid point

  bool uniform() const noexcept { return mesh.size() == grid.size(); }

  ScalarPath on_grid() const {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values[grid_index[i]];
    return ScalarPath(grid, std::move(v));
  }
};

/// Time t* solving mu * int_0^{t*} a = 1, or +inf when no such t* <= horizon.
inline double relaxation_time(const Kernel& kernel, double mu, double horizon) {
  if (!(mu > 0.0)) return std::numeric_limits<double>::infinity();
  if (mu * kernel.integral(horizon) <= 1.0) return std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = horizon;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * horizon; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mu * kernel.integral(mid) < 1.0 ? lo : hi) = mid;
  }
  return hi;
}

/// Grid points merged with a geometric layer h0, h0*g, h0*g^2, ... that runs
/// until the graded step reaches the grid step.
inline std::vector<double> graded_mesh(const TimeGrid& grid, double relax, const VolterraOptions& opt,
                                       std::vector<std::size_t>* grid_index = nullptr) {
  const double dt = grid.dt();
  std::vector<double> mesh;
  if (grid_index) grid_index->assign(grid.size(), 0);
  // Both the first step and the growth shrink with 1/N, so the layer refines
  // together with the grid and the scheme stays second order.
  const double n = static_cast<double>(grid.steps());
  double h = opt.first_step * relax / n;
  const double growth = 1.0 + opt.growth / n;
  if (!opt.graded || !(h < dt) || !std::isfinite(h)) {
    mesh = grid.points();
    if (grid_index)
      for (std::size_t i = 0; i < grid.size(); ++i) (*grid_index)[i] = i;
    return mesh;
  }
  mesh.push_back(0.0);
  double tau = 0.0;
  std::size_t next = 1;
  while (next < grid.size()) {
    const double target = grid[next];
    if (h < dt && tau + h < target - 0.3 * h) {
      tau += h;
      mesh.push_back(tau);
      h *= growth;
      continue;
    }
    tau = target;
    if (grid_index) (*grid_index)[next] = mesh.size();
    mesh.push_back(target);
    ++next;
  }
  return mesh;
}

/// Lag-indexed quadrature when the mesh is uniform, otherwise empty.
inline std::optional<ProductQuadrature> uniform_quadrature(const Kernel& kernel, std::span<const double> mesh) {
  const std::size_t n = mesh.size();
  if (n < 2) return std::nullopt;
  const double h = mesh[1] - mesh[0];
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((mesh[i] - mesh[i - 1]) - h) > 1e-12 * h) return std::nullopt;
  return ProductQuadrature(kernel, KernelTerm::Value, h, n - 1);
}

/// Solve on a given mesh with right-hand side values f on that mesh.
inline std::vector<double> solve_volterra_on_mesh(const Kernel& kernel, double mu, std::span<const double> f,
                                                  std::span<const double> mesh) {
  const std::size_t n = mesh.size();
  std::vector<double> u(n, 0.0);
  if (n == 0) return u;
  u[0] = f[0];
  if (mu == 0.0) {
    std::copy(f.begin(), f.end(), u.begin());
    return u;
  }
  const auto quad = uniform_quadrature(kernel, mesh);

  for (std::size_t i = 1; i < n; ++i) {
    double diag = 0.0;
    double history = 0.0;
    if (quad) {
      diag = quad->diagonal();
      history = quad->apply(u, i, false);
    } else {
      diag = kernel.panel_weights(KernelTerm::Value, 0.0, mesh[i] - mesh[i - 1]).second;
      history = mesh_quadrature(kernel, KernelTerm::Value, mesh, u, i, false);
    }
    const double pivot = 1.0 + mu * diag;
    if (pivot == 0.0 || !std::isfinite(pivot)) throw SolverError("singular Volterra step", i);
    u[i] = (f[i] - mu * history) / pivot;
    if (!std::isfinite(u[i])) throw SolverError("non-finite Volterra solution", i);
  }
  return u;
}

template <class F>
VolterraSolution solve_volterra(const Kernel& kernel, double mu, F&& f, const TimeGrid& grid,
                                const VolterraOptions& opt = {}) {
  if (!kernel.covers(grid.horizon()))
    throw std::invalid_argument("kernel table does not cover the time horizon");
  VolterraSolution sol{grid, {}, {}, {}};
  const double relax = relaxation_time(kernel, std::abs(mu), grid.horizon());
  sol.mesh = graded_mesh(grid, relax, opt, &sol.grid_index);
  std::vector<double> rhs(sol.mesh.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = f(sol.mesh[i]);
  sol.values = solve_volterra_on_mesh(kernel, mu, rhs, sol.mesh);
  return sol;
}

/// u + mu * (a * u) = f with f given as a callable of time.
template <class F>
ScalarPath solve_linear_volterra(const Kernel& kernel, double mu, F&& f, const TimeGrid& grid,
                                 const VolterraOptions& opt = {}) {
  return solve_volterra(kernel, mu, std::forward<F>(f), grid, opt).on_grid();
}

/// u + mu * (a * u) = f with f sampled on a grid (linearly interpolated
/// inside a graded layer).
inline ScalarPath solve_linear_volterra(const Kernel& kernel, double mu, const ScalarPath& f,
                                        const VolterraOptions& opt = {}) {
  return solve_volterra(kernel, mu, [&f](double t) { return f.at(t); }, f.grid(), opt).on_grid();
}

/// max_i |u_i + mu Q[a,u](t_i) - f_i| over the solution mesh with the
/// quadrature the solver used, and the largest magnitude of the terms involved.
struct Residual {
  double max_abs = 0.0;
  double scale = 0.0;
};

inline Residual volterra_residual(const Kernel& kernel, double mu, std::span<const double> f,
                                  std::span<const double> u, std::span<const double> mesh) {
  Residual r;
  const auto quad = uniform_quadrature(kernel, mesh);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double q = mu * (quad ? quad->apply(u, i) : mesh_quadrature(kernel, KernelTerm::Value, mesh, u, i));
    r.max_abs = std::max(r.max_abs, std::abs(u[i] + q - f[i]));
    r.scale = std::max({r.scale, std::abs(u[i]), std::abs(q), std::abs(f[i])});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Complete positivity.

struct PositivityEntry {
  double mu = 0.0;
  std::size_t steps = 0;
  double min_s = 0.0;
  double min_r = 0.0;
  double max_abs_s = 0.0;
  double max_abs_r = 0.0;
  bool s_nonnegative = true;
  bool r_nonnegative = true;
};

struct PositivityReport {
  std::vector<PositivityEntry> entries;
  bool all_nonnegative() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const PositivityEntry& e) { return e.s_nonnegative && e.r_nonnegative; });
  }
};

/// Negative values above -tol * max(1, max|s|) count as nonnegative.
inline constexpr double kPositivityTolerance = 1e-10;

/// Solves the s-equation (f = 1) and r-equation (f = a) for every mu on the
/// working grid and on one refinement of it.
inline PositivityReport check_complete_positivity(const Kernel& kernel, std::span<const double> mus,
                                                  const TimeGrid& grid, const VolterraOptions& opt = {}) {
  if (!kernel.origin_value())
    throw std::invalid_argument("complete positivity check needs a finite a(0) for the r-equation");
  for (double mu : mus)
    if (!(mu >= 0.0)) throw std::invalid_argument("complete positivity: mu must be >= 0");
  PositivityReport report;
  for (const TimeGrid& g : {grid, grid.refined(2)}) {
    for (double mu : mus) {
      PositivityEntry e;
      e.mu = mu;
      e.steps = g.steps();
      const auto s = solve_volterra(kernel, mu, [](double) { return 1.0; }, g, opt);
      const auto r = solve_volterra(kernel, mu, [&kernel](double t) { return kernel.value(t); }, g, opt);
      e.min_s = *std::min_element(s.values.begin(), s.values.end());
      e.min_r = *std::min_element(r.values.begin(), r.values.end());
      for (double v : s.values) e.max_abs_s = std::max(e.max_abs_s, std::abs(v));
      for (double v : r.values) e.max_abs_r = std::max(e.max_abs_r, std::abs(v));
      e.s_nonnegative = e.min_s >= -kPositivityTolerance * std::max(1.0, e.max_abs_s);
      e.r_nonnegative = e.min_r >= -kPositivityTolerance * std::max(1.0, e.max_abs_r);
      report.entries.push_back(e);
    }
  }
  return report;
}

}  // namespace volterra
