#pragma once

// Diagonal sectorial operator A e_k = -lambda_k e_k on a K-mode truncation,
// with its semigroup, resolvent, Yosida approximations and fractional powers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "volterra/time_grid.hpp"

namespace volterra {

/// Coefficients of an element of H in the eigenbasis e_1..e_K.
class HVector {
public:
  HVector() = default;
  explicit HVector(std::size_t dim) : x_(dim, 0.0) {}
  explicit HVector(std::vector<double> coeffs) : x_(std::move(coeffs)) {
    for (double v : x_)
      if (!std::isfinite(v)) throw std::invalid_argument("HVector: non-finite coefficient");
  }

  static HVector basis(std::size_t dim, std::size_t k) {
    if (k >= dim) throw std::out_of_range("HVector::basis: index out of range");
    HVector e(dim);
    e.x_[k] = 1.0;
    return e;
  }

  std::size_t size() const noexcept { return x_.size(); }
  double operator[](std::size_t k) const noexcept { return x_[k]; }
  double& operator[](std::size_t k) noexcept { return x_[k]; }
  std::span<const double> coefficients() const noexcept { return x_; }

  double norm() const noexcept {
    double s = 0.0;
    for (double v : x_) s += v * v;
    return std::sqrt(s);
  }

  HVector& operator+=(const HVector& o) {
    check_same(o);
    for (std::size_t k = 0; k < x_.size(); ++k) x_[k] += o.x_[k];
    return *this;
  }
  HVector& operator-=(const HVector& o) {
    check_same(o);
    for (std::size_t k = 0; k < x_.size(); ++k) x_[k] -= o.x_[k];
    return *this;
  }
  HVector& operator*=(double a) noexcept {
    for (double& v : x_) v *= a;
    return *this;
  }
  friend HVector operator+(HVector a, const HVector& b) { return a += b; }
  friend HVector operator-(HVector a, const HVector& b) { return a -= b; }
  friend HVector operator*(double s, HVector a) { return a *= s; }
  friend bool operator==(const HVector&, const HVector&) = default;

private:
  void check_same(const HVector& o) const {
    if (o.size() != size()) throw std::invalid_argument("HVector: dimension mismatch");
  }
  std::vector<double> x_;
};

class SpectralOperator {
public:
  /// eigenvalues are the positive numbers lambda_k with A e_k = -lambda_k e_k.
  explicit SpectralOperator(std::vector<double> eigenvalues, std::string label = "custom")
      : lambda_(std::move(eigenvalues)), label_(std::move(label)) {
    if (lambda_.empty()) throw std::invalid_argument("SpectralOperator: need at least one mode");
    for (double l : lambda_)
      if (!(l > 0.0) || !std::isfinite(l))
        throw std::invalid_argument("SpectralOperator: eigenvalues must be positive and finite");
    if (!std::is_sorted(lambda_.begin(), lambda_.end()))
      throw std::invalid_argument("SpectralOperator: eigenvalues must be nondecreasing");
  }

  std::size_t dimension() const noexcept { return lambda_.size(); }
  std::span<const double> eigenvalues() const noexcept { return lambda_; }
  double eigenvalue(std::size_t k) const { return lambda_.at(k); }
  double smallest() const noexcept { return lambda_.front(); }
  double largest() const noexcept { return lambda_.back(); }
  const std::string& label() const noexcept { return label_; }

  /// Set for Yosida approximations A_n, which are bounded.
  bool bounded() const noexcept { return yosida_index_.has_value(); }
  std::optional<double> yosida_index() const noexcept { return yosida_index_; }

  void check_dimension(const HVector& x) const {
    if (x.size() != dimension()) throw std::invalid_argument("operator/vector dimension mismatch");
  }

  HVector apply(const HVector& x) const {
    check_dimension(x);
    HVector y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = -lambda_[k] * x[k];
    return y;
  }

  /// ||A||, finite only in the truncation.
  double norm() const noexcept { return largest(); }

private:
  friend SpectralOperator yosida(const SpectralOperator&, double);
  std::vector<double> lambda_;
  std::string label_;
  std::optional<double> yosida_index_;
};

/// lambda_k = k^2 pi^2, the Dirichlet Laplacian on (0, 1).
inline SpectralOperator make_laplacian_1d(std::size_t modes) {
  if (modes < 1) throw std::invalid_argument("make_laplacian_1d: need K >= 1");
  std::vector<double> l(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    const double kk = static_cast<double>(k + 1) * std::numbers::pi;
    l[k] = kk * kk;
  }
  return SpectralOperator(std::move(l), "laplacian-1d");
}

inline HVector apply_A(const SpectralOperator& op, const HVector& x) { return op.apply(x); }

/// T(t)x, coefficients x_k exp(-lambda_k t).
inline HVector semigroup_apply(const SpectralOperator& op, double t, const HVector& x) {
  if (!(t >= 0.0)) throw std::domain_error("semigroup_apply: t must be >= 0");
  op.check_dimension(x);
  HVector y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = std::exp(-op.eigenvalue(k) * t) * x[k];
  return y;
}

/// Eigenvalue of the Yosida approximation: n lambda / (n + lambda).
inline double yosida_eigenvalue(double lambda, double n) { return n * lambda / (n + lambda); }

/// A_n = n A R(n, A) = n^2 R(n, A) - n I.
inline SpectralOperator yosida(const SpectralOperator& op, double n) {
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("yosida: n must be positive");
  std::vector<double> l(op.dimension());
  for (std::size_t k = 0; k < l.size(); ++k) l[k] = yosida_eigenvalue(op.eigenvalue(k), n);
  SpectralOperator out(std::move(l), op.label() + "/yosida");
  out.yosida_index_ = n;
  return out;
}

/// A diagonal bounded map x_k -> m_k x_k.
struct DiagonalMap {
  std::vector<double> multipliers;

  HVector apply(const HVector& x) const {
    if (x.size() != multipliers.size()) throw std::invalid_argument("DiagonalMap: dimension mismatch");
    HVector y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = multipliers[k] * x[k];
    return y;
  }
  double norm() const noexcept {
    double m = 0.0;
    for (double v : multipliers) m = std::max(m, std::abs(v));
    return m;
  }
};

/// R(lambda, A) = (lambda I - A)^{-1}, acting as x_k / (lambda + lambda_k).
inline DiagonalMap resolvent_of_A(const SpectralOperator& op, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("resolvent_of_A: only lambda > 0 is sampled");
  DiagonalMap r;
  r.multipliers.resize(op.dimension());
  for (std::size_t k = 0; k < op.dimension(); ++k) r.multipliers[k] = 1.0 / (lambda + op.eigenvalue(k));
  return r;
}

/// (-A)^gamma x, coefficients lambda_k^gamma x_k. gamma = 0 is accepted as
/// the identity so that limits in gamma can be taken.
inline HVector fractional_power_apply(const SpectralOperator& op, double gamma, const HVector& x) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::domain_error("fractional_power_apply: gamma must lie in (0, 1)");
  op.check_dimension(x);
  HVector y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = std::pow(op.eigenvalue(k), gamma) * x[k];
  return y;
}

/// Grid suprema of t^{j+gamma} ||(-A)^gamma A^j T(t)|| for j = 0, 1 and of
/// t ||A T(t)||, next to their analytic suprema over t > 0.
struct SemigroupBounds {
  double gamma = 0.0;
  double grid_sup_AT = 0.0;         // sup t ||A T(t)||
  double analytic_sup_AT = 0.0;     // 1/e
  double grid_sup_frac = 0.0;       // sup t^gamma ||(-A)^gamma T(t)||
  double analytic_sup_frac = 0.0;   // (gamma/e)^gamma
  double grid_sup_frac_A = 0.0;     // sup t^{1+gamma} ||(-A)^gamma A T(t)||
  double analytic_sup_frac_A = 0.0; // ((1+gamma)/e)^{1+gamma}

  bool within(double tol) const noexcept {
    return grid_sup_AT <= analytic_sup_AT + tol && grid_sup_frac <= analytic_sup_frac + tol &&
           grid_sup_frac_A <= analytic_sup_frac_A + tol;
  }
};

inline SemigroupBounds semigroup_norm_bounds(const SpectralOperator& op, const TimeGrid& grid, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("semigroup_norm_bounds: gamma must lie in (0, 1)");
  SemigroupBounds b;
  b.gamma = gamma;
  b.analytic_sup_AT = std::exp(-1.0);
  b.analytic_sup_frac = std::pow(gamma / std::numbers::e, gamma);
  b.analytic_sup_frac_A = std::pow((1.0 + gamma) / std::numbers::e, 1.0 + gamma);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t = grid[i];
    double at = 0.0, frac = 0.0, frac_a = 0.0;
    for (double l : op.eigenvalues()) {
      const double x = l * t;
      const double decay = std::exp(-x);
      at = std::max(at, x * decay);
      frac = std::max(frac, std::pow(x, gamma) * decay);
      frac_a = std::max(frac_a, std::pow(x, 1.0 + gamma) * decay);
    }
    b.grid_sup_AT = std::max(b.grid_sup_AT, at);
    b.grid_sup_frac = std::max(b.grid_sup_frac, frac);
    b.grid_sup_frac_A = std::max(b.grid_sup_frac_A, frac_a);
  }
  return b;
}

}  // namespace volterra
