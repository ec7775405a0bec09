#pragma once

// Resolvent family S(t) of the pair (A, a), built mode by mode. On the
// eigenvector e_k the resolvent equation S(t)x = x + int a(t-s) A S(s)x ds
// reduces to the scalar equation
//
//   s_k(t) + lambda_k int_0^t a(t - s) s_k(s) ds = 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "volterra/kernel.hpp"
#include "volterra/spectral_operator.hpp"
#include "volterra/time_grid.hpp"

namespace volterra {

/// Kernels for which complete positivity is known in closed form.
inline bool known_completely_positive(const Kernel& k) noexcept {
  return k.kind() != KernelKind::Tabulated;
}

inline VolterraSolution scalar_resolvent_solution(const Kernel& kernel, double lambda, const TimeGrid& grid,
                                                  const VolterraOptions& opt = {}) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("scalar_resolvent: lambda must be >= 0");
  return solve_volterra(kernel, lambda, [](double) { return 1.0; }, grid, opt);
}

inline ScalarPath scalar_resolvent(const Kernel& kernel, double lambda, const TimeGrid& grid,
                                   const VolterraOptions& opt = {}) {
  return scalar_resolvent_solution(kernel, lambda, grid, opt).on_grid();
}

class ResolventFamily {
public:
  ResolventFamily(SpectralOperator op, Kernel kernel, TimeGrid grid, std::vector<VolterraSolution> rows)
      : op_(std::move(op)), kernel_(std::move(kernel)), grid_(grid), rows_(std::move(rows)),
        values_(op_.dimension() * grid.size()) {
    if (rows_.size() != op_.dimension()) throw std::invalid_argument("ResolventFamily: one row per mode required");
    for (std::size_t k = 0; k < rows_.size(); ++k)
      for (std::size_t i = 0; i < grid_.size(); ++i) values_[k * grid_.size() + i] = rows_[k].values[rows_[k].grid_index[i]];
    if (!known_completely_positive(kernel_))
      warnings_.push_back("kernel is not known to be completely positive; convergence results are not guaranteed");
  }

  const SpectralOperator& op() const noexcept { return op_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t modes() const noexcept { return op_.dimension(); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// s_k(t_i).
  double operator()(std::size_t k, std::size_t i) const noexcept { return values_[k * grid_.size() + i]; }
  std::span<const double> mode(std::size_t k) const noexcept { return {values_.data() + k * grid_.size(), grid_.size()}; }
  const VolterraSolution& solution(std::size_t k) const { return rows_.at(k); }

  /// S(t_i) x.
  HVector apply(std::size_t i, const HVector& x) const {
    op_.check_dimension(x);
    HVector y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = (*this)(k, i) * x[k];
    return y;
  }

  /// ||S(t_i)|| = max_k |s_k(t_i)|.
  double norm_at(std::size_t i) const noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < modes(); ++k) m = std::max(m, std::abs((*this)(k, i)));
    return m;
  }

  /// Copy with s_k(t_i) shifted by delta, for residual diagnostics.
  ResolventFamily with_perturbation(std::size_t k, std::size_t i, double delta) const {
    auto rows = rows_;
    rows.at(k).values.at(rows[k].grid_index.at(i)) += delta;
    return ResolventFamily(op_, kernel_, grid_, std::move(rows));
  }

private:
  SpectralOperator op_;
  Kernel kernel_;
  TimeGrid grid_;
  std::vector<VolterraSolution> rows_;
  std::vector<double> values_;
  std::vector<std::string> warnings_;
};

inline ResolventFamily build_resolvent_family(const SpectralOperator& op, const Kernel& kernel, const TimeGrid& grid,
                                              const VolterraOptions& opt = {}) {
  std::vector<VolterraSolution> rows;
  rows.reserve(op.dimension());
  for (double lambda : op.eigenvalues()) rows.push_back(scalar_resolvent_solution(kernel, lambda, grid, opt));
  return ResolventFamily(op, kernel, grid, std::move(rows));
}

/// max over modes and solver mesh points of |s_k - 1 + lambda_k Q[a, s_k]|.
inline double resolvent_residual(const ResolventFamily& fam) {
  double worst = 0.0;
  for (std::size_t k = 0; k < fam.modes(); ++k) {
    const auto& row = fam.solution(k);
    const double lambda = fam.op().eigenvalue(k);
    if (lambda == 0.0) continue;
    std::vector<double> ones(row.mesh.size(), 1.0);
    worst = std::max(worst, volterra_residual(fam.kernel(), lambda, ones, row.values, row.mesh).max_abs);
  }
  return worst;
}

struct YosidaRow {
  double n = 0.0;
  double sup_difference = 0.0;  // sup_{t, k} |S_n(t) e_k - S(t) e_k|_H
  double ratio = 0.0;           // previous sup_difference / this one (0 for the first row)
  double max_norm = 0.0;        // sup_t ||S_n(t)||
};

struct YosidaReport {
  std::vector<YosidaRow> rows;
  bool strictly_decreasing = true;
  double empirical_M = 0.0;
  double empirical_w0 = 0.0;
  std::vector<std::string> warnings;
};

inline YosidaReport yosida_resolvent_convergence(const SpectralOperator& op, const Kernel& kernel,
                                                 const TimeGrid& grid, std::span<const double> n_list,
                                                 const VolterraOptions& opt = {}) {
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    if (!(n_list[j] > 0.0)) throw std::invalid_argument("yosida_resolvent_convergence: n must be positive");
    if (j > 0 && !(n_list[j] > n_list[j - 1]))
      throw std::invalid_argument("yosida_resolvent_convergence: n_list must be increasing");
  }
  YosidaReport rep;
  const auto exact = build_resolvent_family(op, kernel, grid, opt);
  rep.warnings = exact.warnings();
  for (double n : n_list) {
    const auto approx = build_resolvent_family(yosida(op, n), kernel, grid, opt);
    YosidaRow row;
    row.n = n;
    for (std::size_t k = 0; k < op.dimension(); ++k)
      for (std::size_t i = 0; i < grid.size(); ++i)
        row.sup_difference = std::max(row.sup_difference, std::abs(approx(k, i) - exact(k, i)));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double nrm = approx.norm_at(i);
      row.max_norm = std::max(row.max_norm, nrm);
      if (i > 0 && nrm > 1.0) rep.empirical_w0 = std::max(rep.empirical_w0, std::log(nrm) / grid[i]);
    }
    rep.empirical_M = std::max(rep.empirical_M, row.max_norm);
    if (!rep.rows.empty()) {
      const double prev = rep.rows.back().sup_difference;
      row.ratio = row.sup_difference > 0.0 ? prev / row.sup_difference : 0.0;
      if (!(row.sup_difference < prev)) rep.strictly_decreasing = false;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace volterra
