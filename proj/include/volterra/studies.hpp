#pragma once

// Refinement and Monte-Carlo studies shared by the CLI experiments and the
// acceptance suite. Every study runs on coupled noise: all levels of one
// seed see the same Brownian path.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "volterra/convolution.hpp"
#include "volterra/regularity.hpp"
#include "volterra/resolvent.hpp"
#include "volterra/wiener.hpp"

namespace volterra {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Step counts ordered coarse to fine, each level doubling the previous one
/// so that the coupled sampler produces nested paths.
inline void check_levels(const std::vector<std::size_t>& steps) {
  if (steps.empty()) throw std::invalid_argument("refinement study: need at least one level");
  for (std::size_t j = 1; j < steps.size(); ++j)
    if (steps[j] != 2 * steps[j - 1]) throw std::invalid_argument("refinement study: each level must double the step count");
}

/// table[seed][level]
using SeedLevelTable = std::vector<std::vector<double>>;

inline std::size_t count_strictly_decreasing(const SeedLevelTable& t) {
  std::size_t n = 0;
  for (const auto& row : t) {
    bool ok = true;
    for (std::size_t j = 1; j < row.size(); ++j) ok = ok && row[j] < row[j - 1];
    n += ok ? 1 : 0;
  }
  return n;
}

inline std::vector<double> level_medians(const SeedLevelTable& t) {
  if (t.empty()) return {};
  std::vector<double> out(t.front().size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    std::vector<double> col;
    for (const auto& row : t) col.push_back(row[j]);
    out[j] = median(col);
  }
  return out;
}

struct StudySetup {
  SpectralOperator op;
  Kernel kernel;
  QCovariance q;
  double horizon = 1.0;
  std::vector<std::size_t> steps;  // coarse to fine
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  VolterraOptions solver{};
};

inline std::vector<ResolventFamily> build_level_families(const SpectralOperator& op, const StudySetup& s) {
  std::vector<ResolventFamily> fams;
  for (std::size_t n : s.steps) fams.push_back(build_resolvent_family(op, s.kernel, TimeGrid(s.horizon, n), s.solver));
  return fams;
}

/// sup_t |W^S_direct - W^S_reformulated|_H per seed and level.
inline SeedLevelTable cross_method_study(const StudySetup& s, ForcingRule rule = ForcingRule::LeftPoint) {
  check_levels(s.steps);
  const auto fams = build_level_families(s.op, s);
  SeedLevelTable table;
  for (std::size_t e = 0; e < s.seeds; ++e) {
    std::vector<double> row;
    for (std::size_t l = 0; l < s.steps.size(); ++l) {
      const auto noise = sample_path(s.q, fams[l].grid(), ensemble_seed(s.seed, e));
      const auto direct = convolve_direct(fams[l], noise);
      const auto reform = convolve_reformulated(s.op, s.kernel, noise, rule);
      row.push_back(sup_discrepancy(direct.w_s, reform.convolution.w_s));
    }
    table.push_back(std::move(row));
  }
  return table;
}

/// Residual of W^{S_n} = int a A_n W^{S_n} + W for the Yosida operator A_n.
inline SeedLevelTable identity_study(const StudySetup& s, double yosida_n) {
  check_levels(s.steps);
  const auto op_n = yosida(s.op, yosida_n);
  const auto fams = build_level_families(op_n, s);
  SeedLevelTable table;
  for (std::size_t e = 0; e < s.seeds; ++e) {
    std::vector<double> row;
    for (std::size_t l = 0; l < s.steps.size(); ++l) {
      const auto noise = sample_path(s.q, fams[l].grid(), ensemble_seed(s.seed, e));
      const auto ws = convolve_direct(fams[l], noise);
      row.push_back(mild_identity_residual_bounded(op_n, s.kernel, ws, noise));
    }
    table.push_back(std::move(row));
  }
  return table;
}

struct ContinuityStudy {
  SeedLevelTable max_increment;          // of W^S
  SeedLevelTable frac_max_increment;     // of (-A)^gamma W^S
  std::vector<std::optional<double>> exponent;  // empirical, per seed
  bool all_finite = true;
};

inline ContinuityStudy continuity_study(const StudySetup& s, double gamma) {
  check_levels(s.steps);
  const auto fams = build_level_families(s.op, s);
  ContinuityStudy out;
  for (std::size_t e = 0; e < s.seeds; ++e) {
    std::vector<HilbertPath> paths;
    std::vector<double> frac_row;
    for (std::size_t l = 0; l < s.steps.size(); ++l) {
      const auto noise = sample_path(s.q, fams[l].grid(), ensemble_seed(s.seed, e));
      paths.push_back(convolve_direct(fams[l], noise).w_s);
      const auto rep = spatial_regularity(s.op, gamma, paths.back(), s.q);
      out.all_finite = out.all_finite && rep.all_finite;
      frac_row.push_back(rep.max_increment);
    }
    const auto mod = path_modulus(paths);
    std::vector<double> row;
    for (const auto& r : mod.rows) row.push_back(r.max_increment);
    out.max_increment.push_back(std::move(row));
    out.frac_max_increment.push_back(std::move(frac_row));
    out.exponent.push_back(mod.exponent);
  }
  return out;
}

/// Gaussianity of (-A)^gamma W^S(T) across an ensemble at one resolution.
inline GaussianityReport terminal_gaussianity(const StudySetup& s, std::size_t steps, std::size_t members,
                                              double gamma) {
  const auto fam = build_resolvent_family(s.op, s.kernel, TimeGrid(s.horizon, steps), s.solver);
  std::vector<HVector> samples;
  for (std::size_t e = 0; e < members; ++e) {
    const auto noise = sample_path(s.q, fam.grid(), ensemble_seed(s.seed + 7919, e));
    const auto ws = convolve_direct(fam, noise).w_s;
    samples.push_back(fractional_power_apply(s.op, gamma, ws.at(steps)));
  }
  return gaussianity_ztests(samples);
}

struct NormStudy {
  SeedLevelTable m_hat;
  SeedLevelTable maximal;  // |Y|_{W^{1,2}} + |AY|_{L^2}
};

/// Norms of the Cauchy state Y of the reformulated scheme.
inline NormStudy norm_study(const StudySetup& s, double gamma) {
  check_levels(s.steps);
  NormStudy out;
  for (std::size_t e = 0; e < s.seeds; ++e) {
    std::vector<double> mh, mx;
    for (std::size_t n : s.steps) {
      const auto noise = sample_path(s.q, TimeGrid(s.horizon, n), ensemble_seed(s.seed, e));
      const auto run = convolve_reformulated(s.op, s.kernel, noise);
      HilbertPath forcing = run.memory.w_tilde;
      forcing += noise.values();
      mh.push_back(interpolation_norms(run.cauchy.y, s.op, gamma, forcing).m_hat);
      mx.push_back(maximal_regularity_norms(run.cauchy.y, s.op).total());
    }
    out.m_hat.push_back(std::move(mh));
    out.maximal.push_back(std::move(mx));
  }
  return out;
}

/// Largest relative change between the two finest levels over all seeds.
inline double max_relative_change_finest(const SeedLevelTable& t) {
  double worst = 0.0;
  for (const auto& row : t) {
    if (row.size() < 2) continue;
    const double a = row[row.size() - 2], b = row.back();
    const double scale = std::min(std::abs(a), std::abs(b));
    if (a != b) worst = std::max(worst, scale > 0.0 ? std::abs(b - a) / scale : INFINITY);
  }
  return worst;
}

}  // namespace volterra
