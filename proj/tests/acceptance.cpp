// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "volterra/volterra.hpp"

using namespace volterra;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> seq(std::initializer_list<double> v) { return v; }

StudySetup setup(std::size_t modes, std::size_t seeds, std::uint64_t seed = 1) {
  return StudySetup{make_laplacian_1d(modes), exponential_kernel(), QCovariance::power_law(modes, 4.0),
                    1.0, {500, 1000, 2000}, seed, seeds};
}

Verdict scalar_oracle() {
  const TimeGrid g(2.0, 2000);
  const auto s = scalar_resolvent(exponential_kernel(), 1.0, g);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(s[i] - (0.5 + 0.5 * std::exp(-2.0 * g[i]))));
  return {err <= 1e-5, "max error " + fmt("%.3e", err) + " (tol 1e-5)"};
}

Verdict semigroup_reduction() {
  const auto op = make_laplacian_1d(8);
  const TimeGrid g(1.0, 1000);
  const auto fam = build_resolvent_family(op, constant_kernel(), g);
  double err = 0.0;
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t i = 0; i < g.size(); ++i)
      err = std::max(err, std::abs(fam(k, i) - std::exp(-op.eigenvalue(k) * g[i])));
  return {err <= 1e-4, "max error " + fmt("%.3e", err) + " (tol 1e-4)"};
}

Verdict positivity() {
  const auto mus = seq({0.0, 0.5, 1.0, 10.0});
  double worst = INFINITY;
  std::size_t entries = 0;
  for (const auto& k : {exponential_kernel(), fractional_kernel(0.5, 0.01)}) {
    const auto rep = check_complete_positivity(k, mus, TimeGrid(1.0, 500));
    for (const auto& e : rep.entries) {
      worst = std::min({worst, e.min_s, e.min_r});
      ++entries;
    }
  }
  return {worst >= -1e-10, "min over s, r = " + fmt("%.3e", worst) + " across " + std::to_string(entries) +
                               " solves on 2 grids (tol -1e-10)"};
}

Verdict yosida_convergence() {
  const auto n = seq({1e2, 1e3, 1e4, 1e5});
  const auto rep = yosida_resolvent_convergence(make_laplacian_1d(4), exponential_kernel(), TimeGrid(1.0, 1000), n);
  bool ok = rep.strictly_decreasing;
  std::string d = "sup diff";
  for (const auto& r : rep.rows) d += " " + fmt("%.3e", r.sup_difference);
  d += ", ratios";
  for (std::size_t j = 1; j < rep.rows.size(); ++j) {
    ok = ok && rep.rows[j].ratio >= 5.0 && rep.rows[j].ratio <= 15.0;
    d += " " + fmt("%.3f", rep.rows[j].ratio);
  }
  return {ok, d + " (need strictly decreasing, ratios in [5, 15])"};
}

Verdict cross_method() {
  const auto t = cross_method_study(setup(8, 20));
  const auto dec = count_strictly_decreasing(t);
  const auto med = level_medians(t);
  const bool ok = dec >= 18 && med.back() <= 0.5 * med.front();
  return {ok, std::to_string(dec) + "/20 decreasing, median N=500 " + fmt("%.3e", med.front()) + ", N=2000 " +
                  fmt("%.3e", med.back()) + " (ratio " + fmt("%.3f", med.back() / med.front()) + ", need <= 0.5)"};
}

Verdict identity() {
  const auto t = identity_study(setup(8, 10), 1e3);
  double lo = INFINITY, hi = 0.0;
  for (const auto& row : t)
    for (std::size_t j = 1; j < row.size(); ++j) {
      const double r = row[j - 1] / row[j];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  return {lo >= 1.4 && hi <= 2.6, "per-seed halving ratios in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) +
                                      "] over 10 seeds (need [1.4, 2.6])"};
}

Verdict covariance() {
  const auto rep = covariance_check(QCovariance::power_law(16, 4.0), TimeGrid(1.0, 100), 2000, 1);
  const auto& last = rep.rows.back();
  const bool ok = std::abs(last.z) <= 3.0 && rep.cross_outside_3se == 0;
  return {ok, "E|W(T)|^2 z = " + fmt("%.3f", last.z) + ", cross pairs outside 3 SE: " +
                  std::to_string(rep.cross_outside_3se) + "/" + std::to_string(rep.cross_z.size()) +
                  " (max |z| " + fmt("%.3f", rep.max_abs_cross_z) + ")"};
}

Verdict continuity() {
  const auto cs = continuity_study(setup(16, 20), 0.5);
  const auto dec = count_strictly_decreasing(cs.max_increment);
  // The Hoelder exponent is reported only.
  std::vector<double> ex;
  for (const auto& e : cs.exponent)
    if (e) ex.push_back(*e);
  return {dec >= 18, std::to_string(dec) + "/20 seeds with decreasing max increment (need >= 18), median exponent " +
                         (ex.empty() ? std::string("n/a") : fmt("%.3f", median(ex)))};
}

Verdict spatial() {
  const auto s = setup(16, 20);
  const auto cs = continuity_study(s, 0.5);
  const auto dec = count_strictly_decreasing(cs.frac_max_increment);
  const auto g = terminal_gaussianity(s, 500, 400, 0.5);
  const double frac = g.pass_fraction();
  const bool ok = cs.all_finite && dec >= 18 && frac >= 0.95;
  return {ok, std::string("finite ") + (cs.all_finite ? "yes" : "no") + ", " + std::to_string(dec) +
                  "/20 decreasing, Gaussianity " + fmt("%.1f", 100.0 * frac) + "% of modes"};
}

Verdict norm_stability() {
  const auto ns = norm_study(setup(8, 10), 0.5);
  const double m = max_relative_change_finest(ns.m_hat);
  const double x = max_relative_change_finest(ns.maximal);
  return {m < 0.2 && x < 0.2, "max relative change M^ " + fmt("%.4f", m) + ", maximal-regularity " + fmt("%.4f", x) +
                                  " (need < 0.2)"};
}

Verdict semigroup_estimates() {
  const auto op = make_laplacian_1d(64);
  bool ok = true;
  double excess = -INFINITY;
  for (double gamma : seq({0.1, 0.25, 0.5, 0.75, 0.9})) {
    for (std::size_t n : {100u, 1000u, 10000u}) {
      const auto b = semigroup_norm_bounds(op, TimeGrid(1.0, n), gamma);
      ok = ok && b.grid_sup_AT <= b.analytic_sup_AT + 1e-12 && b.grid_sup_frac <= b.analytic_sup_frac + 1e-12;
      excess = std::max({excess, b.grid_sup_AT - b.analytic_sup_AT, b.grid_sup_frac - b.analytic_sup_frac});
    }
  }
  return {ok, "largest grid sup minus analytic value " + fmt("%.3e", excess) + " (tol 1e-12)"};
}

struct Criterion {
  int id;
  std::string name;
  std::function<Verdict()> run;
  double budget = 0.0;  // seconds, 0 = none stated
};

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, "scalar resolvent oracle", scalar_oracle, 1.0},
      {2, "semigroup reduction", semigroup_reduction},
      {3, "complete positivity", positivity, 5.0},
      {4, "yosida resolvent convergence", yosida_convergence, 10.0},
      {5, "cross-method equivalence", cross_method, 60.0},
      {6, "identity residual halving", identity},
      {7, "wiener covariance", covariance, 10.0},
      {8, "continuity diagnostic", continuity},
      {9, "spatial regularity", spatial},
      {10, "norm stability", norm_stability},
      {11, "semigroup estimates", semigroup_estimates},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.2f s", secs);
    if (c.budget > 0.0) {
      timing += fmt(" of %.0f s budget", c.budget);
      if (secs >= c.budget) {
        v.passed = false;
        timing += " EXCEEDED";
      }
    }
    failed += v.passed ? 0 : 1;
    std::printf("%s criterion %2d %-30s %s [%s]\n", v.passed ? "PASS" : "FAIL", c.id, c.name.c_str(), v.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
