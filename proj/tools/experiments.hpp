#pragma once

// Named experiments driven by an ExperimentConfig. Each experiment fills an
// Outcome with pass/fail checks, report text and CSV artifacts; the caller
// writes the artifacts once the experiment has finished.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "volterra/volterra.hpp"

namespace volterra::cli {

// Thresholds shared with the acceptance suite.
inline constexpr double kResolventResidualTol = 1e-10;
inline constexpr double kSeedFraction = 0.9;           // e.g. 18 of 20 seeds
inline constexpr double kMedianShrink = 0.5;           // finest / coarsest median
inline constexpr double kHalvingLow = 1.4;             // 2 +- 30%
inline constexpr double kHalvingHigh = 2.6;
inline constexpr double kRateLow = 0.5;                // observed ratio / n ratio
inline constexpr double kRateHigh = 1.5;
inline constexpr double kGaussianPassFraction = 0.95;
inline constexpr double kNormStability = 0.2;
inline constexpr double kSemigroupTol = 1e-12;

struct Check {
  std::string experiment;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Outcome {
  std::vector<Check> checks;
  std::ostringstream report;
  std::map<std::string, std::string> files;  // relative path -> content
  std::string prefix;                          // subdirectory for `all`
  std::string experiment;

  void check(const std::string& name, bool passed, const std::string& detail) {
    checks.push_back({experiment, name, passed, detail});
    report << "  [" << (passed ? "PASS" : "FAIL") << "] " << name << ": " << detail << '\n';
  }

  template <class Writer>
  void file(const std::string& name, Writer&& w) {
    std::ostringstream os;
    w(os);
    files[prefix + name] = os.str();
  }

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

inline std::string fmt(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string describe(const std::string& name) {
  if (name == "complete-positivity")
    return "complete-positivity\n"
           "  For every mu in run.mu solves s + mu (a * s) = 1 and r + mu (a * r) = a on the working grid\n"
           "  and on one refinement, and checks that s and r are nonnegative (values above\n"
           "  -1e-10 * max(1, max|s|) count as nonnegative). This is the defining property of a\n"
           "  completely positive kernel.\n";
  if (name == "resolvent-build")
    return "resolvent-build\n"
           "  Builds the resolvent family S(t) of the pair (A, a) mode by mode from the resolvent\n"
           "  equation S(t)x = x + int_0^t a(t-s) A S(s)x ds and checks S(0) = I, commutation\n"
           "  A S(t) = S(t) A, the discrete residual of the resolvent equation, and nonnegativity\n"
           "  of the scalar resolvents for completely positive kernels.\n";
  if (name == "yosida-convergence")
    return "yosida-convergence\n"
           "  Resolvent convergence under Yosida approximation: builds S_n(t) for the bounded\n"
           "  operators A_n = n A R(n, A) = n^2 R(n, A) - n I and checks that\n"
           "  sup_{t in [0,T]} |S_n(t)x - S(t)x| -> 0 as n grows (uniform convergence on compacts),\n"
           "  with an empirical O(1/n) rate, and the growth bound ||S_n(t)|| <= M e^{w0 t}.\n";
  if (name == "convolution-compare")
    return "convolution-compare\n"
           "  Computes the stochastic convolution W^S(t) = int_0^t S(t-s) dW(s) directly and through\n"
           "  the reformulation W^S = A Y + W, Y' = c A Y + W~ + c W, W~ = int_0^t a'(t-s) W^S(s) ds,\n"
           "  c = a(0), on coupled noise, and checks that the sup-norm discrepancy between the two\n"
           "  routes shrinks under time-step refinement. Requires a finite, nonzero a(0).\n";
  if (name == "identities")
    return "identities\n"
           "  Checks E|W(t)|^2 = t Tr Q for the sampled Q-Wiener process, the identity\n"
           "  W^S(t) = int_0^t a(t-s) A_n W^S(s) ds + W(t) for the bounded Yosida operator A_n\n"
           "  (residual halves with the time step), and reports the weak identity tested on an\n"
           "  eigenvector, the mild solution X(t) = S(t)X0 + W^S(t), and the residual of the\n"
           "  Cauchy problem dY/dt = A Y + W~ + W.\n";
  if (name == "regularity")
    return "regularity\n"
           "  Trajectory continuity of W^S (max increment shrinks under refinement; empirical\n"
           "  Hoelder exponent reported as a diagnostic only), continuity and Gaussianity of\n"
           "  (-A)^gamma W^S, the semigroup estimates t||A T(t)|| <= 1/e and\n"
           "  t^gamma ||(-A)^gamma T(t)|| <= (gamma/e)^gamma, and refinement stability of the\n"
           "  W^{gamma,2}(H) + L^2(D_A(gamma,2)) and W^{1,2}(H) + L^2(D(A)) norms of Y.\n";
  if (name == "all") return "all\n  Runs every experiment in sequence.\n";
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

inline void run_complete_positivity(const ExperimentConfig& cfg, Outcome& out) {
  const auto kernel = cfg.make_kernel();
  const auto rep = check_complete_positivity(kernel, cfg.mus, cfg.grid());
  csv::Table t({"mu", "steps", "min_s", "min_r", "max_abs_s", "max_abs_r", "s_nonnegative", "r_nonnegative"});
  for (const auto& e : rep.entries)
    t.add({e.mu, double(e.steps), e.min_s, e.min_r, e.max_abs_s, e.max_abs_r, double(e.s_nonnegative),
           double(e.r_nonnegative)});
  out.file("positivity.csv", [&](std::ostream& os) { t.write(os); });
  double min_s = INFINITY, min_r = INFINITY;
  for (const auto& e : rep.entries) {
    min_s = std::min(min_s, e.min_s);
    min_r = std::min(min_r, e.min_r);
  }
  out.check("complete-positivity", rep.all_nonnegative(),
            "min s = " + fmt(min_s) + ", min r = " + fmt(min_r) + " over " + std::to_string(rep.entries.size()) +
                " (mu, grid) pairs");
}

inline void run_resolvent_build(const ExperimentConfig& cfg, Outcome& out) {
  const auto op = cfg.make_operator();
  const auto kernel = cfg.make_kernel();
  const auto fam = build_resolvent_family(op, kernel, cfg.grid());
  for (const auto& w : fam.warnings()) out.report << "  warning: " << w << '\n';
  out.file("resolvent.csv", [&](std::ostream& os) { csv::write(os, fam); });

  bool identity = true;
  for (std::size_t k = 0; k < fam.modes(); ++k) identity = identity && fam(k, 0) == 1.0;
  out.check("initial-identity", identity, "s_k(0) = 1 for all modes");

  bool commute = true;
  for (std::size_t k = 0; k < op.dimension(); ++k) {
    const auto e = HVector::basis(op.dimension(), k);
    for (std::size_t i = 0; i < fam.grid().size(); i += std::max<std::size_t>(1, fam.grid().steps() / 16))
      commute = commute && apply_A(op, fam.apply(i, e)) == fam.apply(i, apply_A(op, e));
  }
  out.check("commutation", commute, "A S(t) e_k = S(t) A e_k");

  const double res = resolvent_residual(fam);
  out.check("resolvent-residual", res <= kResolventResidualTol, "max residual " + fmt(res));

  if (known_completely_positive(kernel)) {
    double mn = INFINITY;
    for (std::size_t k = 0; k < fam.modes(); ++k)
      for (double v : fam.solution(k).values) mn = std::min(mn, v);
    out.check("nonnegative", mn >= -1e-10, "min s_k = " + fmt(mn));
  }
}

inline void run_yosida_convergence(const ExperimentConfig& cfg, Outcome& out) {
  const auto op = cfg.make_operator();
  const auto kernel = cfg.make_kernel();
  const auto rep = yosida_resolvent_convergence(op, kernel, cfg.grid(), cfg.yosida_n);
  for (const auto& w : rep.warnings) out.report << "  warning: " << w << '\n';
  csv::Table t({"n", "sup_difference", "ratio", "max_norm"});
  for (const auto& r : rep.rows) t.add({r.n, r.sup_difference, r.ratio, r.max_norm});
  out.file("yosida.csv", [&](std::ostream& os) { t.write(os); });
  for (const auto& r : rep.rows)
    out.report << "  n = " << fmt(r.n) << "  sup|S_n - S| = " << fmt(r.sup_difference) << "  ratio = " << fmt(r.ratio)
               << '\n';
  out.check("strictly-decreasing", rep.strictly_decreasing, "sup-differences decrease along n");
  // The 1/n rate only shows once n dominates the spectrum; earlier pairs are reported, not judged.
  const double lambda_max = op.eigenvalue(op.dimension() - 1);
  bool rate = true;
  int judged = 0;
  for (std::size_t j = 1; j < rep.rows.size(); ++j) {
    if (rep.rows[j - 1].n < lambda_max) continue;
    const double scaled = rep.rows[j].ratio / (rep.rows[j].n / rep.rows[j - 1].n);
    rate = rate && scaled >= kRateLow && scaled <= kRateHigh;
    ++judged;
  }
  out.check("rate-1/n", rate,
            std::to_string(judged) + " consecutive pairs with n >= lambda_max = " + fmt(lambda_max) +
                ", ratios within [0.5, 1.5] x (n ratio)");
  out.report << "  empirical M = " << fmt(rep.empirical_M) << ", w0 = " << fmt(rep.empirical_w0) << '\n';
  if (known_completely_positive(kernel))
    out.check("growth-bound", rep.empirical_M <= 1.0 + 1e-10 && rep.empirical_w0 == 0.0,
              "||S_n(t)|| <= 1 (M = " + fmt(rep.empirical_M) + ")");
}

inline StudySetup study_setup(const ExperimentConfig& cfg, std::size_t seeds) {
  return StudySetup{cfg.make_operator(), cfg.make_kernel(), cfg.make_covariance(), cfg.horizon, cfg.level_steps(),
                    cfg.seed, seeds};
}

inline void run_convolution_compare(const ExperimentConfig& cfg, Outcome& out) {
  const auto setup = study_setup(cfg, cfg.ensemble);
  const auto table = cross_method_study(setup, cfg.forcing);
  csv::Table t({"seed_index", "steps", "sup_discrepancy"});
  for (std::size_t e = 0; e < table.size(); ++e)
    for (std::size_t l = 0; l < table[e].size(); ++l) t.add({double(e), double(setup.steps[l]), table[e][l]});
  out.file("discrepancy.csv", [&](std::ostream& os) { t.write(os); });

  // Per-time table and paths for the first seed at the finest level.
  const TimeGrid fine(cfg.horizon, setup.steps.back());
  const auto fam = build_resolvent_family(setup.op, setup.kernel, fine);
  const auto noise = sample_path(setup.q, fine, ensemble_seed(cfg.seed, 0));
  const auto direct = convolve_direct(fam, noise);
  const auto reform = convolve_reformulated(setup.op, setup.kernel, noise, cfg.forcing);
  const auto diff = direct.w_s - reform.convolution.w_s;
  csv::Table per_time({"t", "discrepancy"});
  for (std::size_t i = 0; i < fine.size(); ++i) per_time.add({fine[i], diff.norm_at(i)});
  out.file("discrepancy_time.csv", [&](std::ostream& os) { per_time.write(os); });
  out.file("ws_direct.csv", [&](std::ostream& os) { csv::write(os, direct.w_s); });
  out.file("ws_reformulated.csv", [&](std::ostream& os) { csv::write(os, reform.convolution.w_s); });
  out.file("noise.csv", [&](std::ostream& os) { csv::write(os, noise); });

  out.report << "  kernel = " << to_string(setup.kernel.kind()) << ", K = " << setup.op.dimension()
             << ", seed = " << cfg.seed << ", seeds = " << table.size() << '\n';
  const auto med = level_medians(table);
  for (std::size_t l = 0; l < med.size(); ++l)
    out.report << "  steps = " << setup.steps[l] << "  dt = " << fmt(cfg.horizon / double(setup.steps[l]))
               << "  median sup-discrepancy = " << fmt(med[l]) << '\n';
  if (setup.steps.size() >= 2) {
    const std::size_t dec = count_strictly_decreasing(table);
    out.check("decreasing-per-seed", double(dec) >= kSeedFraction * double(table.size()),
              std::to_string(dec) + "/" + std::to_string(table.size()) + " seeds strictly decreasing");
    out.check("median-shrink", med.back() <= kMedianShrink * med.front(),
              "median finest/coarsest = " + fmt(med.back() / med.front()));
  } else {
    out.report << "  single level: refinement checks skipped\n";
  }
}

inline void run_identities(const ExperimentConfig& cfg, Outcome& out) {
  const auto op = cfg.make_operator();
  const auto kernel = cfg.make_kernel();
  const auto q = cfg.make_covariance();
  const auto grid = cfg.grid();

  const auto cov = covariance_check(q, grid, cfg.covariance_ensemble, cfg.seed);
  csv::Table ct({"t", "estimate", "expected", "standard_error", "z"});
  bool within = true;
  for (const auto& r : cov.rows) {
    ct.add({r.t, r.estimate, r.expected, r.standard_error, r.z});
    within = within && std::abs(r.z) <= 3.0;
  }
  out.file("covariance.csv", [&](std::ostream& os) { ct.write(os); });
  out.check("noise-covariance", within, "E|W(t)|^2 = t Tr Q within 3 standard errors (Tr Q = " + fmt(cov.trace) + ")");
  out.check("noise-cross-covariance", cov.cross_outside_3se == 0,
            std::to_string(cov.cross_outside_3se) + " mode pairs outside 3 standard errors, max |z| = " +
                fmt(cov.max_abs_cross_z, 3));

  auto setup = study_setup(cfg, cfg.ensemble);
  const auto ident = identity_study(setup, cfg.identity_n);
  csv::Table it({"seed_index", "steps", "residual"});
  for (std::size_t e = 0; e < ident.size(); ++e)
    for (std::size_t l = 0; l < ident[e].size(); ++l) it.add({double(e), double(setup.steps[l]), ident[e][l]});
  out.file("identity.csv", [&](std::ostream& os) { it.write(os); });
  if (setup.steps.size() >= 2) {
    bool halving = true;
    double lo = INFINITY, hi = 0.0;
    for (const auto& row : ident)
      for (std::size_t l = 1; l < row.size(); ++l) {
        const double r = row[l - 1] / row[l];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        halving = halving && r >= kHalvingLow && r <= kHalvingHigh;
      }
    out.check("yosida-identity-halving", halving,
              "residual ratios per halving in [" + fmt(lo, 4) + ", " + fmt(hi, 4) + "], n = " + fmt(cfg.identity_n));
  }

  // Single-path diagnostics on the working grid.
  const auto fam = build_resolvent_family(op, kernel, grid);
  const auto noise = sample_path(q, grid, ensemble_seed(cfg.seed, 0));
  const auto ws = convolve_direct(fam, noise);
  out.report << "  weak identity residual (mode 1): " << fmt(weak_identity_residual(op, kernel, ws, noise, 0)) << '\n';
  const auto x = mild_solution(fam, HVector::basis(op.dimension(), 0), noise);
  out.report << "  mild solution |X(T)|_H with X0 = e_1: " << fmt(x.norm_at(grid.steps())) << '\n';
  if (kernel.origin_value() && *kernel.origin_value() != 0.0) {
    const auto run = convolve_reformulated(op, kernel, noise, cfg.forcing);
    out.report << "  Cauchy derivative residual: "
               << fmt(cauchy_derivative_check(run.cauchy, op, run.memory, noise, run.c)) << '\n';
  }
}

inline void run_regularity(const ExperimentConfig& cfg, Outcome& out) {
  const auto op = cfg.make_operator();
  const double gamma = cfg.gammas.front();

  csv::Table sb({"gamma", "grid_sup_AT", "analytic_sup_AT", "grid_sup_frac", "analytic_sup_frac", "grid_sup_frac_A",
                 "analytic_sup_frac_A"});
  bool bounds = true;
  for (double g : cfg.gammas) {
    const auto b = semigroup_norm_bounds(op, cfg.grid(), g);
    sb.add({g, b.grid_sup_AT, b.analytic_sup_AT, b.grid_sup_frac, b.analytic_sup_frac, b.grid_sup_frac_A,
            b.analytic_sup_frac_A});
    bounds = bounds && b.within(kSemigroupTol);
  }
  out.file("semigroup_bounds.csv", [&](std::ostream& os) { sb.write(os); });
  out.check("semigroup-estimates", bounds, "grid suprema never exceed 1/e and (gamma/e)^gamma");

  const auto setup = study_setup(cfg, cfg.ensemble);
  const auto q = setup.q;
  const auto sums = hypothesis_partial_sums(op, q, gamma);
  csv::Table ps({"modes", "partial_sum"});
  for (std::size_t k = 0; k < sums.size(); ++k) ps.add({double(k + 1), sums[k]});
  out.file("hypothesis_partial_sums.csv", [&](std::ostream& os) { ps.write(os); });

  if (setup.steps.size() >= 2) {
    const auto cs = continuity_study(setup, gamma);
    csv::Table mt({"seed_index", "steps", "max_increment", "frac_max_increment"});
    for (std::size_t e = 0; e < cs.max_increment.size(); ++e)
      for (std::size_t l = 0; l < setup.steps.size(); ++l)
        mt.add({double(e), double(setup.steps[l]), cs.max_increment[e][l], cs.frac_max_increment[e][l]});
    out.file("modulus.csv", [&](std::ostream& os) { mt.write(os); });
    std::vector<double> exps;
    for (const auto& x : cs.exponent)
      if (x) exps.push_back(*x);
    out.report << "  empirical Hoelder exponent (diagnostic only, not asserted): median " << fmt(median(exps), 4)
               << '\n';
    const std::size_t n = cs.max_increment.size();
    const std::size_t dec = count_strictly_decreasing(cs.max_increment);
    out.check("continuity", double(dec) >= kSeedFraction * double(n),
              std::to_string(dec) + "/" + std::to_string(n) + " seeds with shrinking max increment of W^S");
    const std::size_t fdec = count_strictly_decreasing(cs.frac_max_increment);
    out.check("spatial-finite", cs.all_finite, "|(-A)^gamma W^S(t)|_H finite at all grid points");
    out.check("spatial-continuity", double(fdec) >= kSeedFraction * double(n),
              std::to_string(fdec) + "/" + std::to_string(n) + " seeds with shrinking max increment of (-A)^gamma W^S");

    const auto ns = norm_study(setup, gamma);
    csv::Table nt({"seed_index", "steps", "m_hat", "maximal_regularity"});
    for (std::size_t e = 0; e < ns.m_hat.size(); ++e)
      for (std::size_t l = 0; l < setup.steps.size(); ++l)
        nt.add({double(e), double(setup.steps[l]), ns.m_hat[e][l], ns.maximal[e][l]});
    out.file("norms.csv", [&](std::ostream& os) { nt.write(os); });
    const double dm = max_relative_change_finest(ns.m_hat);
    const double dx = max_relative_change_finest(ns.maximal);
    out.check("interpolation-stability", dm < kNormStability, "max relative change of M_hat " + fmt(dm, 3));
    out.check("maximal-regularity-stability", dx < kNormStability,
              "max relative change of |Y|_W12 + |AY|_L2 " + fmt(dx, 3));
  } else {
    out.report << "  single level: refinement checks skipped\n";
  }

  const auto g = terminal_gaussianity(setup, setup.steps.front(), cfg.gaussian_ensemble, gamma);
  csv::Table gt({"mode", "skewness", "z_skewness", "excess_kurtosis", "z_kurtosis", "pass"});
  for (std::size_t k = 0; k < g.modes.size(); ++k) {
    const auto& m = g.modes[k];
    gt.add({double(k + 1), m.skewness, m.z_skewness, m.excess_kurtosis, m.z_kurtosis, double(m.pass)});
  }
  out.file("gaussianity.csv", [&](std::ostream& os) { gt.write(os); });
  out.check("gaussianity", g.pass_fraction() >= kGaussianPassFraction,
            fmt(100.0 * g.pass_fraction(), 4) + "% of modes pass the 3-sigma skewness/kurtosis tests");

  if (cfg.theta) {
    const auto noise = sample_path(q, cfg.grid(), ensemble_seed(cfg.seed, 0));
    const auto run = convolve_reformulated(op, setup.kernel, noise, cfg.forcing);
    HilbertPath forcing = run.memory.w_tilde;
    forcing += noise.values();
    const auto rep = interpolation_norms(run.cauchy.y, op, gamma, forcing, cfg.theta);
    out.report << "  mixed norm W^{gamma-theta,2}(D_A(theta,2)) (experimental): " << fmt(*rep.mixed) << '\n';
  }
}

inline void run_experiment(const std::string& name, const ExperimentConfig& cfg, Outcome& out) {
  out.experiment = name;
  out.report << "== " << name << '\n';
  if (name == "complete-positivity") run_complete_positivity(cfg, out);
  else if (name == "resolvent-build") run_resolvent_build(cfg, out);
  else if (name == "yosida-convergence") run_yosida_convergence(cfg, out);
  else if (name == "convolution-compare") run_convolution_compare(cfg, out);
  else if (name == "identities") run_identities(cfg, out);
  else if (name == "regularity") run_regularity(cfg, out);
  else throw std::invalid_argument("unknown experiment '" + name + "'");
}

}  // namespace volterra::cli
