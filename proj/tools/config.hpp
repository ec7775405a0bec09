#pragma once

// Experiment configuration: an INI file with one section per component.
// See configs/example.ini for every key.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "volterra/volterra.hpp"

namespace volterra::cli {

/// Syntax errors and values that are not numbers.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"complete-positivity", "resolvent-build", "yosida-convergence",
                                              "convolution-compare", "identities", "regularity", "all"};
  return names;
}

struct OperatorSpec {
  std::string kind = "laplacian";  // laplacian | eigenvalues
  std::size_t modes = 4;
  std::vector<double> eigenvalues;
};

struct CovarianceSpec {
  std::string kind = "power";  // power | values
  double power = 4.0;
  double scale = 1.0;
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string experiment = "all";
  OperatorSpec op;
  KernelSpec kernel;
  CovarianceSpec covariance;
  double horizon = 1.0;
  std::size_t steps = 500;   // coarsest level
  std::size_t levels = 3;    // each level doubles the steps
  std::uint64_t seed = 1;
  std::size_t ensemble = 20;
  std::size_t covariance_ensemble = 2000;
  std::size_t gaussian_ensemble = 400;
  std::vector<double> gammas{0.5};
  std::optional<double> theta;
  std::vector<double> yosida_n{1e2, 1e3, 1e4, 1e5};
  double identity_n = 1e3;
  std::vector<double> mus{0.0, 0.5, 1.0, 10.0};
  ForcingRule forcing = ForcingRule::LeftPoint;
  std::string output_dir;

  SpectralOperator make_operator() const {
    if (op.kind == "laplacian") return make_laplacian_1d(op.modes);
    if (op.kind == "eigenvalues") return SpectralOperator(op.eigenvalues, "eigenvalues");
    throw std::invalid_argument("operator kind must be 'laplacian' or 'eigenvalues'");
  }

  Kernel make_kernel() const { return Kernel(kernel); }

  QCovariance make_covariance() const {
    const std::size_t k = make_operator().dimension();
    if (covariance.kind == "power") return QCovariance::power_law(k, covariance.power, covariance.scale);
    if (covariance.kind == "values") {
      if (covariance.values.size() != k) throw std::invalid_argument("covariance values must match the mode count");
      return QCovariance(covariance.values);
    }
    throw std::invalid_argument("covariance kind must be 'power' or 'values'");
  }

  TimeGrid grid() const { return TimeGrid(horizon, steps); }

  std::vector<std::size_t> level_steps() const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < levels; ++l) out.push_back(steps << l);
    return out;
  }

  /// Throws std::invalid_argument when a component cannot be constructed.
  void validate() const {
    bool known = false;
    for (const auto& n : experiment_names()) known = known || n == experiment;
    if (!known) throw std::invalid_argument("unknown experiment '" + experiment + "'");
    const auto o = make_operator();
    make_kernel();
    make_covariance();
    grid();
    if (levels < 1) throw std::invalid_argument("grid.levels must be >= 1");
    if (ensemble < 1) throw std::invalid_argument("run.ensemble must be >= 1");
    if (gaussian_ensemble < 8) throw std::invalid_argument("run.gaussian_ensemble must be >= 8");
    if (covariance_ensemble < 100) throw std::invalid_argument("run.covariance_ensemble must be >= 100");
    for (double g : gammas)
      if (!(g > 0.0 && g < 1.0)) throw std::invalid_argument("run.gamma values must lie in (0, 1)");
    if (theta && !(*theta > 0.0 && *theta < gammas.front()))
      throw std::invalid_argument("run.theta must lie in (0, gamma)");
    for (double m : mus)
      if (!(m >= 0.0)) throw std::invalid_argument("run.mu values must be >= 0");
    for (std::size_t j = 0; j < yosida_n.size(); ++j)
      if (!(yosida_n[j] > 0.0) || (j > 0 && !(yosida_n[j] > yosida_n[j - 1])))
        throw std::invalid_argument("run.yosida_n must be positive and increasing");
    if (!(identity_n > 0.0)) throw std::invalid_argument("run.identity_n must be positive");
    if (kernel.kind == KernelKind::Tabulated && !make_kernel().covers(horizon))
      throw std::invalid_argument("tabulated kernel does not cover the horizon");
    (void)o;
  }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = cell.find_last_not_of(" \t");
    const std::string item = cell.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': '" + item + "' is not a number");
    }
    if (used != item.size()) throw ConfigError("key '" + key + "': '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

inline std::string get_text(const boost::property_tree::ptree& pt, const std::string& key, const std::string& fallback) {
  return pt.get<std::string>(key, fallback);
}

/// Single real number; the whole value must parse.
inline double get_real(const boost::property_tree::ptree& pt, const std::string& key, double fallback) {
  const auto text = pt.get_optional<std::string>(key);
  if (!text) return fallback;
  const auto v = parse_list(*text, key);
  if (v.size() != 1) throw ConfigError("key '" + key + "' must hold exactly one number");
  return v.front();
}

/// Non-negative integer; rejects signs and fractions that a plain size_t read would wrap or truncate.
template <class T>
T get_count(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
  const auto text = pt.get_optional<std::string>(key);
  if (!text) return fallback;
  const auto b = text->find_first_not_of(" \t");
  const auto e = text->find_last_not_of(" \t");
  const std::string item = b == std::string::npos ? "" : text->substr(b, e - b + 1);
  if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("key '" + key + "' must be a non-negative integer, got '" + *text + "'");
  try {
    return static_cast<T>(std::stoull(item));
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' is out of range");
  }
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "exponential") return KernelKind::Exponential;
  if (s == "constant") return KernelKind::Constant;
  if (s == "fractional") return KernelKind::Fractional;
  if (s == "tabulated") return KernelKind::Tabulated;
  throw ConfigError("kernel.kind '" + s + "' is not one of exponential, constant, fractional, tabulated");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  static const std::map<std::string, std::set<std::string>> allowed{
      {"experiment", {"name"}},
      {"grid", {"horizon", "steps", "levels"}},
      {"operator", {"kind", "modes", "eigenvalues"}},
      {"kernel", {"kind", "alpha", "epsilon", "table_step", "table_values"}},
      {"covariance", {"kind", "power", "scale", "values"}},
      {"run",
       {"seed", "ensemble", "covariance_ensemble", "gaussian_ensemble", "gamma", "theta", "yosida_n", "identity_n", "mu",
        "forcing_rule", "output_dir"}}};
  for (const auto& [name, sub] : tree) {
    const auto it = allowed.find(name);
    if (it == allowed.end()) throw ConfigError("unknown section [" + name + "]");
    if (sub.empty() && !sub.data().empty()) throw ConfigError("key '" + name + "' outside of a section");
    for (const auto& [key, value] : sub)
      if (!it->second.count(key)) throw ConfigError("unknown key '" + name + "." + key + "'");
  }

  ExperimentConfig c;
  c.experiment = detail::get_text(tree, "experiment.name", c.experiment);
  c.horizon = detail::get_real(tree, "grid.horizon", c.horizon);
  c.steps = detail::get_count<std::size_t>(tree, "grid.steps", c.steps);
  c.levels = detail::get_count<std::size_t>(tree, "grid.levels", c.levels);

  c.op.kind = detail::get_text(tree, "operator.kind", c.op.kind);
  c.op.modes = detail::get_count<std::size_t>(tree, "operator.modes", c.op.modes);
  if (auto v = tree.get_optional<std::string>("operator.eigenvalues"))
    c.op.eigenvalues = detail::parse_list(*v, "operator.eigenvalues");

  c.kernel.kind = detail::parse_kernel_kind(detail::get_text(tree, "kernel.kind", "exponential"));
  c.kernel.alpha = detail::get_real(tree, "kernel.alpha", c.kernel.alpha);
  c.kernel.epsilon = detail::get_real(tree, "kernel.epsilon", c.kernel.epsilon);
  c.kernel.table_step = detail::get_real(tree, "kernel.table_step", c.kernel.table_step);
  if (auto v = tree.get_optional<std::string>("kernel.table_values"))
    c.kernel.table_values = detail::parse_list(*v, "kernel.table_values");

  c.covariance.kind = detail::get_text(tree, "covariance.kind", c.covariance.kind);
  c.covariance.power = detail::get_real(tree, "covariance.power", c.covariance.power);
  c.covariance.scale = detail::get_real(tree, "covariance.scale", c.covariance.scale);
  if (auto v = tree.get_optional<std::string>("covariance.values"))
    c.covariance.values = detail::parse_list(*v, "covariance.values");

  c.seed = detail::get_count<std::uint64_t>(tree, "run.seed", c.seed);
  c.ensemble = detail::get_count<std::size_t>(tree, "run.ensemble", c.ensemble);
  c.covariance_ensemble = detail::get_count<std::size_t>(tree, "run.covariance_ensemble", c.covariance_ensemble);
  c.gaussian_ensemble = detail::get_count<std::size_t>(tree, "run.gaussian_ensemble", c.gaussian_ensemble);
  if (auto v = tree.get_optional<std::string>("run.gamma")) c.gammas = detail::parse_list(*v, "run.gamma");
  if (c.gammas.empty()) throw ConfigError("run.gamma must list at least one value");
  if (auto v = tree.get_optional<std::string>("run.theta")) {
    const auto t = detail::parse_list(*v, "run.theta");
    if (t.size() != 1) throw ConfigError("run.theta must be a single number");
    c.theta = t.front();
  }
  if (auto v = tree.get_optional<std::string>("run.yosida_n")) c.yosida_n = detail::parse_list(*v, "run.yosida_n");
  c.identity_n = detail::get_real(tree, "run.identity_n", c.identity_n);
  if (auto v = tree.get_optional<std::string>("run.mu")) c.mus = detail::parse_list(*v, "run.mu");
  const auto rule = detail::get_text(tree, "run.forcing_rule", "left-point");
  if (rule == "left-point")
    c.forcing = ForcingRule::LeftPoint;
  else if (rule == "picard-trapezoid")
    c.forcing = ForcingRule::PicardTrapezoid;
  else
    throw ConfigError("run.forcing_rule must be 'left-point' or 'picard-trapezoid'");
  c.output_dir = detail::get_text(tree, "run.output_dir", c.output_dir);
  return c;
}

}  // namespace volterra::cli
