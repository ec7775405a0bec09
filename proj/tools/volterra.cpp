// volterra: experiment driver.
//
//   volterra run <config.ini>
//   volterra describe <experiment>
//
// Exit codes: 0 success, 1 experiment failure, 2 bad input.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "experiments.hpp"

namespace fs = std::filesystem;
using namespace volterra;
using namespace volterra::cli;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitBadInput = 2;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path output_directory(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("VOLTERRA_OUTPUT_DIR"); env && *env) return env;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return "volterra-run";
}

void write_artifacts(const fs::path& dir, const std::string& experiment, const std::vector<Outcome>& outcomes,
                     const std::string& error) {
  fs::create_directories(dir);
  nlohmann::json summary;
  summary["experiment"] = experiment;
  summary["checks"] = nlohmann::json::array();
  bool passed = error.empty();
  std::ofstream report(dir / "report.txt");
  report << "generated: " << utc_timestamp() << '\n';
  for (const auto& o : outcomes) {
    report << o.report.str();
    for (const auto& [name, content] : o.files) {
      const fs::path p = dir / name;
      fs::create_directories(p.parent_path());
      std::ofstream(p) << content;
    }
    for (const auto& c : o.checks) {
      summary["checks"].push_back({{"experiment", c.experiment}, {"name", c.name}, {"passed", c.passed},
                                   {"detail", c.detail}});
      passed = passed && c.passed;
    }
  }
  if (!error.empty()) {
    report << "error: " << error << '\n';
    summary["error"] = error;
  }
  summary["passed"] = passed;
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
}

int run(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "volterra: cannot read config '" << config_path << "'\n";
    return kExitBadInput;
  }
  ExperimentConfig cfg;
  try {
    cfg = parse_config(in);
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "volterra: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "volterra: invalid configuration: " << e.what() << '\n';
    return kExitBadInput;
  }

  std::vector<std::string> names;
  if (cfg.experiment == "all") {
    for (const auto& n : experiment_names())
      if (n != "all") names.push_back(n);
  } else {
    names.push_back(cfg.experiment);
  }

  std::vector<Outcome> outcomes;
  std::string error;
  for (const auto& name : names) {
    outcomes.emplace_back();
    Outcome& o = outcomes.back();
    if (cfg.experiment == "all") o.prefix = name + "/";
    try {
      run_experiment(name, cfg, o);
    } catch (const std::exception& e) {
      error = name + ": " + e.what();
      break;
    }
  }

  const fs::path dir = output_directory(cfg);
  write_artifacts(dir, cfg.experiment, outcomes, error);

  bool passed = error.empty();
  for (const auto& o : outcomes)
    for (const auto& c : o.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.experiment << '/' << c.name << ": " << c.detail << '\n';
      passed = passed && c.passed;
    }
  if (!error.empty()) std::cerr << "volterra: " << error << '\n';
  std::cout << "artifacts: " << dir.string() << '\n';
  return passed ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Volterra equation laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment selected in a config file");
  run_cmd->add_option("config", config_path, "INI configuration file")->required();

  std::string experiment;
  auto* describe_cmd = app.add_subcommand("describe", "Print what an experiment checks");
  describe_cmd->add_option("experiment", experiment, "Experiment name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  if (*run_cmd) return run(config_path);
  try {
    std::cout << describe(experiment);
  } catch (const std::invalid_argument& e) {
    std::cerr << "volterra: " << e.what() << '\n';
    return kExitBadInput;
  }
  return 0;
}
