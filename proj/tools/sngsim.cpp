// sngsim: run scenarios, parameter sweeps and the acceptance suite.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sng/acceptance.hpp"
#include "sng/errors.hpp"
#include "sng/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sng::ConfigError("cannot read config file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

sng::ScenarioConfig load_config(const std::string& scenario, const std::string& config_file) {
  const auto kind = sng::parse_scenario_kind(scenario);
  if (!kind) throw sng::ConfigError("unknown scenario '" + scenario + "'");
  const std::string text = config_file.empty() ? std::string() : read_file(config_file);
  return sng::parse_config(text, kind);
}

unsigned resolve_jobs(unsigned flag) {
  if (const char* env = std::getenv("SIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw sng::ConfigError("SIM_THREADS must be a positive integer");
    }
    return static_cast<unsigned>(v);
  }
  return std::max(1u, flag);
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split-step simulator for self-trapped wave packets"};
  app.require_subcommand(1);

  std::string scenario;
  std::string config_file;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("scenario", scenario,
                  "figure1, ground-state, choquard, ehrenfest, boost or custom")
      ->required();
  run->add_option("--config", config_file, "key = value config file");
  run->add_option("--out", out_dir, "output directory");

  std::string sweep_scenario = "figure1";
  std::string param;
  std::string values;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run one scenario per parameter value");
  sweep->add_option("--scenario", sweep_scenario, "scenario to sweep (default figure1)");
  sweep->add_option("--param", param, "numeric config key")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--jobs", jobs, "worker threads (SIM_THREADS overrides)");
  sweep->add_option("--config", config_file, "base config file");
  sweep->add_option("--out", out_dir, "output directory");

  std::string check_out = "acceptance_out";
  bool no_info = false;
  auto* check = app.add_subcommand("check", "Run the acceptance suite");
  check->add_option("--out", check_out, "output directory");
  check->add_option("--jobs", jobs, "worker threads for the sweep (SIM_THREADS overrides)");
  check->add_flag("--no-info", no_info, "skip the supplementary runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = load_config(scenario, config_file);
      if (!out_dir.empty()) cfg.out = out_dir;
      const auto report = sng::run_scenario(cfg);
      sng::write_report(std::cout, report);
      return report.passed() ? 0 : 1;
    }
    if (*sweep) {
      auto cfg = load_config(sweep_scenario, config_file);
      if (!out_dir.empty()) cfg.out = out_dir;
      const auto list = split_values(values);
      const auto rows = sng::sweep(cfg, param, list, resolve_jobs(jobs));
      const auto tsv = std::filesystem::path(cfg.out) / "sweep.tsv";
      std::filesystem::create_directories(cfg.out);
      sng::write_sweep_tsv(tsv, param, rows);
      bool ok = true;
      for (const auto& row : rows) {
        std::cout << param << " = " << row.value << ": ";
        if (!row.ok) {
          std::cout << "error: " << row.error << '\n';
        } else {
          std::cout << (row.checks_passed ? "pass" : "fail") << '\n';
        }
        ok = ok && row.ok && row.checks_passed;
      }
      std::cout << "wrote " << tsv.string() << '\n';
      return ok ? 0 : 1;
    }
    if (*check) {
      sng::AcceptanceOptions options;
      options.out = check_out;
      options.jobs = resolve_jobs(jobs);
      options.supplementary = !no_info;
      const auto report = sng::run_acceptance(options, &std::cout);
      const auto passed = std::count_if(report.criteria.begin(), report.criteria.end(),
                                        [](const sng::CriterionResult& c) { return c.passed(); });
      std::cout << passed << '/' << report.criteria.size() << " criteria passed\n";
      return report.passed() ? 0 : 1;
    }
  } catch (const sng::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
