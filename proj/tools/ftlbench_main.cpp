// ftlbench: deterministic SSD / flash-translation-layer simulator.
//
//   ftlbench run   --config sim.conf [--out DIR] [--seed N]
//   ftlbench sweep --config sim.conf --axis ftl=ideal,dftl,tpftl [--out DIR]
//
// FTLBENCH_THREADS caps sweep parallelism.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ftlbench/config.hpp"
#include "ftlbench/errors.hpp"
#include "ftlbench/runner.hpp"

namespace {

unsigned sweep_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("FTLBENCH_THREADS");
  if (!env) return hw;
  char* end = nullptr;
  unsigned long v = std::strtoul(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) {
    std::cerr << "ftlbench: ignoring bad FTLBENCH_THREADS value '" << env
              << "'\n";
    return hw;
  }
  return std::min<unsigned long>(v, hw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic SSD FTL simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string axis;
  long long seed_override = -1;

  CLI::App* run = app.add_subcommand("run", "execute one simulation");
  run->add_option("--config", config_path, "config file (key=value or JSON)")
      ->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed_override, "override the config seed");

  CLI::App* sweep = app.add_subcommand("sweep", "run once per axis value");
  sweep->add_option("--config", config_path, "base config file")->required();
  sweep->add_option("--axis", axis, "key=v1,v2,... to vary")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--seed", seed_override, "override the config seed");

  CLI11_PARSE(app, argc, argv);

  try {
    ftlbench::SimConfig cfg = ftlbench::SimConfig::from_file(config_path);
    if (seed_override >= 0) cfg.seed = uint64_t(seed_override);
    cfg.validate();

    if (run->parsed()) {
      return ftlbench::run_command(cfg, out_dir);
    }
    size_t eq = axis.find('=');
    if (eq == std::string::npos) {
      std::cerr << "ftlbench: --axis wants key=v1,v2,...\n";
      return 1;
    }
    std::string key = axis.substr(0, eq);
    std::vector<std::string> values;
    std::string rest = axis.substr(eq + 1);
    size_t pos = 0;
    while (pos <= rest.size()) {
      size_t comma = rest.find(',', pos);
      if (comma == std::string::npos) {
        values.push_back(rest.substr(pos));
        break;
      }
      values.push_back(rest.substr(pos, comma - pos));
      pos = comma + 1;
    }
    return ftlbench::sweep_command(cfg, key, values, out_dir, sweep_threads());
  } catch (const std::exception& e) {
    std::cerr << "ftlbench: " << e.what() << "\n";
    return 1;
  }
}
