#pragma once

#include <string>
#include <vector>

#include "ftlbench/config.hpp"
#include "ftlbench/engine.hpp"
#include "ftlbench/ftl.hpp"
#include "ftlbench/metrics.hpp"

namespace ftlbench {

struct RunOutput {
  MetricsReport report;
  std::string report_json;
  std::vector<double> latencies_us;
};

// Builds the device, runs the configured warmup (excluded from metrics),
// replays the measured workload, and assembles the report.
RunOutput run_simulation(const SimConfig& cfg, IoObserver* observer = nullptr);

// Lower-level pieces for callers that drive the FTL themselves.
std::vector<IoRequest> build_workload(const SimConfig& cfg);
MetricsReport assemble_report(const SimConfig& cfg, const Ftl& ftl,
                              const RunStats& stats);

// `run` subcommand: writes report.json and latency.csv under out_dir.
// Returns the process exit code.
int run_command(const SimConfig& cfg, const std::string& out_dir);

// `sweep` subcommand: one run per axis value (axis "key=v1,v2,..."),
// cells executed on up to `threads` workers, summary.csv in axis order.
// A failed cell is recorded and the others proceed.
int sweep_command(const SimConfig& base, const std::string& axis_key,
                  const std::vector<std::string>& axis_values,
                  const std::string& out_dir, unsigned threads);

}  // namespace ftlbench
