#include "ftlbench/runner.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "ftlbench/errors.hpp"
#include "ftlbench/workload.hpp"

namespace ftlbench {

std::vector<IoRequest> build_workload(const SimConfig& cfg) {
  if (cfg.workload == "trace") {
    std::ifstream in(cfg.trace_path);
    if (!in) throw ConfigError("cannot open trace: " + cfg.trace_path);
    return parse_trace(in, cfg.logical_pages(), cfg.scale_num, cfg.scale_den);
  }
  GenSpec spec;
  spec.pattern = pattern_from_string(cfg.pattern);
  spec.read_fraction = cfg.read_fraction;
  spec.io_pages = cfg.io_pages;
  spec.streams = cfg.streams;
  spec.total_requests = cfg.requests;
  spec.seed = cfg.seed;
  spec.working_set = cfg.working_set ? cfg.working_set : cfg.logical_pages();
  return generate(spec);
}

MetricsReport assemble_report(const SimConfig& cfg, const Ftl& ftl,
                              const RunStats& stats) {
  MetricsReport r;
  r.ftl = cfg.ftl;
  r.seed = cfg.seed;
  r.counters = ftl.nand().counters();
  r.host_requests = stats.requests;
  r.host_page_reads = ftl.host_page_reads();
  r.host_page_writes = ftl.host_page_writes();
  r.single_reads = ftl.single_reads();
  r.double_reads = ftl.double_reads();
  r.triple_reads = ftl.triple_reads();
  r.unmapped_reads = ftl.unmapped_reads();
  uint64_t classified = r.single_reads + r.double_reads + r.triple_reads;
  if (classified > 0) {
    r.single_fraction = double(r.single_reads) / double(classified);
    r.double_fraction = double(r.double_reads) / double(classified);
    r.triple_fraction = double(r.triple_reads) / double(classified);
  }
  r.gc_episodes = ftl.gc_episodes();
  r.erase_ops = r.counters.erase;
  r.write_amplification =
      r.host_page_writes
          ? double(r.counters.total_writes()) / double(r.host_page_writes)
          : 0.0;
  if (!stats.latencies_us.empty()) {
    r.latency_mean_us =
        std::accumulate(stats.latencies_us.begin(), stats.latencies_us.end(),
                        0.0) /
        double(stats.latencies_us.size());
    r.latency_p50_us = percentile(stats.latencies_us, 50.0);
    r.latency_p99_us = percentile(stats.latencies_us, 99.0);
    r.latency_p999_us = percentile(stats.latencies_us, 99.9);
  }
  const OpCostTable& costs = cfg.costs;
  r.energy_read = double(r.counters.total_reads()) * costs.read_energy;
  r.energy_write = double(r.counters.total_writes()) * costs.write_energy;
  r.energy_erase = double(r.counters.erase) * costs.erase_energy;
  r.energy_total = ftl.nand().energy_total();
  r.logical_pages = cfg.logical_pages();
  r.gtd_entries = cfg.gtd_entries();
  ftl.fill_metrics(r);
  r.config_echo = cfg.echo();
  return r;
}

RunOutput run_simulation(const SimConfig& cfg, IoObserver* observer) {
  cfg.validate();
  auto ftl = make_ftl(cfg);
  if (cfg.warmup_multiplier > 0) {
    auto warm = warmup_requests(cfg.logical_pages(), cfg.warmup_multiplier,
                                cfg.warmup_io_pages, cfg.streams, cfg.seed);
    run_workload(warm, *ftl, observer);
    ftl->quiesce(0.0);
    ftl->reset_measurement();
  }
  auto workload = build_workload(cfg);
  RunStats stats = run_workload(workload, *ftl, observer);
  RunOutput out;
  out.report = assemble_report(cfg, *ftl, stats);
  out.report_json = to_json(out.report);
  out.latencies_us = std::move(stats.latencies_us);
  return out;
}

namespace {

void write_outputs(const RunOutput& out, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/report.json", std::ios::binary);
    if (!f) throw ConfigError("cannot write " + out_dir + "/report.json");
    f << out.report_json;
  }
  {
    std::ofstream f(out_dir + "/latency.csv", std::ios::binary);
    if (!f) throw ConfigError("cannot write " + out_dir + "/latency.csv");
    char buf[64];
    for (double v : out.latencies_us) {
      int n = std::snprintf(buf, sizeof buf, "%.3f\n", v);
      f.write(buf, n);
    }
  }
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    out.push_back((std::isalnum(uint8_t(c)) || c == '.' || c == '-') ? c : '_');
  }
  return out;
}

}  // namespace

int run_command(const SimConfig& cfg, const std::string& out_dir) {
  try {
    RunOutput out = run_simulation(cfg);
    write_outputs(out, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "ftlbench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int sweep_command(const SimConfig& base, const std::string& axis_key,
                  const std::vector<std::string>& axis_values,
                  const std::string& out_dir, unsigned threads) {
  if (axis_values.empty()) {
    std::cerr << "ftlbench: sweep axis has no values\n";
    return 1;
  }
  {
    // Reject unknown axis keys up front.
    SimConfig probe = base;
    probe.set_key(axis_key, axis_values[0]);
  }
  struct Cell {
    std::string value;
    bool ok = false;
    std::string error;
    MetricsReport report;
  };
  std::vector<Cell> cells(axis_values.size());
  for (size_t i = 0; i < axis_values.size(); i++) {
    cells[i].value = axis_values[i];
  }

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      Cell& cell = cells[i];
      try {
        SimConfig cfg = base;
        cfg.set_key(axis_key, cell.value);
        RunOutput out = run_simulation(cfg);
        write_outputs(out, out_dir + "/" + sanitize(axis_key) + "=" +
                               sanitize(cell.value));
        cell.report = std::move(out.report);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(threads, cells.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < n; i++) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::filesystem::create_directories(out_dir);
  std::ofstream f(out_dir + "/summary.csv", std::ios::binary);
  f << axis_key
    << ",status,single_fraction,double_fraction,triple_fraction,"
       "cmt_hit_ratio,model_hit_ratio,write_amplification,gc_episodes,"
       "latency_mean_us,latency_p99_us,latency_p999_us,energy_total\n";
  bool all_ok = true;
  for (const Cell& c : cells) {
    if (!c.ok) {
      all_ok = false;
      f << c.value << ",error,,,,,,,,,,,\n";
      std::cerr << "ftlbench: sweep cell " << axis_key << "=" << c.value
                << " failed: " << c.error << "\n";
      continue;
    }
    const MetricsReport& r = c.report;
    char line[512];
    std::snprintf(line, sizeof line,
                  "%s,ok,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%llu,%.3f,%.3f,%.3f,"
                  "%.3f\n",
                  c.value.c_str(), r.single_fraction, r.double_fraction,
                  r.triple_fraction, r.cmt_hit_ratio, r.model_hit_ratio,
                  r.write_amplification,
                  (unsigned long long)r.gc_episodes, r.latency_mean_us,
                  r.latency_p99_us, r.latency_p999_us, r.energy_total);
    f << line;
  }
  return all_ok ? 0 : 1;
}

}  // namespace ftlbench
