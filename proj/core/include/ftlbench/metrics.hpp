#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ftlbench/nand.hpp"

namespace ftlbench {

struct MetricsReport {
  std::string ftl;
  uint64_t seed = 0;

  FlashCounters counters;
  uint64_t host_requests = 0;
  uint64_t host_page_reads = 0;
  uint64_t host_page_writes = 0;

  // Per-page read classification (unmapped reads are counted separately
  // and excluded from the fractions).
  uint64_t single_reads = 0;
  uint64_t double_reads = 0;
  uint64_t triple_reads = 0;
  uint64_t unmapped_reads = 0;
  double single_fraction = 0.0;
  double double_fraction = 0.0;
  double triple_fraction = 0.0;

  uint64_t cmt_lookups = 0;
  uint64_t cmt_hits = 0;
  double cmt_hit_ratio = 0.0;
  uint64_t model_hits = 0;
  double model_hit_ratio = 0.0;

  uint64_t gc_episodes = 0;
  uint64_t max_translation_writes_per_gc = 0;
  double write_amplification = 0.0;
  uint64_t erase_ops = 0;

  double latency_mean_us = 0.0;
  double latency_p50_us = 0.0;
  double latency_p99_us = 0.0;
  double latency_p999_us = 0.0;

  double energy_total = 0.0;
  double energy_read = 0.0;
  double energy_write = 0.0;
  double energy_erase = 0.0;

  uint64_t model_memory_bytes = 0;
  uint64_t cmt_capacity_entries = 0;
  uint64_t logical_pages = 0;
  uint32_t gtd_entries = 0;

  std::map<std::string, std::string> config_echo;
};

// Deterministic JSON rendering (sorted keys, two-space indent); identical
// runs produce byte-identical output.
std::string to_json(const MetricsReport& r);

}  // namespace ftlbench
