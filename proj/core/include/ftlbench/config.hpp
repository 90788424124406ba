#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ftlbench/geometry.hpp"
#include "ftlbench/nand.hpp"

namespace ftlbench {

// Full simulator configuration. Parsed from flat `key = value` text (dots
// section the keys) or an equivalent JSON object; unknown keys are
// rejected. Every field echoes back into the report for reproducibility.
struct SimConfig {
  FlashGeometry geometry;
  std::string ftl = "learnedftl";
  double op_fraction = 1.0 / 16.0;
  OpCostTable costs;

  // Host-side compute surcharges (microseconds).
  double bitmap_check_us = 0.0;
  double model_predict_us = 0.65;
  double sort_train_us = 50.0;  // per GTD entry sorted+trained during GC

  double cmt_fraction = -1.0;  // <0: per-variant default (0.03 / 0.015)
  int prefetch = -1;           // <0: per-variant default

  uint32_t max_pieces = 8;
  double epsilon = 0.5;

  double leaftl_error_bound = 4.0;
  uint32_t leaftl_buffer_pages = 2048;
  double leaftl_cache_fraction = 0.03;

  uint32_t entries_per_group = 0;  // 0: derived from geometry
  uint32_t t_blocks_runs = 4;
  uint64_t t_encroach_pages = 0;  // 0: one run's worth of pages
  double cold_popcount_fraction = 0.25;
  uint32_t gc_free_watermark = 2;
  bool gc_blocks_all_chips = false;
  uint32_t dynamic_reserve_blocks = 4;

  // Workload.
  std::string workload = "generate";  // generate | trace
  std::string pattern = "randread";   // seqread|randread|seqwrite|randwrite|mixed
  double read_fraction = 0.5;
  uint32_t io_pages = 1;
  uint32_t streams = 64;
  uint64_t requests = 100000;
  uint64_t working_set = 0;  // pages; 0 = whole logical space
  std::string trace_path;
  uint64_t scale_num = 1;
  uint64_t scale_den = 1;

  uint32_t warmup_multiplier = 0;  // capacity multiples written; 0 = off
  uint32_t warmup_io_pages = 128;

  uint64_t seed = 42;

  // ---- derived quantities ----
  // Host-visible pages: total minus over-provisioning, whole GTD entries.
  uint64_t logical_pages() const;
  // Directory entries span the raw device (512 mappings each).
  uint32_t gtd_entries() const;
  uint64_t cmt_capacity() const;
  double effective_cmt_fraction() const;
  bool effective_prefetch() const;
  uint64_t leaftl_cache_segments() const;
  // Group span: paper-scale default shrunk to fit small geometries, bumped
  // so a group's span is a whole number of slabs.
  uint32_t effective_entries_per_group() const;
  uint64_t effective_t_encroach_pages() const;

  void validate() const;

  static SimConfig from_file(const std::string& path);
  static SimConfig from_text(const std::string& text);
  static SimConfig from_json_text(const std::string& text);

  // Typed assignment; throws ConfigError on unknown key or bad value.
  void set_key(const std::string& key, const std::string& value);

  // Every effective key, defaults included, sorted.
  std::map<std::string, std::string> echo() const;
};

}  // namespace ftlbench
