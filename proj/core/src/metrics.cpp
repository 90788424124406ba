#include "ftlbench/metrics.hpp"

#include "json.hpp"

namespace ftlbench {

std::string to_json(const MetricsReport& r) {
  nlohmann::json j;  // std::map storage keeps keys sorted
  j["ftl"] = r.ftl;
  j["seed"] = r.seed;

  nlohmann::json c;
  c["data_read"] = r.counters.data_read;
  c["translation_read"] = r.counters.translation_read;
  c["data_write"] = r.counters.data_write;
  c["translation_write"] = r.counters.translation_write;
  c["gc_read"] = r.counters.gc_read;
  c["gc_write"] = r.counters.gc_write;
  c["erase"] = r.counters.erase;
  j["flash_ops"] = c;

  j["host"]["requests"] = r.host_requests;
  j["host"]["page_reads"] = r.host_page_reads;
  j["host"]["page_writes"] = r.host_page_writes;

  j["reads"]["single"] = r.single_reads;
  j["reads"]["double"] = r.double_reads;
  j["reads"]["triple"] = r.triple_reads;
  j["reads"]["unmapped"] = r.unmapped_reads;
  j["reads"]["single_fraction"] = r.single_fraction;
  j["reads"]["double_fraction"] = r.double_fraction;
  j["reads"]["triple_fraction"] = r.triple_fraction;

  j["cache"]["cmt_lookups"] = r.cmt_lookups;
  j["cache"]["cmt_hits"] = r.cmt_hits;
  j["cache"]["cmt_hit_ratio"] = r.cmt_hit_ratio;
  j["cache"]["model_hits"] = r.model_hits;
  j["cache"]["model_hit_ratio"] = r.model_hit_ratio;

  j["gc"]["episodes"] = r.gc_episodes;
  j["gc"]["max_translation_writes_per_episode"] = r.max_translation_writes_per_gc;
  j["gc"]["write_amplification"] = r.write_amplification;
  j["gc"]["erase_ops"] = r.erase_ops;

  j["latency_us"]["mean"] = r.latency_mean_us;
  j["latency_us"]["p50"] = r.latency_p50_us;
  j["latency_us"]["p99"] = r.latency_p99_us;
  j["latency_us"]["p999"] = r.latency_p999_us;

  j["energy"]["total"] = r.energy_total;
  j["energy"]["read"] = r.energy_read;
  j["energy"]["write"] = r.energy_write;
  j["energy"]["erase"] = r.energy_erase;

  j["memory"]["model_bytes"] = r.model_memory_bytes;
  j["memory"]["cmt_capacity_entries"] = r.cmt_capacity_entries;
  j["memory"]["logical_pages"] = r.logical_pages;
  j["memory"]["gtd_entries"] = r.gtd_entries;

  j["config"] = r.config_echo;
  return j.dump(2) + "\n";
}

}  // namespace ftlbench
