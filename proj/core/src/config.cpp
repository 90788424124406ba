#include "ftlbench/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ftlbench/errors.hpp"
#include "ftlbench/learned.hpp"
#include "json.hpp"

namespace ftlbench {

uint64_t SimConfig::logical_pages() const {
  auto usable = uint64_t(double(geometry.total_pages()) * (1.0 - op_fraction));
  // Part of the over-provisioned space is held back for FTL metadata
  // (translation pages) and GC write-back headroom: two group spans,
  // capped so small devices keep most of their capacity. The same value
  // applies to every variant so comparisons stay fair.
  uint64_t held = 2 * uint64_t(effective_entries_per_group()) * kEntrySlots;
  held = std::min(held, usable / 4);
  return usable - held;
}

uint32_t SimConfig::gtd_entries() const {
  return uint32_t((geometry.total_pages() + kEntrySlots - 1) / kEntrySlots);
}

double SimConfig::effective_cmt_fraction() const {
  if (cmt_fraction >= 0.0) return cmt_fraction;
  return ftl == "learnedftl" ? 0.015 : 0.03;
}

uint64_t SimConfig::cmt_capacity() const {
  auto cap = uint64_t(effective_cmt_fraction() * double(logical_pages()));
  return std::max<uint64_t>(cap, 1);
}

bool SimConfig::effective_prefetch() const {
  if (prefetch >= 0) return prefetch != 0;
  return ftl == "tpftl" || ftl == "learnedftl";
}

uint64_t SimConfig::leaftl_cache_segments() const {
  auto cap = uint64_t(leaftl_cache_fraction * double(logical_pages()));
  return std::max<uint64_t>(cap, 1);
}

uint32_t SimConfig::effective_entries_per_group() const {
  // Group span must be a whole number of slabs so that a run is a
  // VPPN-contiguous band; the paper-scale value of 64 entries shrinks on
  // small geometries.
  uint64_t slab = geometry.slab_pages();
  uint64_t unit = std::lcm<uint64_t>(slab, kEntrySlots) / kEntrySlots;
  uint64_t target = entries_per_group;
  if (target == 0) {
    target = std::clamp<uint64_t>(gtd_entries() / 16, 1, 64);
  }
  uint64_t epg = std::max<uint64_t>(unit, (target / unit) * unit);
  return uint32_t(epg);
}

uint64_t SimConfig::effective_t_encroach_pages() const {
  if (t_encroach_pages != 0) return t_encroach_pages;
  return uint64_t(effective_entries_per_group()) * kEntrySlots;
}

void SimConfig::validate() const {
  geometry.validate();
  if (op_fraction < 0.0 || op_fraction >= 1.0) {
    throw ConfigError("op_fraction must be in [0, 1)");
  }
  if (logical_pages() < kEntrySlots) {
    throw ConfigError("device too small: no logical capacity left");
  }
  if (costs.read_us < 0 || costs.write_us < 0 || costs.erase_us < 0 ||
      costs.read_energy < 0 || costs.write_energy < 0 ||
      costs.erase_energy < 0) {
    throw ConfigError("costs must be non-negative");
  }
  if (max_pieces == 0) throw ConfigError("model.max_pieces must be >= 1");
  if (epsilon < 0) throw ConfigError("model.epsilon must be >= 0");
  if (t_blocks_runs == 0) throw ConfigError("group.t_blocks_runs must be >= 1");
  if (effective_cmt_fraction() <= 0.0 || effective_cmt_fraction() > 1.0) {
    throw ConfigError("cmt.fraction must be in (0, 1]");
  }
  if (ftl != "ideal" && ftl != "dftl" && ftl != "tpftl" && ftl != "leaftl" &&
      ftl != "learnedftl") {
    throw ConfigError("unknown ftl kind: " + ftl);
  }
  if (workload != "generate" && workload != "trace") {
    throw ConfigError("workload must be 'generate' or 'trace'");
  }
  if (workload == "trace" && trace_path.empty()) {
    throw ConfigError("workload.trace requires workload.trace_path");
  }
  if (workload == "generate") {
    if (io_pages == 0 || streams == 0) {
      throw ConfigError("workload.io_pages and workload.streams must be >= 1");
    }
    uint64_t ws = working_set ? working_set : logical_pages();
    if (ws > logical_pages()) {
      throw ConfigError("workload.working_set exceeds logical capacity");
    }
    if (ws < io_pages) {
      throw ConfigError("workload.working_set smaller than one request");
    }
  }
}

namespace {

uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    uint64_t r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + key + ": '" + v + "'");
  }
}

double to_f64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

void SimConfig::set_key(const std::string& key, const std::string& value) {
  if (key == "geometry.channels") geometry.channels = uint32_t(to_u64(key, value));
  else if (key == "geometry.ways") geometry.ways = uint32_t(to_u64(key, value));
  else if (key == "geometry.planes") geometry.planes = uint32_t(to_u64(key, value));
  else if (key == "geometry.blocks") geometry.blocks = uint32_t(to_u64(key, value));
  else if (key == "geometry.pages") geometry.pages = uint32_t(to_u64(key, value));
  else if (key == "geometry.page_size") geometry.page_size = uint32_t(to_u64(key, value));
  else if (key == "ftl") ftl = value;
  else if (key == "op_fraction") op_fraction = to_f64(key, value);
  else if (key == "cost.read_us") costs.read_us = to_f64(key, value);
  else if (key == "cost.write_us") costs.write_us = to_f64(key, value);
  else if (key == "cost.erase_us") costs.erase_us = to_f64(key, value);
  else if (key == "cost.read_energy") costs.read_energy = to_f64(key, value);
  else if (key == "cost.write_energy") costs.write_energy = to_f64(key, value);
  else if (key == "cost.erase_energy") costs.erase_energy = to_f64(key, value);
  else if (key == "compute.bitmap_check_us") bitmap_check_us = to_f64(key, value);
  else if (key == "compute.model_predict_us") model_predict_us = to_f64(key, value);
  else if (key == "compute.sort_train_us") sort_train_us = to_f64(key, value);
  else if (key == "cmt.fraction") cmt_fraction = to_f64(key, value);
  else if (key == "cmt.prefetch") prefetch = to_bool(key, value) ? 1 : 0;
  else if (key == "model.max_pieces") max_pieces = uint32_t(to_u64(key, value));
  else if (key == "model.epsilon") epsilon = to_f64(key, value);
  else if (key == "leaftl.error_bound") leaftl_error_bound = to_f64(key, value);
  else if (key == "leaftl.buffer_pages") leaftl_buffer_pages = uint32_t(to_u64(key, value));
  else if (key == "leaftl.cache_fraction") leaftl_cache_fraction = to_f64(key, value);
  else if (key == "group.entries_per_group") entries_per_group = uint32_t(to_u64(key, value));
  else if (key == "group.t_blocks_runs") t_blocks_runs = uint32_t(to_u64(key, value));
  else if (key == "group.t_encroach_pages") t_encroach_pages = to_u64(key, value);
  else if (key == "group.cold_popcount_fraction") cold_popcount_fraction = to_f64(key, value);
  else if (key == "gc.free_watermark") gc_free_watermark = uint32_t(to_u64(key, value));
  else if (key == "gc.blocks_all_chips") gc_blocks_all_chips = to_bool(key, value);
  else if (key == "gc.dynamic_reserve_blocks") dynamic_reserve_blocks = uint32_t(to_u64(key, value));
  else if (key == "workload.kind") workload = value;
  else if (key == "workload.pattern") pattern = value;
  else if (key == "workload.read_fraction") read_fraction = to_f64(key, value);
  else if (key == "workload.io_pages") io_pages = uint32_t(to_u64(key, value));
  else if (key == "workload.streams") streams = uint32_t(to_u64(key, value));
  else if (key == "workload.requests") requests = to_u64(key, value);
  else if (key == "workload.working_set") working_set = to_u64(key, value);
  else if (key == "workload.trace_path") trace_path = value;
  else if (key == "workload.scale_num") scale_num = to_u64(key, value);
  else if (key == "workload.scale_den") scale_den = to_u64(key, value);
  else if (key == "warmup.multiplier") warmup_multiplier = uint32_t(to_u64(key, value));
  else if (key == "warmup.io_pages") warmup_io_pages = uint32_t(to_u64(key, value));
  else if (key == "seed") seed = to_u64(key, value);
  else throw ConfigError("unknown config key: " + key);
}

SimConfig SimConfig::from_text(const std::string& text) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    cfg.set_key(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

namespace {

void flatten_json(const nlohmann::json& j, const std::string& prefix,
                  SimConfig& cfg) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const auto& v = it.value();
    if (v.is_object()) {
      flatten_json(v, key, cfg);
    } else if (v.is_string()) {
      cfg.set_key(key, v.get<std::string>());
    } else if (v.is_boolean()) {
      cfg.set_key(key, v.get<bool>() ? "true" : "false");
    } else if (v.is_number_unsigned() || v.is_number_integer()) {
      cfg.set_key(key, std::to_string(v.get<int64_t>()));
    } else if (v.is_number_float()) {
      std::ostringstream os;
      os.precision(17);
      os << v.get<double>();
      cfg.set_key(key, os.str());
    } else {
      throw ConfigError("unsupported JSON value for key " + key);
    }
  }
}

}  // namespace

SimConfig SimConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad JSON config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("JSON config must be an object");
  SimConfig cfg;
  flatten_json(j, "", cfg);
  return cfg;
}

SimConfig SimConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    return from_json_text(text);
  }
  return from_text(text);
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::map<std::string, std::string> SimConfig::echo() const {
  std::map<std::string, std::string> m;
  m["geometry.channels"] = std::to_string(geometry.channels);
  m["geometry.ways"] = std::to_string(geometry.ways);
  m["geometry.planes"] = std::to_string(geometry.planes);
  m["geometry.blocks"] = std::to_string(geometry.blocks);
  m["geometry.pages"] = std::to_string(geometry.pages);
  m["geometry.page_size"] = std::to_string(geometry.page_size);
  m["ftl"] = ftl;
  m["op_fraction"] = fmt(op_fraction);
  m["cost.read_us"] = fmt(costs.read_us);
  m["cost.write_us"] = fmt(costs.write_us);
  m["cost.erase_us"] = fmt(costs.erase_us);
  m["cost.read_energy"] = fmt(costs.read_energy);
  m["cost.write_energy"] = fmt(costs.write_energy);
  m["cost.erase_energy"] = fmt(costs.erase_energy);
  m["compute.bitmap_check_us"] = fmt(bitmap_check_us);
  m["compute.model_predict_us"] = fmt(model_predict_us);
  m["compute.sort_train_us"] = fmt(sort_train_us);
  m["cmt.fraction"] = fmt(effective_cmt_fraction());
  m["cmt.prefetch"] = effective_prefetch() ? "true" : "false";
  m["model.max_pieces"] = std::to_string(max_pieces);
  m["model.epsilon"] = fmt(epsilon);
  m["leaftl.error_bound"] = fmt(leaftl_error_bound);
  m["leaftl.buffer_pages"] = std::to_string(leaftl_buffer_pages);
  m["leaftl.cache_fraction"] = fmt(leaftl_cache_fraction);
  m["group.entries_per_group"] = std::to_string(effective_entries_per_group());
  m["group.t_blocks_runs"] = std::to_string(t_blocks_runs);
  m["group.t_encroach_pages"] = std::to_string(effective_t_encroach_pages());
  m["group.cold_popcount_fraction"] = fmt(cold_popcount_fraction);
  m["gc.free_watermark"] = std::to_string(gc_free_watermark);
  m["gc.blocks_all_chips"] = gc_blocks_all_chips ? "true" : "false";
  m["gc.dynamic_reserve_blocks"] = std::to_string(dynamic_reserve_blocks);
  m["workload.kind"] = workload;
  m["workload.pattern"] = pattern;
  m["workload.read_fraction"] = fmt(read_fraction);
  m["workload.io_pages"] = std::to_string(io_pages);
  m["workload.streams"] = std::to_string(streams);
  m["workload.requests"] = std::to_string(requests);
  m["workload.working_set"] = std::to_string(working_set);
  m["workload.trace_path"] = trace_path;
  m["workload.scale_num"] = std::to_string(scale_num);
  m["workload.scale_den"] = std::to_string(scale_den);
  m["warmup.multiplier"] = std::to_string(warmup_multiplier);
  m["warmup.io_pages"] = std::to_string(warmup_io_pages);
  m["seed"] = std::to_string(seed);
  m["derived.logical_pages"] = std::to_string(logical_pages());
  m["derived.gtd_entries"] = std::to_string(gtd_entries());
  m["derived.cmt_capacity"] = std::to_string(cmt_capacity());
  return m;
}

}  // namespace ftlbench
