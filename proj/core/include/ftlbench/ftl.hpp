#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "ftlbench/config.hpp"
#include "ftlbench/engine.hpp"
#include "ftlbench/metrics.hpp"
#include "ftlbench/nand.hpp"

namespace ftlbench {

enum class FtlKind : uint8_t { Ideal, Dftl, Tpftl, LeaFtlSim, LearnedFtl };

FtlKind ftl_kind_from_string(const std::string& name);
std::string to_string(FtlKind kind);

// Flash-read cost class of one host page read.
enum class ReadClass : uint8_t { Single, Double, Triple };
enum class HitSource : uint8_t { Cmt, Model, ModelCache, None };

// The pluggable FTL contract. Variants differ only in cost, never in
// answers: every read of a written LPN returns the latest token.
class Ftl {
 public:
  explicit Ftl(const SimConfig& cfg);
  virtual ~Ftl() = default;

  virtual FtlKind kind() const = 0;

  // Serve one request starting at time t; returns completion time.
  double serve_read(uint64_t lpn, uint32_t npages, double t, IoObserver* obs);
  double serve_write(uint64_t lpn, uint32_t npages, double t, IoObserver* obs);

  // Flush any volatile buffers (LeaFTL's data buffer) before a measurement
  // boundary or at end of run.
  virtual void quiesce(double t) { (void)t; }

  // Measurement boundary: zero every counter and idle the chip timelines;
  // device state (page contents, erase counts, caches, models) persists.
  void reset_measurement();

  NandArray& nand() { return nand_; }
  const NandArray& nand() const { return nand_; }
  ChipTimelines& chips() { return chips_; }
  const FlashGeometry& geometry() const { return geom_; }
  const SimConfig& config() const { return cfg_; }
  uint64_t logical_pages() const { return logical_pages_; }

  uint64_t gc_episodes() const { return gc_episodes_; }
  uint64_t single_reads() const { return single_reads_; }
  uint64_t double_reads() const { return double_reads_; }
  uint64_t triple_reads() const { return triple_reads_; }
  uint64_t unmapped_reads() const { return unmapped_reads_; }
  uint64_t host_page_reads() const { return host_page_reads_; }
  uint64_t host_page_writes() const { return host_page_writes_; }

  // Variant-specific report fields (hit ratios, model memory).
  virtual void fill_metrics(MetricsReport& r) const = 0;

  // Debug dump of per-entry models (LearnedFTL) as JSON text; "{}" for
  // variants without models.
  virtual std::string dump_models() const { return "{}"; }

 protected:
  struct PageRead {
    double completion = 0.0;
    uint64_t token = 0;
    bool mapped = false;
    ReadClass cls = ReadClass::Single;
    HitSource src = HitSource::None;
  };
  virtual PageRead read_one(uint64_t lpn, uint32_t remaining_in_request,
                            double t) = 0;
  // Writes npages starting at lpn; tokens are token0, token0+1, ...
  virtual double write_pages(uint64_t lpn, uint32_t npages, uint64_t token0,
                             double t) = 0;
  virtual void reset_variant_stats() {}

  void count_gc() { gc_episodes_++; }

  SimConfig cfg_;
  FlashGeometry geom_;
  uint64_t logical_pages_;
  uint64_t translation_lpn_base_;  // OOB sentinel for translation pages
  NandArray nand_;
  ChipTimelines chips_;

  uint64_t token_counter_ = 0;
  uint64_t gc_episodes_ = 0;
  uint64_t single_reads_ = 0;
  uint64_t double_reads_ = 0;
  uint64_t triple_reads_ = 0;
  uint64_t unmapped_reads_ = 0;
  uint64_t host_page_reads_ = 0;
  uint64_t host_page_writes_ = 0;
};

std::unique_ptr<Ftl> make_ftl(const SimConfig& cfg);

}  // namespace ftlbench
