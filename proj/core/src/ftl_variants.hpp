#pragma once

// Internal: the five FTL implementations behind make_ftl().

#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ftlbench/alloc_gc.hpp"
#include "ftlbench/ftl.hpp"
#include "ftlbench/mapping.hpp"

namespace ftlbench {

// Full in-memory page table; the cost lower bound. No translation pages
// exist at all, so every mapped read is a single flash read.
class IdealFtl final : public Ftl {
 public:
  explicit IdealFtl(const SimConfig& cfg);
  FtlKind kind() const override { return FtlKind::Ideal; }
  void fill_metrics(MetricsReport& r) const override;

 protected:
  PageRead read_one(uint64_t lpn, uint32_t remaining, double t) override;
  double write_pages(uint64_t lpn, uint32_t npages, uint64_t token0,
                     double t) override;
  void reset_variant_stats() override;

 private:
  double ensure_space(double t);
  double gc_once(double t);

  std::vector<std::optional<uint64_t>> map_;
  DynamicAllocator alloc_;
  uint64_t lookups_ = 0;
  uint64_t hits_ = 0;
};

// DFTL and TPFTL share the demand-based path; TPFTL adds request-length
// prefetch on CMT misses.
class DemandFtl : public Ftl, private TranslationIo {
 public:
  DemandFtl(const SimConfig& cfg, bool prefetch);
  FtlKind kind() const override {
    return prefetch_ ? FtlKind::Tpftl : FtlKind::Dftl;
  }
  void fill_metrics(MetricsReport& r) const override;

  DemandMap& map() { return map_; }

 protected:
  PageRead read_one(uint64_t lpn, uint32_t remaining, double t) override;
  double write_pages(uint64_t lpn, uint32_t npages, uint64_t token0,
                     double t) override;
  void reset_variant_stats() override;

  // TranslationIo
  double read_translation(uint32_t entry, double t) override;
  double write_translation(uint32_t entry, double t) override;

 private:
  class Hooks;
  double ensure_space(double t);
  double gc_once(double t);

  bool prefetch_;
  DemandMap map_;
  DynamicAllocator alloc_;
};

// Cost-faithful LeaFTL baseline: log-structured learned segments per
// translation page, a model cache with the same byte budget as a 3% CMT,
// a 2048-page sorted write buffer, and OOB error intervals. Mispredictions
// cost the extra flash read the real design pays; the returned data is
// always correct.
class LeaFtl final : public Ftl {
 public:
  explicit LeaFtl(const SimConfig& cfg);
  FtlKind kind() const override { return FtlKind::LeaFtlSim; }
  void fill_metrics(MetricsReport& r) const override;
  void quiesce(double t) override;

  struct Segment {
    uint32_t start_lpn = 0;   // S
    double slope = 0.0;       // K
    uint16_t length = 0;      // L: covers [S, S+L] inclusive
    double intercept = 0.0;   // I, anchored: vppn ~= K*(lpn-S) + I
    bool approximate = false;
    int32_t max_err = 0;
  };
  // Levels of the log-structured mapping table for one translation page.
  using Lsmt = std::vector<std::vector<Segment>>;

  size_t cache_segment_budget() const { return cache_budget_; }
  size_t resident_segments() const { return resident_segments_; }
  const Lsmt& lsmt(uint32_t entry) const { return lsmt_[entry]; }

 protected:
  PageRead read_one(uint64_t lpn, uint32_t remaining, double t) override;
  double write_pages(uint64_t lpn, uint32_t npages, uint64_t token0,
                     double t) override;
  void reset_variant_stats() override;

 private:
  class Hooks;
  double flush_buffer(double t);
  double ensure_space(double t);
  double gc_once(double t);
  double flush_segments(uint32_t entry, std::vector<Segment> segs, double t);
  void insert_level(uint32_t entry, size_t level, Segment seg);
  const Segment* lookup_segment(uint32_t entry, uint64_t lpn) const;
  bool cache_resident(uint32_t entry);  // refreshes recency
  void cache_admit(uint32_t entry);
  std::vector<Segment> train_batch(
      const std::vector<std::pair<uint64_t, uint64_t>>& lpn_vppn) const;

  std::vector<std::optional<uint64_t>> truth_;  // lpn -> ppn
  std::map<uint64_t, uint64_t> buffer_;         // pending writes: lpn -> token
  std::vector<Lsmt> lsmt_;
  std::vector<std::optional<Ppn>> entry_page_;  // translation page per entry
  DynamicAllocator alloc_;

  std::list<uint32_t> cache_lru_;  // front = most recent entry id
  std::unordered_map<uint32_t, std::list<uint32_t>::iterator> cache_index_;
  size_t cache_budget_;
  size_t resident_segments_ = 0;

  uint64_t cache_lookups_ = 0;
  uint64_t cache_hits_ = 0;  // buffer hits + resident-model hits
  uint64_t model_hits_ = 0;  // resident and prediction exact
};

// LearnedFTL: demand-based mapping plus per-entry in-place-update linear
// models gated by bitmap filters, group-based allocation, and GC-time
// training.
class LearnedFtl final : public Ftl,
                         private TranslationIo,
                         private TranslationSlotAllocator {
 public:
  explicit LearnedFtl(const SimConfig& cfg);
  FtlKind kind() const override { return FtlKind::LearnedFtl; }
  void fill_metrics(MetricsReport& r) const override;
  std::string dump_models() const override;

  DemandMap& map() { return map_; }
  GroupAllocator& allocator() { return galloc_; }
  const GroupAllocator& allocator() const { return galloc_; }
  uint64_t max_translation_writes_per_gc() const { return max_tr_writes_gc_; }
  uint32_t group_of_lpn(uint64_t lpn) const {
    return uint32_t(lpn / (uint64_t(galloc_.config().entries_per_group) *
                           kEntrySlots));
  }

 protected:
  PageRead read_one(uint64_t lpn, uint32_t remaining, double t) override;
  double write_pages(uint64_t lpn, uint32_t npages, uint64_t token0,
                     double t) override;
  void reset_variant_stats() override;

  // TranslationIo
  double read_translation(uint32_t entry, double t) override;
  double write_translation(uint32_t entry, double t) override;
  // TranslationSlotAllocator: a page in the metadata run, collecting it
  // first when it is close to full.
  Vppn translation_slot(double& t) override;

 private:
  struct Alloc {
    Vppn vppn;
    uint32_t owner_group;  // run owner (differs from the LPN's group when
                           // the page was borrowed)
  };
  Alloc allocate_page(uint32_t group, double& t);
  double run_gc(uint32_t victim, double t);
  double gc_pressure_check(uint32_t just_written_group, double t);
  double collect_meta_run(double t);
  void invalidate_data(uint64_t lpn, uint64_t old_ppn);

  DemandMap map_;
  GroupAllocator galloc_;
  std::vector<uint32_t> pending_gc_;  // encroachment-triggered, deferred
                                      // until the borrowing write lands
  uint64_t cmt_misses_ = 0;
  uint64_t model_hits_ = 0;
  uint64_t max_tr_writes_gc_ = 0;
};

}  // namespace ftlbench
