#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "ftlbench/engine.hpp"
#include "ftlbench/mapping.hpp"
#include "ftlbench/nand.hpp"

namespace ftlbench {

// Group allocation parameters. A "run" is a VPPN-contiguous band of whole
// slabs (one slab = one block index across every chip and plane), sized so
// that one run holds exactly the group's LPN span. That equality is what
// makes GC write-back produce consecutive VPPNs per entry.
struct GroupConfig {
  uint32_t entries_per_group = 64;
  uint64_t run_pages = 0;   // = entries_per_group * kEntrySlots
  uint32_t run_slabs = 0;   // run_pages / slab_pages
  uint32_t t_blocks_runs = 4;         // cumulative-allocation GC threshold
  uint64_t t_encroach_pages = 0;      // cross-group GC threshold (0 = run_pages)
  double cold_popcount_fraction = 0.25;
  uint32_t free_watermark_runs = 2;
};

struct GroupState {
  uint32_t id = 0;
  std::vector<uint32_t> runs;  // owned runs, acquisition order
  int64_t cur_run = -1;        // run currently being filled
  uint64_t cur_off = 0;        // next page offset within cur_run
  uint64_t cumulative_blocks = 0;  // blocks acquired since last GC
  uint64_t borrowed_pages = 0;  // live pages this group placed in others' runs
  uint64_t lent_pages = 0;      // live foreign pages inside this group's runs
  uint64_t gc_count = 0;
  uint64_t writes_since_gc = 0;
  double last_gc_us = -1.0;
};

// Page allocation for LearnedFTL: each GTD entry group fills contiguous
// runs in VPPN order, so consecutive allocations return consecutive VPPNs.
class GroupAllocator {
 public:
  GroupAllocator(const FlashGeometry& geom, const GroupConfig& cfg,
                 uint32_t group_count);

  const GroupConfig& config() const { return cfg_; }
  uint32_t group_count() const { return uint32_t(groups_.size()); }
  GroupState& group(uint32_t g) { return groups_[g]; }
  const GroupState& group(uint32_t g) const { return groups_[g]; }

  uint32_t total_runs() const { return total_runs_; }
  uint32_t free_run_count() const { return uint32_t(free_runs_.size()); }
  int32_t run_owner(uint32_t run) const { return run_owner_[run]; }

  // Next page of the group's current run; nullopt when the run is
  // exhausted (callers then acquire a run, borrow, or collect garbage).
  std::optional<Vppn> allocate_in_current(uint32_t g);
  // Acquires the lowest-numbered free run. keep_reserve holds one run back
  // for GC write-back.
  bool acquire_run(uint32_t g, bool keep_reserve);
  // Returns an erased run to the free pool and detaches it from its owner.
  void release_run(uint32_t run);
  // Detach all runs from a group (GC write-back path keeps them aside).
  std::vector<uint32_t> detach_runs(uint32_t g);

  uint64_t free_pages_of(uint32_t g) const;
  uint64_t valid_pages_of(uint32_t g, const NandArray& nand) const;
  uint64_t invalid_pages_of(uint32_t g, const NandArray& nand) const;

  // Group with the most invalid data pages; ties go to the lowest id.
  // nullopt when no group has any invalid page.
  std::optional<uint32_t> select_victim(const NandArray& nand) const;

  // Cold target for cross-group allocation: untrained (bitmap population
  // below the coldness bound) with more than min_free_pages free (default:
  // half a run). Returns the eligible group with the most free pages
  // (ties: lowest id). With require_untrained false, only the free-page
  // condition applies; GC escalation further drops the free-page bar to a
  // single page rather than declare the device full.
  std::optional<uint32_t> coldest_eligible(uint32_t hot,
                                           const std::vector<GtdEntry>& gtd,
                                           bool require_untrained,
                                           uint64_t min_free_pages) const;

  // Double-entry encroachment bookkeeping.
  void note_borrow(uint32_t hot, uint32_t cold);
  void note_foreign_invalidated(uint32_t owner_group, uint32_t lpn_group);

  // Device-wide metadata run: translation pages for every group live here,
  // so data runs stay pure and one run always holds exactly a group span.
  std::optional<Vppn> allocate_meta();
  bool acquire_meta_run();  // may take the last free run; collection of the
                            // old metadata run always gives one back
  int64_t meta_run() const { return meta_run_; }
  uint64_t meta_remaining() const {
    return meta_run_ < 0 ? 0 : cfg_.run_pages - meta_off_;
  }

  uint64_t vppn_range_begin(uint32_t run) const {
    return uint64_t(run) * cfg_.run_pages;
  }
  uint32_t run_of_vppn(Vppn v) const {
    return uint32_t(v.value / cfg_.run_pages);
  }
  // Global NAND block ids making up a run, ascending.
  std::vector<uint64_t> run_blocks(uint32_t run) const;

 private:
  FlashGeometry geom_;
  GroupConfig cfg_;
  uint32_t total_runs_;
  std::vector<GroupState> groups_;
  std::set<uint32_t> free_runs_;
  std::vector<int32_t> run_owner_;  // -1 free, -2 metadata, else group id
  int64_t meta_run_ = -1;
  uint64_t meta_off_ = 0;
};

// Sink for translation-page writes during group GC (the FTL routes them
// into the metadata run and collects it when it fills).
class TranslationSlotAllocator {
 public:
  virtual ~TranslationSlotAllocator() = default;
  virtual Vppn translation_slot(double& t) = 0;
};

// Everything gc_group needs from the FTL.
struct GroupGcContext {
  NandArray& nand;
  DemandMap& map;
  ChipTimelines& chips;
  const FlashGeometry& geom;
  TranslationSlotAllocator& meta;
  double sort_train_us = 50.0;  // host compute per entry trained
  size_t max_pieces = kDefaultMaxPieces;
  double epsilon = kDefaultEpsilon;
  uint64_t translation_lpn_base = 0;  // OOB sentinel: base + entry index
  bool block_all_chips = false;
};

struct GroupGcStats {
  uint32_t entries_trained = 0;
  uint64_t pages_moved = 0;
  uint32_t translation_writes = 0;
  double completion_us = 0.0;
};

// Collects one GTD entry group: reads its translation pages, relocates the
// valid pages in LPN order into fresh runs (consecutive VPPNs), retrains
// each entry's model, evaluates bitmaps, rewrites the translation pages,
// and erases the reclaimed runs.
GroupGcStats gc_group(uint32_t victim, GroupAllocator& alloc,
                      GroupGcContext& ctx, double t);

// Dynamic (least-busy-chip) allocation for the baseline FTLs, with a
// greedy fewest-valid-pages garbage collector.
class DynamicAllocator {
 public:
  DynamicAllocator(const FlashGeometry& geom, uint32_t reserve_blocks);

  // Next page on the least busy chip (earliest horizon, ties lowest chip).
  // nullopt when a fresh block would be needed but the pool is down to the
  // GC reserve.
  std::optional<Ppn> allocate_data(const ChipTimelines& chips);
  // Device-wide translation block, separate from the data actives.
  std::optional<Ppn> allocate_translation();

  uint64_t free_blocks() const { return free_pool_.size(); }
  uint32_t reserve_blocks() const { return reserve_; }
  bool below_watermark(uint32_t watermark_blocks) const {
    return free_pool_.size() < size_t(reserve_) + watermark_blocks;
  }

  // Greedy victim: fewest valid pages among full, non-active blocks with at
  // least one invalid page; ties go to the lowest block id.
  std::optional<uint64_t> select_victim(const NandArray& nand) const;

  class GcHooks {
   public:
    virtual ~GcHooks() = default;
    // Relocate one valid page; implementations allocate (GC may dip into
    // the reserve), program with class GcWrite, update their mapping, and
    // return the chain completion time.
    virtual double move_data(uint64_t lpn, uint64_t token, Ppn old_ppn,
                             double t) = 0;
    virtual double move_translation(uint32_t entry, Ppn old_ppn, double t) = 0;
  };

  // One GC episode; returns completion time. Throws CapacityError when no
  // block can be reclaimed.
  double collect_once(NandArray& nand, ChipTimelines& chips, GcHooks& hooks,
                      uint64_t translation_lpn_base, double t);

 private:
  bool chip_has_space(uint32_t chip) const;
  std::optional<uint64_t> take_free_block_on_chip(uint32_t chip);
  bool is_active(uint64_t block_id) const;

  FlashGeometry geom_;
  uint32_t reserve_;
  std::set<uint64_t> free_pool_;
  std::vector<int64_t> active_data_;    // per chip, -1 = none
  std::vector<uint64_t> data_cursor_;   // next page within active block
  int64_t active_translation_ = -1;
  uint64_t translation_cursor_ = 0;
  bool in_gc_ = false;

  friend class GcScope;

 public:
  // RAII guard letting allocations dip into the reserve during GC.
  class GcScope {
   public:
    explicit GcScope(DynamicAllocator& a) : a_(a) { a_.in_gc_ = true; }
    ~GcScope() { a_.in_gc_ = false; }

   private:
    DynamicAllocator& a_;
  };
};

}  // namespace ftlbench
