#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "ftlbench/learned.hpp"

namespace ftlbench {

// One directory entry: where the entry's translation page lives on flash,
// which allocation group owns it, and (LearnedFTL only) the learned model.
struct GtdEntry {
  std::optional<Ppn> translation_ppn;
  uint32_t group_id = 0;
  std::optional<EntryModel> model;
};

struct CmtConfig {
  double capacity_fraction = 0.03;
  bool prefetch = false;
};

// Cached Mapping Table: LRU cache of individual LPN->PPN mappings.
class Cmt {
 public:
  explicit Cmt(size_t capacity);

  // Hit refreshes recency and counts toward the hit ratio.
  std::optional<uint64_t> lookup(uint64_t lpn);
  // State queries that do not disturb recency or counters.
  bool contains(uint64_t lpn) const;
  std::optional<uint64_t> peek(uint64_t lpn) const;
  bool is_dirty(uint64_t lpn) const;

  // Inserts or refreshes; the caller must have made room first.
  void upsert(uint64_t lpn, uint64_t ppn, bool dirty);
  // In-place value fix without touching recency (GC relocation).
  void overwrite(uint64_t lpn, uint64_t ppn, bool dirty);
  void mark_clean(uint64_t lpn);
  void erase(uint64_t lpn);

  std::optional<uint64_t> lru_victim() const;  // least recently used lpn
  // Resident dirty LPNs of one translation-page entry, ascending.
  std::vector<uint64_t> dirty_in_entry(uint32_t entry) const;

  size_t size() const { return lru_.size(); }
  size_t capacity() const { return capacity_; }
  bool full() const { return lru_.size() >= capacity_; }

  uint64_t lookups() const { return lookups_; }
  uint64_t hits() const { return hits_; }
  void reset_stats() { lookups_ = hits_ = 0; }

 private:
  struct Node {
    uint64_t lpn;
    uint64_t ppn;
    bool dirty;
  };
  void set_dirty_index(uint64_t lpn, bool dirty);

  size_t capacity_;
  std::list<Node> lru_;  // front = most recent
  std::unordered_map<uint64_t, std::list<Node>::iterator> index_;
  std::map<uint32_t, std::set<uint64_t>> dirty_by_entry_;
  uint64_t lookups_ = 0;
  uint64_t hits_ = 0;
};

// Flash costs of translation-page maintenance, supplied by the FTL variant
// (baselines write into a translation block pool, LearnedFTL into the
// entry's group). Both calls thread the request chain time.
class TranslationIo {
 public:
  virtual ~TranslationIo() = default;
  virtual double read_translation(uint32_t entry, double t) = 0;
  // Out-of-place rewrite: allocate + program a fresh translation page,
  // invalidate the old one, repoint the GTD. Returns chain completion.
  virtual double write_translation(uint32_t entry, double t) = 0;
};

// The demand-based mapping hierarchy shared by DFTL, TPFTL and LearnedFTL:
// GTD + on-flash translation pages + CMT. The slot array mirrors what the
// translation pages currently persist; dirty CMT entries override it.
class DemandMap {
 public:
  DemandMap(uint64_t logical_pages, uint32_t gtd_entries, size_t cmt_capacity);

  Cmt& cmt() { return cmt_; }
  const Cmt& cmt() const { return cmt_; }
  std::vector<GtdEntry>& gtd() { return gtd_; }
  const std::vector<GtdEntry>& gtd() const { return gtd_; }

  uint64_t logical_pages() const { return logical_pages_; }
  uint32_t entries() const { return uint32_t(gtd_.size()); }
  static uint32_t entry_of(uint64_t lpn) { return uint32_t(lpn / kEntrySlots); }

  std::optional<uint64_t> slot(uint64_t lpn) const { return slots_[lpn]; }

  struct LoadResult {
    std::optional<uint64_t> ppn;
    bool flash_read = false;
    double t = 0.0;
  };
  // CMT-miss path. Reads the translation page if one exists, inserts up to
  // prefetch_len consecutive mappings from the same page clean, and returns
  // the requested mapping (empty = never written).
  LoadResult load_mapping(uint64_t lpn, uint32_t prefetch_len,
                          TranslationIo& io, double t);

  // Host-write bookkeeping: upsert dirty, evicting (with batched
  // write-back) if the CMT is full.
  double update_on_write(uint64_t lpn, uint64_t new_ppn, TranslationIo& io,
                         double t);

  // Current truth for an LPN: dirty CMT value if present, else the slot.
  std::optional<uint64_t> current_mapping(uint64_t lpn) const;

  // GC relocation: persist the new location directly (the caller rewrites
  // the translation pages wholesale) and fix any resident CMT entry clean.
  void relocate(uint64_t lpn, uint64_t new_ppn);

  // Drops the mapping entirely (trim-like; the cold path property tests
  // need it).
  void clear_mapping(uint64_t lpn);

  // Evicts the LRU victim if the CMT is full. A dirty victim costs one
  // translation read plus one translation write, and every co-resident
  // dirty mapping of the same translation page is flushed in that write.
  double make_room(TranslationIo& io, double t);

 private:
  double insert(uint64_t lpn, uint64_t ppn, bool dirty, TranslationIo& io,
                double t);

  uint64_t logical_pages_;
  Cmt cmt_;
  std::vector<GtdEntry> gtd_;
  std::vector<std::optional<uint64_t>> slots_;
};

}  // namespace ftlbench
