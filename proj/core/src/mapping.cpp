#include "ftlbench/mapping.hpp"

#include <algorithm>

#include "ftlbench/errors.hpp"

namespace ftlbench {

Cmt::Cmt(size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

std::optional<uint64_t> Cmt::lookup(uint64_t lpn) {
  lookups_++;
  auto it = index_.find(lpn);
  if (it == index_.end()) return std::nullopt;
  hits_++;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->ppn;
}

bool Cmt::contains(uint64_t lpn) const { return index_.count(lpn) != 0; }

std::optional<uint64_t> Cmt::peek(uint64_t lpn) const {
  auto it = index_.find(lpn);
  if (it == index_.end()) return std::nullopt;
  return it->second->ppn;
}

bool Cmt::is_dirty(uint64_t lpn) const {
  auto it = index_.find(lpn);
  return it != index_.end() && it->second->dirty;
}

void Cmt::set_dirty_index(uint64_t lpn, bool dirty) {
  uint32_t entry = uint32_t(lpn / kEntrySlots);
  if (dirty) {
    dirty_by_entry_[entry].insert(lpn);
  } else {
    auto it = dirty_by_entry_.find(entry);
    if (it != dirty_by_entry_.end()) {
      it->second.erase(lpn);
      if (it->second.empty()) dirty_by_entry_.erase(it);
    }
  }
}

void Cmt::upsert(uint64_t lpn, uint64_t ppn, bool dirty) {
  auto it = index_.find(lpn);
  if (it != index_.end()) {
    it->second->ppn = ppn;
    bool was_dirty = it->second->dirty;
    it->second->dirty = was_dirty || dirty;
    if (!was_dirty && dirty) set_dirty_index(lpn, true);
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  if (lru_.size() >= capacity_) {
    throw InternalError("cmt: upsert into a full cache; make_room first");
  }
  lru_.push_front(Node{lpn, ppn, dirty});
  index_[lpn] = lru_.begin();
  if (dirty) set_dirty_index(lpn, true);
}

void Cmt::overwrite(uint64_t lpn, uint64_t ppn, bool dirty) {
  auto it = index_.find(lpn);
  if (it == index_.end()) return;
  if (it->second->dirty != dirty) set_dirty_index(lpn, dirty);
  it->second->ppn = ppn;
  it->second->dirty = dirty;
}

void Cmt::mark_clean(uint64_t lpn) {
  auto it = index_.find(lpn);
  if (it == index_.end()) return;
  if (it->second->dirty) set_dirty_index(lpn, false);
  it->second->dirty = false;
}

void Cmt::erase(uint64_t lpn) {
  auto it = index_.find(lpn);
  if (it == index_.end()) return;
  if (it->second->dirty) set_dirty_index(lpn, false);
  lru_.erase(it->second);
  index_.erase(it);
}

std::optional<uint64_t> Cmt::lru_victim() const {
  if (lru_.empty()) return std::nullopt;
  return lru_.back().lpn;
}

std::vector<uint64_t> Cmt::dirty_in_entry(uint32_t entry) const {
  auto it = dirty_by_entry_.find(entry);
  if (it == dirty_by_entry_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

DemandMap::DemandMap(uint64_t logical_pages, uint32_t gtd_entries,
                     size_t cmt_capacity)
    : logical_pages_(logical_pages),
      cmt_(cmt_capacity),
      gtd_(gtd_entries),
      slots_(logical_pages) {}

std::optional<uint64_t> DemandMap::current_mapping(uint64_t lpn) const {
  if (cmt_.is_dirty(lpn)) return cmt_.peek(lpn);
  return slots_[lpn];
}

double DemandMap::make_room(TranslationIo& io, double t) {
  while (cmt_.full()) {
    auto victim = cmt_.lru_victim();
    if (!victim) break;
    if (cmt_.is_dirty(*victim)) {
      uint32_t entry = entry_of(*victim);
      // Batched write-back: flush every co-resident dirty mapping of the
      // victim's translation page within the one rewrite.
      for (uint64_t lpn : cmt_.dirty_in_entry(entry)) {
        slots_[lpn] = cmt_.peek(lpn);
        cmt_.mark_clean(lpn);
      }
      if (gtd_[entry].translation_ppn) {
        t = io.read_translation(entry, t);  // read-modify-write
      }
      t = io.write_translation(entry, t);
    }
    cmt_.erase(*victim);
  }
  return t;
}

double DemandMap::insert(uint64_t lpn, uint64_t ppn, bool dirty,
                         TranslationIo& io, double t) {
  if (cmt_.contains(lpn)) {
    cmt_.upsert(lpn, ppn, dirty);
    return t;
  }
  t = make_room(io, t);
  cmt_.upsert(lpn, ppn, dirty);
  return t;
}

DemandMap::LoadResult DemandMap::load_mapping(uint64_t lpn,
                                              uint32_t prefetch_len,
                                              TranslationIo& io, double t) {
  LoadResult res;
  uint32_t entry = entry_of(lpn);
  if (!gtd_[entry].translation_ppn) {
    // Never materialized: every slot of this entry is empty.
    res.t = t;
    return res;
  }
  res.flash_read = true;
  t = io.read_translation(entry, t);
  res.ppn = slots_[lpn];

  if (prefetch_len == 0) prefetch_len = 1;
  uint64_t entry_end = uint64_t(entry + 1) * kEntrySlots;
  uint64_t end = std::min({lpn + prefetch_len, entry_end, logical_pages_});
  for (uint64_t l = lpn; l < end; l++) {
    if (!slots_[l]) continue;
    if (cmt_.contains(l)) continue;  // never clobber a dirty resident
    t = insert(l, *slots_[l], false, io, t);
  }
  res.t = t;
  return res;
}

double DemandMap::update_on_write(uint64_t lpn, uint64_t new_ppn,
                                  TranslationIo& io, double t) {
  return insert(lpn, new_ppn, true, io, t);
}

void DemandMap::relocate(uint64_t lpn, uint64_t new_ppn) {
  slots_[lpn] = new_ppn;
  cmt_.overwrite(lpn, new_ppn, false);
}

void DemandMap::clear_mapping(uint64_t lpn) {
  slots_[lpn] = std::nullopt;
  cmt_.erase(lpn);
}

}  // namespace ftlbench
