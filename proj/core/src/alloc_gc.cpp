#include "ftlbench/alloc_gc.hpp"

#include <algorithm>
#include <string>

#include "ftlbench/errors.hpp"

namespace ftlbench {

GroupAllocator::GroupAllocator(const FlashGeometry& geom,
                               const GroupConfig& cfg, uint32_t group_count)
    : geom_(geom), cfg_(cfg) {
  if (cfg_.run_pages == 0 || cfg_.run_slabs == 0 ||
      cfg_.run_pages != uint64_t(cfg_.entries_per_group) * kEntrySlots ||
      cfg_.run_pages != uint64_t(cfg_.run_slabs) * geom_.slab_pages()) {
    throw ConfigError("group allocator: run size must equal the group span");
  }
  if (geom_.blocks % cfg_.run_slabs != 0) {
    throw ConfigError("group allocator: block count not divisible into runs");
  }
  total_runs_ = geom_.blocks / cfg_.run_slabs;
  groups_.resize(group_count);
  for (uint32_t g = 0; g < group_count; g++) groups_[g].id = g;
  run_owner_.assign(total_runs_, -1);
  for (uint32_t r = 0; r < total_runs_; r++) free_runs_.insert(r);
  if (cfg_.t_encroach_pages == 0) cfg_.t_encroach_pages = cfg_.run_pages;
}

std::optional<Vppn> GroupAllocator::allocate_in_current(uint32_t g) {
  GroupState& grp = groups_[g];
  if (grp.cur_run < 0 || grp.cur_off >= cfg_.run_pages) return std::nullopt;
  Vppn v{vppn_range_begin(uint32_t(grp.cur_run)) + grp.cur_off};
  grp.cur_off++;
  return v;
}

bool GroupAllocator::acquire_run(uint32_t g, bool keep_reserve) {
  size_t floor = keep_reserve ? 1 : 0;
  if (free_runs_.size() <= floor) return false;
  uint32_t run = *free_runs_.begin();
  free_runs_.erase(free_runs_.begin());
  run_owner_[run] = int32_t(g);
  GroupState& grp = groups_[g];
  grp.runs.push_back(run);
  grp.cur_run = run;
  grp.cur_off = 0;
  grp.cumulative_blocks += uint64_t(cfg_.run_slabs) * geom_.blocks_per_slab();
  return true;
}

void GroupAllocator::release_run(uint32_t run) {
  int32_t owner = run_owner_[run];
  if (owner >= 0) {
    auto& runs = groups_[size_t(owner)].runs;
    runs.erase(std::remove(runs.begin(), runs.end(), run), runs.end());
    if (groups_[size_t(owner)].cur_run == int64_t(run)) {
      groups_[size_t(owner)].cur_run = -1;
      groups_[size_t(owner)].cur_off = 0;
    }
  } else if (owner == -2 && meta_run_ == int64_t(run)) {
    meta_run_ = -1;
    meta_off_ = 0;
  }
  run_owner_[run] = -1;
  free_runs_.insert(run);
}

std::vector<uint32_t> GroupAllocator::detach_runs(uint32_t g) {
  GroupState& grp = groups_[g];
  std::vector<uint32_t> out = grp.runs;  // owner marks stay until release
  grp.runs.clear();
  grp.cur_run = -1;
  grp.cur_off = 0;
  return out;
}

uint64_t GroupAllocator::free_pages_of(uint32_t g) const {
  const GroupState& grp = groups_[g];
  if (grp.cur_run < 0) return 0;
  return cfg_.run_pages - grp.cur_off;
}

std::vector<uint64_t> GroupAllocator::run_blocks(uint32_t run) const {
  // Run r covers slab indices [r*run_slabs, (r+1)*run_slabs); slab s holds
  // the blocks with per-plane block index s on every chip and plane.
  std::vector<uint64_t> out;
  out.reserve(uint64_t(cfg_.run_slabs) * geom_.blocks_per_slab());
  for (uint32_t s = run * cfg_.run_slabs; s < (run + 1) * cfg_.run_slabs; s++) {
    for (uint32_t ch = 0; ch < geom_.channels; ch++) {
      for (uint32_t w = 0; w < geom_.ways; w++) {
        for (uint32_t pl = 0; pl < geom_.planes; pl++) {
          uint64_t bid = ((uint64_t(ch) * geom_.ways + w) * geom_.planes + pl) *
                             geom_.blocks +
                         s;
          out.push_back(bid);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

uint64_t GroupAllocator::valid_pages_of(uint32_t g, const NandArray& nand) const {
  uint64_t n = 0;
  for (uint32_t run : groups_[g].runs) {
    for (uint64_t b : run_blocks(run)) n += nand.block(b).valid_count;
  }
  return n;
}

uint64_t GroupAllocator::invalid_pages_of(uint32_t g,
                                          const NandArray& nand) const {
  uint64_t n = 0;
  for (uint32_t run : groups_[g].runs) {
    for (uint64_t b : run_blocks(run)) n += nand.block(b).invalid_count;
  }
  return n;
}

std::optional<uint32_t> GroupAllocator::select_victim(
    const NandArray& nand) const {
  std::optional<uint32_t> best;
  uint64_t best_invalid = 0;
  for (uint32_t g = 0; g < groups_.size(); g++) {
    uint64_t inv = invalid_pages_of(g, nand);
    if (inv > best_invalid) {
      best_invalid = inv;
      best = g;
    }
  }
  return best;
}

std::optional<uint32_t> GroupAllocator::coldest_eligible(
    uint32_t hot, const std::vector<GtdEntry>& gtd, bool require_untrained,
    uint64_t min_free_pages) const {
  std::optional<uint32_t> best;
  uint64_t best_free = 0;
  const uint64_t span_bits = uint64_t(cfg_.entries_per_group) * kEntrySlots;
  for (uint32_t g = 0; g < groups_.size(); g++) {
    if (g == hot) continue;
    uint64_t free = free_pages_of(g);
    if (free < min_free_pages) continue;
    if (require_untrained) {
      uint64_t pop = 0;
      uint32_t e0 = g * cfg_.entries_per_group;
      uint32_t e1 = std::min<uint64_t>(e0 + cfg_.entries_per_group, gtd.size());
      for (uint32_t e = e0; e < e1; e++) {
        if (gtd[e].model) pop += gtd[e].model->bitmap.count();
      }
      if (double(pop) >= cfg_.cold_popcount_fraction * double(span_bits)) {
        continue;  // already trained; not cold
      }
    }
    if (free > best_free) {
      best_free = free;
      best = g;
    }
  }
  return best;
}

void GroupAllocator::note_borrow(uint32_t hot, uint32_t cold) {
  groups_[hot].borrowed_pages++;
  groups_[cold].lent_pages++;
}

void GroupAllocator::note_foreign_invalidated(uint32_t owner_group,
                                              uint32_t lpn_group) {
  if (groups_[owner_group].lent_pages > 0) groups_[owner_group].lent_pages--;
  if (groups_[lpn_group].borrowed_pages > 0) groups_[lpn_group].borrowed_pages--;
}

std::optional<Vppn> GroupAllocator::allocate_meta() {
  if (meta_run_ < 0 || meta_off_ >= cfg_.run_pages) return std::nullopt;
  Vppn v{vppn_range_begin(uint32_t(meta_run_)) + meta_off_};
  meta_off_++;
  return v;
}

bool GroupAllocator::acquire_meta_run() {
  if (free_runs_.empty()) return false;
  uint32_t run = *free_runs_.begin();
  free_runs_.erase(free_runs_.begin());
  run_owner_[run] = -2;
  meta_run_ = int64_t(run);
  meta_off_ = 0;
  return true;
}

GroupGcStats gc_group(uint32_t victim, GroupAllocator& alloc,
                      GroupGcContext& ctx, double t) {
  GroupGcStats st;
  const GroupConfig& cfg = alloc.config();
  auto& gtd = ctx.map.gtd();
  const uint32_t e0 = victim * cfg.entries_per_group;
  const uint32_t e1 =
      std::min<uint32_t>(e0 + cfg.entries_per_group, ctx.map.entries());
  const uint64_t span_begin = uint64_t(e0) * kEntrySlots;
  const uint64_t span_end =
      std::min(uint64_t(e1) * kEntrySlots, ctx.map.logical_pages());

  // Read the group's translation pages, then collect the live mappings in
  // LPN order (dirty CMT values override the flash slots and get folded
  // into the rewrite below).
  double tr_reads_done = t;
  for (uint32_t e = e0; e < e1; e++) {
    if (!gtd[e].translation_ppn) continue;
    auto [oob, ev] = ctx.nand.read_page(*gtd[e].translation_ppn,
                                        OpClass::TranslationRead);
    (void)oob;
    tr_reads_done =
        std::max(tr_reads_done, ctx.chips.schedule(ev.chip, t, ev.duration_us));
  }

  struct Move {
    uint64_t lpn;
    uint64_t old_ppn;
  };
  std::vector<Move> moves;
  for (uint64_t lpn = span_begin; lpn < span_end; lpn++) {
    auto m = ctx.map.current_mapping(lpn);
    if (!m) continue;
    // A mapping can transiently point at an invalidated page while the
    // write that superseded it is still landing its CMT upsert; that
    // write owns the fresher copy, so the stale one is not relocated.
    if (ctx.nand.page_state(Ppn{*m}) != PageState::Valid) continue;
    moves.push_back(Move{lpn, *m});
  }

  for (uint32_t e = e0; e < e1; e++) {
    if (gtd[e].translation_ppn) {
      Ppn old = *gtd[e].translation_ppn;
      ctx.nand.invalidate_page(old);
      uint32_t src_run = alloc.run_of_vppn(ppn_to_vppn(old, ctx.geom));
      int32_t owner = alloc.run_owner(src_run);
      if (owner >= 0 && uint32_t(owner) != victim) {
        alloc.note_foreign_invalidated(uint32_t(owner), victim);
      }
      gtd[e].translation_ppn.reset();
    }
  }

  std::vector<uint32_t> old_runs = alloc.detach_runs(victim);

  double reads_horizon = tr_reads_done;
  double copies_done = tr_reads_done;

  // Old runs are erased as soon as they drain so their space can feed the
  // write-back when the free pool is down to its last run.
  auto erase_empty_old_runs = [&]() {
    for (auto it = old_runs.begin(); it != old_runs.end();) {
      bool empty = true;
      for (uint64_t b : alloc.run_blocks(*it)) {
        if (ctx.nand.block(b).valid_count != 0) {
          empty = false;
          break;
        }
      }
      if (!empty) {
        ++it;
        continue;
      }
      for (uint64_t b : alloc.run_blocks(*it)) {
        const FlashBlock& blk = ctx.nand.block(b);
        if (blk.write_pointer == 0) continue;  // never programmed
        auto ev = ctx.nand.erase_block(b);
        copies_done = std::max(
            copies_done, ctx.chips.schedule(ev.chip, reads_horizon, ev.duration_us));
      }
      alloc.release_run(*it);
      it = old_runs.erase(it);
    }
  };

  auto next_vppn = [&]() -> Vppn {
    auto v = alloc.allocate_in_current(victim);
    if (v) return *v;
    if (!alloc.acquire_run(victim, /*keep_reserve=*/false)) {
      erase_empty_old_runs();
      if (!alloc.acquire_run(victim, false)) {
        std::string detail = "group GC of " + std::to_string(victim) +
                             ": no free run for write-back; old runs:";
        for (uint32_t r : old_runs) {
          uint64_t valid = 0;
          for (uint64_t b : alloc.run_blocks(r)) {
            valid += ctx.nand.block(b).valid_count;
          }
          detail += " " + std::to_string(r) + "(" + std::to_string(valid) + ")";
        }
        throw CapacityError(detail);
      }
    }
    return *alloc.allocate_in_current(victim);
  };

  struct EntryTrain {
    std::vector<TrainingPair> pairs;
    Vppn base{0};
  };
  std::vector<EntryTrain> train(e1 - e0);

  for (const Move& mv : moves) {
    Vppn dst = next_vppn();
    auto [oob, rev] = ctx.nand.read_page(Ppn{mv.old_ppn}, OpClass::GcRead);
    double rd = ctx.chips.schedule(rev.chip, tr_reads_done, rev.duration_us);
    reads_horizon = std::max(reads_horizon, rd);
    Ppn new_ppn = vppn_to_ppn(dst, ctx.geom);
    auto wev =
        ctx.nand.program_page(new_ppn, oob.lpn, oob.token, OpClass::GcWrite);
    copies_done =
        std::max(copies_done, ctx.chips.schedule(wev.chip, rd, wev.duration_us));
    ctx.nand.invalidate_page(Ppn{mv.old_ppn});
    uint32_t src_run = alloc.run_of_vppn(ppn_to_vppn(Ppn{mv.old_ppn}, ctx.geom));
    int32_t owner = alloc.run_owner(src_run);
    if (owner >= 0 && uint32_t(owner) != victim) {
      alloc.note_foreign_invalidated(uint32_t(owner), victim);
    }
    ctx.map.relocate(mv.lpn, new_ppn.value);
    st.pages_moved++;

    uint32_t e = DemandMap::entry_of(mv.lpn);
    EntryTrain& et = train[e - e0];
    if (et.pairs.empty()) et.base = dst;
    et.pairs.push_back(
        TrainingPair{uint32_t(mv.lpn - uint64_t(e) * kEntrySlots),
                     int64_t(dst.value) - int64_t(et.base.value)});
  }

  // Per-entry model training and bitmap evaluation.
  for (uint32_t e = e0; e < e1; e++) {
    EntryTrain& et = train[e - e0];
    if (et.pairs.empty()) {
      gtd[e].model.reset();
      continue;
    }
    EntryModel m;
    m.params = train_plr(et.pairs, ctx.max_pieces, ctx.epsilon);
    m.bitmap = evaluate_and_set_bitmap(m.params, et.pairs);
    m.base = et.base;
    gtd[e].model = std::move(m);
    st.entries_trained++;
  }
  // LPN sorting plus parameter fitting run on the controller.
  double t_train = copies_done + ctx.sort_train_us * st.entries_trained;

  // Drain foreign (lent) pages that still live in the old runs so the runs
  // can be erased; they stay lent, re-homed into this group's fresh space.
  // Their owners' next GC pulls them back to their own runs. A page whose
  // mapping no longer points at it (an in-flight write) is left alone.
  double foreign_done = t_train;
  // next_vppn may erase drained runs out of old_runs mid-loop.
  std::vector<uint32_t> drain_snapshot = old_runs;
  for (uint32_t run : drain_snapshot) {
    for (uint64_t b : alloc.run_blocks(run)) {
      uint64_t base = b * ctx.geom.pages;
      for (uint32_t pi = 0; pi < ctx.geom.pages; pi++) {
        Ppn src{base + pi};
        if (ctx.nand.page_state(src) != PageState::Valid) continue;
        const Oob& peek = ctx.nand.page_oob(src);
        if (peek.lpn >= ctx.translation_lpn_base) {
          throw InternalError(
              "group GC: translation page found in a data run");
        }
        uint64_t lpn = peek.lpn;
        auto cur = ctx.map.current_mapping(lpn);
        if (!cur || *cur != src.value) continue;  // in-flight write
        auto [oob, rev] = ctx.nand.read_page(src, OpClass::GcRead);
        double rd = ctx.chips.schedule(rev.chip, t_train, rev.duration_us);
        reads_horizon = std::max(reads_horizon, rd);
        Vppn dst = next_vppn();
        Ppn np = vppn_to_ppn(dst, ctx.geom);
        auto wev =
            ctx.nand.program_page(np, oob.lpn, oob.token, OpClass::GcWrite);
        foreign_done = std::max(
            foreign_done, ctx.chips.schedule(wev.chip, rd, wev.duration_us));
        ctx.nand.invalidate_page(src);
        ctx.map.relocate(lpn, np.value);
        uint32_t e = DemandMap::entry_of(lpn);
        if (gtd[e].model) {
          clear_bit_on_write(*gtd[e].model, uint32_t(lpn % kEntrySlots));
        }
        uint32_t lg = e / cfg.entries_per_group;
        alloc.note_foreign_invalidated(victim, lg);
        alloc.note_borrow(lg, victim);
        st.pages_moved++;
      }
    }
  }

  reads_horizon = std::max(reads_horizon, foreign_done);
  erase_empty_old_runs();

  // Rewrite the translation pages into the metadata run, one per entry
  // with live data.
  double tr_writes_done = foreign_done;
  for (uint32_t e = e0; e < e1; e++) {
    if (train[e - e0].pairs.empty()) continue;
    double slot_t = foreign_done;
    Vppn dst = ctx.meta.translation_slot(slot_t);
    Ppn p = vppn_to_ppn(dst, ctx.geom);
    auto ev = ctx.nand.program_page(p, ctx.translation_lpn_base + e, 0,
                                    OpClass::TranslationWrite);
    tr_writes_done = std::max(
        tr_writes_done, ctx.chips.schedule(ev.chip, slot_t, ev.duration_us));
    gtd[e].translation_ppn = p;
    st.translation_writes++;
  }

  reads_horizon = std::max(reads_horizon, tr_writes_done);
  erase_empty_old_runs();

  // Anything left is an in-flight page; its run stays owned until a later
  // collection.
  GroupState& grp = alloc.group(victim);
  for (uint32_t run : old_runs) grp.runs.push_back(run);

  grp.cumulative_blocks = 0;
  grp.gc_count++;
  grp.writes_since_gc = 0;
  grp.borrowed_pages = 0;  // everything was pulled home

  st.completion_us = std::max(copies_done, tr_writes_done);
  grp.last_gc_us = st.completion_us;
  if (ctx.block_all_chips) ctx.chips.block_all_until(st.completion_us);
  return st;
}

DynamicAllocator::DynamicAllocator(const FlashGeometry& geom,
                                   uint32_t reserve_blocks)
    : geom_(geom), reserve_(reserve_blocks) {
  for (uint64_t b = 0; b < geom_.total_blocks(); b++) free_pool_.insert(b);
  active_data_.assign(geom_.chip_count(), -1);
  data_cursor_.assign(geom_.chip_count(), 0);
}

bool DynamicAllocator::is_active(uint64_t block_id) const {
  if (int64_t(block_id) == active_translation_) return true;
  for (int64_t b : active_data_) {
    if (b == int64_t(block_id)) return true;
  }
  return false;
}

bool DynamicAllocator::chip_has_space(uint32_t chip) const {
  if (active_data_[chip] >= 0 && data_cursor_[chip] < geom_.pages) return true;
  if (in_gc_ ? free_pool_.empty() : free_pool_.size() <= reserve_) return false;
  uint64_t begin = uint64_t(chip) * geom_.planes * geom_.blocks;
  uint64_t end = begin + uint64_t(geom_.planes) * geom_.blocks;
  auto it = free_pool_.lower_bound(begin);
  return it != free_pool_.end() && *it < end;
}

std::optional<uint64_t> DynamicAllocator::take_free_block_on_chip(
    uint32_t chip) {
  if (in_gc_ ? free_pool_.empty() : free_pool_.size() <= reserve_) {
    return std::nullopt;
  }
  uint64_t begin = uint64_t(chip) * geom_.planes * geom_.blocks;
  uint64_t end = begin + uint64_t(geom_.planes) * geom_.blocks;
  auto it = free_pool_.lower_bound(begin);
  if (it == free_pool_.end() || *it >= end) return std::nullopt;
  uint64_t b = *it;
  free_pool_.erase(it);
  return b;
}

std::optional<Ppn> DynamicAllocator::allocate_data(const ChipTimelines& chips) {
  // Least busy chip that can actually take a page; ties to the lowest chip.
  std::optional<uint32_t> pick;
  for (uint32_t c = 0; c < geom_.chip_count(); c++) {
    if (!chip_has_space(c)) continue;
    if (!pick || chips.next_free(c) < chips.next_free(*pick)) pick = c;
  }
  if (!pick) return std::nullopt;
  uint32_t c = *pick;
  if (active_data_[c] < 0 || data_cursor_[c] >= geom_.pages) {
    auto blk = take_free_block_on_chip(c);
    if (!blk) return std::nullopt;
    active_data_[c] = int64_t(*blk);
    data_cursor_[c] = 0;
  }
  Ppn p{uint64_t(active_data_[c]) * geom_.pages + data_cursor_[c]};
  data_cursor_[c]++;
  return p;
}

std::optional<Ppn> DynamicAllocator::allocate_translation() {
  if (active_translation_ < 0 || translation_cursor_ >= geom_.pages) {
    if (in_gc_ ? free_pool_.empty() : free_pool_.size() <= reserve_) {
      return std::nullopt;
    }
    uint64_t b = *free_pool_.begin();
    free_pool_.erase(free_pool_.begin());
    active_translation_ = int64_t(b);
    translation_cursor_ = 0;
  }
  Ppn p{uint64_t(active_translation_) * geom_.pages + translation_cursor_};
  translation_cursor_++;
  return p;
}

std::optional<uint64_t> DynamicAllocator::select_victim(
    const NandArray& nand) const {
  std::optional<uint64_t> best;
  uint32_t best_valid = UINT32_MAX;
  for (uint64_t b = 0; b < nand.block_count(); b++) {
    if (is_active(b)) continue;
    const FlashBlock& blk = nand.block(b);
    if (blk.invalid_count == 0) continue;  // nothing to reclaim
    if (blk.write_pointer < geom_.pages) continue;  // still open
    if (blk.valid_count < best_valid) {
      best_valid = blk.valid_count;
      best = b;
    }
  }
  return best;
}

double DynamicAllocator::collect_once(NandArray& nand, ChipTimelines& chips,
                                      GcHooks& hooks,
                                      uint64_t translation_lpn_base, double t) {
  auto victim = select_victim(nand);
  if (!victim) {
    throw CapacityError("dynamic GC: no reclaimable block");
  }
  GcScope scope(*this);
  uint64_t base = *victim * geom_.pages;
  double reads_horizon = t;
  double done = t;
  for (uint32_t i = 0; i < geom_.pages; i++) {
    Ppn p{base + i};
    if (nand.page_state(p) != PageState::Valid) continue;
    auto [oob, rev] = nand.read_page(p, OpClass::GcRead);
    double rd = chips.schedule(rev.chip, t, rev.duration_us);
    reads_horizon = std::max(reads_horizon, rd);
    double moved;
    if (oob.lpn >= translation_lpn_base) {
      moved = hooks.move_translation(uint32_t(oob.lpn - translation_lpn_base),
                                     p, rd);
    } else {
      moved = hooks.move_data(oob.lpn, oob.token, p, rd);
    }
    nand.invalidate_page(p);
    done = std::max(done, moved);
  }
  auto ev = nand.erase_block(*victim);
  done = std::max(done, chips.schedule(ev.chip, reads_horizon, ev.duration_us));
  free_pool_.insert(*victim);
  return done;
}

}  // namespace ftlbench
