#include <algorithm>
#include <set>

#include "ftlbench/errors.hpp"
#include "ftl_variants.hpp"
#include "json.hpp"

namespace ftlbench {

namespace {

GroupConfig make_group_config(const SimConfig& cfg) {
  GroupConfig gc;
  gc.entries_per_group = cfg.effective_entries_per_group();
  gc.run_pages = uint64_t(gc.entries_per_group) * kEntrySlots;
  gc.run_slabs = uint32_t(gc.run_pages / cfg.geometry.slab_pages());
  gc.t_blocks_runs = cfg.t_blocks_runs;
  gc.t_encroach_pages = cfg.effective_t_encroach_pages();
  gc.cold_popcount_fraction = cfg.cold_popcount_fraction;
  gc.free_watermark_runs = cfg.gc_free_watermark;
  return gc;
}

uint32_t group_count_for(const SimConfig& cfg, const GroupConfig& gc) {
  uint32_t entries = cfg.gtd_entries();
  return (entries + gc.entries_per_group - 1) / gc.entries_per_group;
}

}  // namespace

LearnedFtl::LearnedFtl(const SimConfig& cfg)
    : Ftl(cfg),
      map_(logical_pages_, cfg.gtd_entries(), cfg.cmt_capacity()),
      galloc_(cfg.geometry, make_group_config(cfg),
              group_count_for(cfg, make_group_config(cfg))) {
  const GroupConfig& gc = galloc_.config();
  // Enough runs must exist to hold the logical span plus the metadata run
  // and a GC write-back run.
  uint64_t addressable_groups =
      (logical_pages_ + gc.run_pages - 1) / gc.run_pages;
  if (galloc_.total_runs() < addressable_groups + 2) {
    throw ConfigError(
        "geometry too small for group-based allocation: " +
        std::to_string(galloc_.total_runs()) + " runs for " +
        std::to_string(addressable_groups) + " groups plus metadata and GC "
        "headroom");
  }
  for (uint32_t e = 0; e < map_.entries(); e++) {
    map_.gtd()[e].group_id = e / gc.entries_per_group;
  }
}

double LearnedFtl::collect_meta_run(double t) {
  int64_t old_run = galloc_.meta_run();
  if (!galloc_.acquire_meta_run()) {
    throw CapacityError("learnedftl: no free run for translation metadata");
  }
  if (old_run < 0) return t;
  count_gc();
  uint64_t lo = galloc_.vppn_range_begin(uint32_t(old_run));
  uint64_t hi = lo + galloc_.config().run_pages;
  double reads_horizon = t;
  double done = t;
  auto& gtd = map_.gtd();
  for (uint32_t e = 0; e < map_.entries(); e++) {
    if (!gtd[e].translation_ppn) continue;
    uint64_t v = ppn_to_vppn(*gtd[e].translation_ppn, geom_).value;
    if (v < lo || v >= hi) continue;
    auto [oob, rev] = nand_.read_page(*gtd[e].translation_ppn, OpClass::GcRead);
    (void)oob;
    double rd = chips_.schedule(rev.chip, t, rev.duration_us);
    reads_horizon = std::max(reads_horizon, rd);
    auto slot = galloc_.allocate_meta();
    if (!slot) {
      throw InternalError("metadata collection overflowed the fresh run");
    }
    Ppn np = vppn_to_ppn(*slot, geom_);
    auto wev = nand_.program_page(np, translation_lpn_base_ + e, 0,
                                  OpClass::GcWrite);
    done = std::max(done, chips_.schedule(wev.chip, rd, wev.duration_us));
    nand_.invalidate_page(*gtd[e].translation_ppn);
    gtd[e].translation_ppn = np;
  }
  // The drained metadata run goes back to the pool.
  std::vector<uint64_t> blocks = galloc_.run_blocks(uint32_t(old_run));
  for (uint64_t b : blocks) {
    if (nand_.block(b).write_pointer == 0) continue;
    auto ev = nand_.erase_block(b);
    done = std::max(done, chips_.schedule(ev.chip, reads_horizon,
                                          ev.duration_us));
  }
  galloc_.release_run(uint32_t(old_run));
  return done;
}

Vppn LearnedFtl::translation_slot(double& t) {
  // Collect early enough that one group GC's worth of rewrites always fits.
  uint64_t margin = uint64_t(map_.entries()) +
                    galloc_.config().entries_per_group + 8;
  if (galloc_.meta_run() < 0 || galloc_.meta_remaining() < margin) {
    t = collect_meta_run(t);
  }
  auto slot = galloc_.allocate_meta();
  if (!slot) {
    throw CapacityError("learnedftl: metadata run exhausted");
  }
  return *slot;
}

void LearnedFtl::invalidate_data(uint64_t lpn, uint64_t old_ppn) {
  nand_.invalidate_page(Ppn{old_ppn});
  uint32_t run = galloc_.run_of_vppn(ppn_to_vppn(Ppn{old_ppn}, geom_));
  int32_t owner = galloc_.run_owner(run);
  uint32_t g = group_of_lpn(lpn);
  if (owner >= 0 && uint32_t(owner) != g) {
    galloc_.note_foreign_invalidated(uint32_t(owner), g);
  }
}

double LearnedFtl::run_gc(uint32_t victim, double t) {
  GroupGcContext ctx{nand_,
                     map_,
                     chips_,
                     geom_,
                     *this,
                     cfg_.sort_train_us,
                     cfg_.max_pieces,
                     cfg_.epsilon,
                     translation_lpn_base_,
                     cfg_.gc_blocks_all_chips};
  GroupGcStats st = gc_group(victim, galloc_, ctx, t);
  count_gc();
  max_tr_writes_gc_ = std::max<uint64_t>(max_tr_writes_gc_,
                                         st.translation_writes);
  return st.completion_us;
}

LearnedFtl::Alloc LearnedFtl::allocate_page(uint32_t group, double& t) {
  // Within the current run first; then a fresh run (leaving one in reserve
  // for GC write-back); then a cold group's spare pages; then GC.
  auto attempt = [&](bool desperate) -> std::optional<Alloc> {
    auto v = galloc_.allocate_in_current(group);
    if (v) return Alloc{*v, group};
    if (galloc_.acquire_run(group, /*keep_reserve=*/true)) {
      return Alloc{*galloc_.allocate_in_current(group), group};
    }
    uint64_t half_run = galloc_.config().run_pages / 2 + 1;
    auto cold = galloc_.coldest_eligible(group, map_.gtd(), true, half_run);
    if (!cold) {
      // Every spacious group is already trained; borrow anyway rather than
      // force avoidable collections.
      cold = galloc_.coldest_eligible(group, map_.gtd(), false, half_run);
    }
    if (!cold && desperate) {
      // Mid-escalation, any tail page beats declaring the device full.
      cold = galloc_.coldest_eligible(group, map_.gtd(), false, 1);
    }
    if (cold) {
      auto cv = galloc_.allocate_in_current(*cold);
      if (cv) {
        galloc_.note_borrow(group, *cold);
        if (galloc_.group(*cold).lent_pages >=
            galloc_.config().t_encroach_pages) {
          pending_gc_.push_back(group);
          pending_gc_.push_back(*cold);
        }
        return Alloc{*cv, *cold};
      }
    }
    return std::nullopt;
  };
  auto a = attempt(false);
  if (a) return *a;
  // Collect garbage, most-invalid group first. Collections shift invalid
  // pages around (borrowed pages moving home fatten their lender), so the
  // victim is re-selected after every round; a victim that freed nothing
  // is set aside until some round makes progress.
  std::set<uint32_t> fruitless;
  for (uint32_t round = 0; round <= galloc_.group_count(); round++) {
    std::optional<uint32_t> victim;
    uint64_t best_inv = 0;
    for (uint32_t g = 0; g < galloc_.group_count(); g++) {
      if (fruitless.count(g)) continue;
      uint64_t inv = galloc_.invalid_pages_of(g, nand_);
      if (inv > best_inv) {
        best_inv = inv;
        victim = g;
      }
    }
    if (!victim) break;
    uint32_t free_before = galloc_.free_run_count();
    t = run_gc(*victim, t);
    a = attempt(true);
    if (a) return *a;
    if (galloc_.free_run_count() > free_before) {
      fruitless.clear();
    } else {
      fruitless.insert(*victim);
    }
  }
  throw CapacityError("learnedftl: device full, GC reclaimed nothing");
}

double LearnedFtl::gc_pressure_check(uint32_t just_written_group, double t) {
  const GroupConfig& gcfg = galloc_.config();
  GroupState& grp = galloc_.group(just_written_group);
  uint64_t t_blocks =
      uint64_t(gcfg.t_blocks_runs) * gcfg.run_slabs * geom_.blocks_per_slab();
  bool pressured = grp.cumulative_blocks >= t_blocks;
  if (!pressured &&
      galloc_.free_run_count() >= gcfg.free_watermark_runs) {
    return t;
  }
  auto victim = galloc_.select_victim(nand_);
  if (!victim) return t;
  // Skip a collection that cannot free a run.
  uint64_t valid = galloc_.valid_pages_of(*victim, nand_);
  uint64_t needed =
      (valid + gcfg.entries_per_group + gcfg.run_pages - 1) / gcfg.run_pages;
  if (galloc_.group(*victim).runs.size() <= needed &&
      galloc_.free_run_count() > 0) {
    if (pressured) grp.cumulative_blocks = 0;
    return t;
  }
  t = run_gc(*victim, t);
  if (pressured) grp.cumulative_blocks = 0;
  return t;
}

double LearnedFtl::read_translation(uint32_t entry, double t) {
  auto ppn = map_.gtd()[entry].translation_ppn;
  if (!ppn) throw InternalError("translation read without a page");
  auto [oob, ev] = nand_.read_page(*ppn, OpClass::TranslationRead);
  (void)oob;
  return chips_.schedule(ev.chip, t, ev.duration_us);
}

double LearnedFtl::write_translation(uint32_t entry, double t) {
  Vppn slot = translation_slot(t);
  auto& ge = map_.gtd()[entry];
  if (ge.translation_ppn) nand_.invalidate_page(*ge.translation_ppn);
  Ppn dst = vppn_to_ppn(slot, geom_);
  auto ev = nand_.program_page(dst, translation_lpn_base_ + entry, 0,
                               OpClass::TranslationWrite);
  ge.translation_ppn = dst;
  return chips_.schedule(ev.chip, t, ev.duration_us);
}

Ftl::PageRead LearnedFtl::read_one(uint64_t lpn, uint32_t remaining,
                                   double t) {
  PageRead pr;
  auto cached = map_.cmt().lookup(lpn);
  if (cached) {
    auto [oob, ev] = nand_.read_page(Ppn{*cached}, OpClass::DataRead);
    pr.completion = chips_.schedule(ev.chip, t, ev.duration_us);
    pr.token = oob.token;
    pr.mapped = true;
    pr.cls = ReadClass::Single;
    pr.src = HitSource::Cmt;
    return pr;
  }
  cmt_misses_++;
  t += cfg_.bitmap_check_us;
  uint32_t entry = uint32_t(lpn / kEntrySlots);
  uint32_t off = uint32_t(lpn % kEntrySlots);
  const auto& model = map_.gtd()[entry].model;
  if (model) {
    auto predicted = predict(*model, off, geom_);
    if (predicted) {
      t += cfg_.model_predict_us;
      auto [oob, ev] = nand_.read_page(*predicted, OpClass::DataRead);
      if (oob.lpn != lpn) {
        throw InternalError("learnedftl: set bit predicted a page of lpn " +
                            std::to_string(oob.lpn) + ", wanted " +
                            std::to_string(lpn));
      }
      pr.completion = chips_.schedule(ev.chip, t, ev.duration_us);
      pr.token = oob.token;
      pr.mapped = true;
      pr.cls = ReadClass::Single;
      pr.src = HitSource::Model;
      model_hits_++;
      return pr;
    }
  }
  auto load = map_.load_mapping(lpn, remaining, *this, t);
  t = load.t;
  if (!load.ppn) {
    pr.completion = t;
    return pr;
  }
  auto [oob, ev] = nand_.read_page(Ppn{*load.ppn}, OpClass::DataRead);
  pr.completion = chips_.schedule(ev.chip, t, ev.duration_us);
  pr.token = oob.token;
  pr.mapped = true;
  pr.cls = load.flash_read ? ReadClass::Double : ReadClass::Single;
  pr.src = HitSource::None;
  return pr;
}

double LearnedFtl::write_pages(uint64_t lpn0, uint32_t npages, uint64_t token0,
                               double t) {
  struct Placed {
    uint64_t lpn;
    uint64_t vppn;
  };
  std::vector<Placed> placed;
  placed.reserve(npages);
  double done = t;
  for (uint32_t i = 0; i < npages; i++) {
    uint64_t lpn = lpn0 + i;
    uint32_t entry = uint32_t(lpn / kEntrySlots);
    uint32_t g = group_of_lpn(lpn);
    t += cfg_.bitmap_check_us;

    Alloc a = allocate_page(g, t);
    Ppn dst = vppn_to_ppn(a.vppn, geom_);
    auto ev = nand_.program_page(dst, lpn, token0 + i, OpClass::DataWrite);
    double wd = chips_.schedule(ev.chip, t, ev.duration_us);
    auto old = map_.current_mapping(lpn);
    if (old) invalidate_data(lpn, *old);
    wd = std::max(wd, map_.update_on_write(lpn, dst.value, *this, wd));
    // Consistency rule: the overwritten LPN must not be predicted from the
    // old layout. Cleared only after the mapping lands; a GC triggered by
    // the allocation above retrains from the pre-write mapping, and a bit
    // it sets would outlive the invalidation.
    auto& model = map_.gtd()[entry].model;
    if (model) clear_bit_on_write(*model, uint32_t(lpn % kEntrySlots));
    done = std::max(done, wd);
    galloc_.group(g).writes_since_gc++;
    placed.push_back(Placed{lpn, a.vppn.value});

    // Deferred cross-group GC: the encroaching write had to land first.
    if (!pending_gc_.empty()) {
      std::vector<uint32_t> pend;
      pend.swap(pending_gc_);
      for (uint32_t victim : pend) t = run_gc(victim, t);
      done = std::max(done, t);
    }
    t = gc_pressure_check(g, t);
    done = std::max(done, t);
  }

  // Sequential initialization on each per-entry run of consecutive VPPNs.
  // GC may have relocated some pages mid-request; only pages whose
  // placement is still current join a run.
  size_t i = 0;
  while (i < placed.size()) {
    auto still_current = [&](const Placed& p) {
      auto m = map_.current_mapping(p.lpn);
      return m && *m == vppn_to_ppn(Vppn{p.vppn}, geom_).value;
    };
    if (!still_current(placed[i])) {
      i++;
      continue;
    }
    size_t j = i + 1;
    while (j < placed.size() &&
           placed[j].lpn == placed[j - 1].lpn + 1 &&
           placed[j].vppn == placed[j - 1].vppn + 1 &&
           placed[j].lpn / kEntrySlots == placed[i].lpn / kEntrySlots &&
           still_current(placed[j])) {
      j++;
    }
    uint32_t entry = uint32_t(placed[i].lpn / kEntrySlots);
    sequential_init(map_.gtd()[entry].model,
                    uint32_t(placed[i].lpn % kEntrySlots), uint32_t(j - i),
                    Vppn{placed[i].vppn}, cfg_.max_pieces);
    i = j;
  }
  return done;
}

void LearnedFtl::fill_metrics(MetricsReport& r) const {
  r.cmt_lookups = map_.cmt().lookups();
  r.cmt_hits = map_.cmt().hits();
  r.cmt_hit_ratio =
      r.cmt_lookups ? double(r.cmt_hits) / double(r.cmt_lookups) : 0.0;
  r.model_hits = model_hits_;
  r.model_hit_ratio =
      cmt_misses_ ? double(model_hits_) / double(cmt_misses_) : 0.0;
  r.model_memory_bytes = kModelBytes * uint64_t(map_.entries());
  r.cmt_capacity_entries = map_.cmt().capacity();
  r.max_translation_writes_per_gc = max_tr_writes_gc_;
}

void LearnedFtl::reset_variant_stats() {
  map_.cmt().reset_stats();
  cmt_misses_ = 0;
  model_hits_ = 0;
  max_tr_writes_gc_ = 0;
}

std::string LearnedFtl::dump_models() const {
  nlohmann::json j;
  for (uint32_t e = 0; e < map_.entries(); e++) {
    const auto& model = map_.gtd()[e].model;
    if (!model) continue;
    nlohmann::json m;
    m["base_vppn"] = model->base.value;
    m["bitmap_popcount"] = model->bitmap.count();
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& p : model->params.pieces) {
      pieces.push_back({{"off", p.off}, {"k", p.k()}, {"b", p.b()}});
    }
    m["pieces"] = pieces;
    j[std::to_string(e)] = m;
  }
  return j.dump(2);
}

}  // namespace ftlbench
