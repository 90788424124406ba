#include <algorithm>

#include "ftlbench/errors.hpp"
#include "ftl_variants.hpp"

namespace ftlbench {

// GC relocation for the demand-based baselines. Moved data pages re-enter
// the mapping as dirty CMT upserts, so heavy GC shows up as translation
// write-back pressure, exactly like the real designs.
class DemandFtl::Hooks : public DynamicAllocator::GcHooks {
 public:
  explicit Hooks(DemandFtl& f) : f_(f) {}

  double move_data(uint64_t lpn, uint64_t token, Ppn, double t) override {
    auto dst = f_.alloc_.allocate_data(f_.chips_);
    if (!dst) throw CapacityError("demand GC: no destination page");
    auto ev = f_.nand_.program_page(*dst, lpn, token, OpClass::GcWrite);
    double done = f_.chips_.schedule(ev.chip, t, ev.duration_us);
    return std::max(done, f_.map_.update_on_write(lpn, dst->value, f_, done));
  }

  double move_translation(uint32_t entry, Ppn, double t) override {
    auto dst = f_.alloc_.allocate_translation();
    if (!dst) throw CapacityError("demand GC: no translation page");
    auto ev = f_.nand_.program_page(*dst, f_.translation_lpn_base_ + entry, 0,
                                    OpClass::GcWrite);
    double done = f_.chips_.schedule(ev.chip, t, ev.duration_us);
    f_.map_.gtd()[entry].translation_ppn = *dst;
    return done;
  }

 private:
  DemandFtl& f_;
};

DemandFtl::DemandFtl(const SimConfig& cfg, bool prefetch)
    : Ftl(cfg),
      prefetch_(prefetch),
      map_(logical_pages_, cfg.gtd_entries(), cfg.cmt_capacity()),
      alloc_(geom_, cfg.dynamic_reserve_blocks) {}

double DemandFtl::read_translation(uint32_t entry, double t) {
  auto ppn = map_.gtd()[entry].translation_ppn;
  if (!ppn) throw InternalError("translation read without a page");
  auto [oob, ev] = nand_.read_page(*ppn, OpClass::TranslationRead);
  (void)oob;
  return chips_.schedule(ev.chip, t, ev.duration_us);
}

double DemandFtl::write_translation(uint32_t entry, double t) {
  auto dst = alloc_.allocate_translation();
  if (!dst) {
    t = gc_once(t);
    dst = alloc_.allocate_translation();
    if (!dst) throw CapacityError("no room for translation write");
  }
  auto& ge = map_.gtd()[entry];
  if (ge.translation_ppn) nand_.invalidate_page(*ge.translation_ppn);
  auto ev = nand_.program_page(*dst, translation_lpn_base_ + entry, 0,
                               OpClass::TranslationWrite);
  ge.translation_ppn = *dst;
  return chips_.schedule(ev.chip, t, ev.duration_us);
}

double DemandFtl::gc_once(double t) {
  Hooks hooks(*this);
  count_gc();
  return alloc_.collect_once(nand_, chips_, hooks, translation_lpn_base_, t);
}

double DemandFtl::ensure_space(double t) {
  while (alloc_.below_watermark(cfg_.gc_free_watermark)) {
    if (!alloc_.select_victim(nand_)) break;
    t = gc_once(t);
  }
  return t;
}

Ftl::PageRead DemandFtl::read_one(uint64_t lpn, uint32_t remaining, double t) {
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
  uint32_t len = prefetch_ ? remaining : 1;
  auto load = map_.load_mapping(lpn, len, *this, t);
  t = load.t;
  if (!load.ppn) {
    pr.completion = t;  // never written; the fetch (if any) found an empty slot
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

double DemandFtl::write_pages(uint64_t lpn0, uint32_t npages, uint64_t token0,
                              double t) {
  double done = t;
  for (uint32_t i = 0; i < npages; i++) {
    uint64_t lpn = lpn0 + i;
    t = ensure_space(t);
    auto dst = alloc_.allocate_data(chips_);
    if (!dst) {
      t = gc_once(t);
      dst = alloc_.allocate_data(chips_);
      if (!dst) throw CapacityError("demand FTL: device full");
    }
    auto ev = nand_.program_page(*dst, lpn, token0 + i, OpClass::DataWrite);
    double wd = chips_.schedule(ev.chip, t, ev.duration_us);
    auto old = map_.current_mapping(lpn);
    if (old) nand_.invalidate_page(Ppn{*old});
    wd = std::max(wd, map_.update_on_write(lpn, dst->value, *this, wd));
    done = std::max(done, wd);
  }
  return done;
}

void DemandFtl::fill_metrics(MetricsReport& r) const {
  r.cmt_lookups = map_.cmt().lookups();
  r.cmt_hits = map_.cmt().hits();
  r.cmt_hit_ratio =
      r.cmt_lookups ? double(r.cmt_hits) / double(r.cmt_lookups) : 0.0;
  r.model_hits = 0;
  r.model_hit_ratio = 0.0;
  r.model_memory_bytes = 0;
  r.cmt_capacity_entries = map_.cmt().capacity();
}

void DemandFtl::reset_variant_stats() { map_.cmt().reset_stats(); }

}  // namespace ftlbench
