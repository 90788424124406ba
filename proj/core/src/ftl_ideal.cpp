#include <algorithm>

#include "ftlbench/errors.hpp"
#include "ftl_variants.hpp"

namespace ftlbench {

namespace {

// GC relocation for the ideal FTL: only data pages exist.
class IdealHooks : public DynamicAllocator::GcHooks {
 public:
  IdealHooks(std::vector<std::optional<uint64_t>>& map, NandArray& nand,
             ChipTimelines& chips, DynamicAllocator& alloc,
             const FlashGeometry& geom)
      : map_(map), nand_(nand), chips_(chips), alloc_(alloc), geom_(geom) {}

  double move_data(uint64_t lpn, uint64_t token, Ppn old_ppn,
                   double t) override {
    (void)old_ppn;
    auto dst = alloc_.allocate_data(chips_);
    if (!dst) throw CapacityError("ideal GC: no destination page");
    auto ev = nand_.program_page(*dst, lpn, token, OpClass::GcWrite);
    double done = chips_.schedule(ev.chip, t, ev.duration_us);
    map_[lpn] = dst->value;
    return done;
  }

  double move_translation(uint32_t, Ppn, double) override {
    throw InternalError("ideal FTL has no translation pages");
  }

 private:
  std::vector<std::optional<uint64_t>>& map_;
  NandArray& nand_;
  ChipTimelines& chips_;
  DynamicAllocator& alloc_;
  const FlashGeometry& geom_;
};

}  // namespace

IdealFtl::IdealFtl(const SimConfig& cfg)
    : Ftl(cfg),
      map_(logical_pages_),
      alloc_(geom_, cfg.dynamic_reserve_blocks) {}

Ftl::PageRead IdealFtl::read_one(uint64_t lpn, uint32_t, double t) {
  PageRead pr;
  lookups_++;
  if (!map_[lpn]) {
    pr.completion = t;
    return pr;  // never written
  }
  hits_++;
  auto [oob, ev] = nand_.read_page(Ppn{*map_[lpn]}, OpClass::DataRead);
  pr.completion = chips_.schedule(ev.chip, t, ev.duration_us);
  pr.token = oob.token;
  pr.mapped = true;
  pr.cls = ReadClass::Single;
  pr.src = HitSource::Cmt;
  return pr;
}

double IdealFtl::gc_once(double t) {
  IdealHooks hooks(map_, nand_, chips_, alloc_, geom_);
  count_gc();
  return alloc_.collect_once(nand_, chips_, hooks, translation_lpn_base_, t);
}

double IdealFtl::ensure_space(double t) {
  while (alloc_.below_watermark(cfg_.gc_free_watermark)) {
    if (!alloc_.select_victim(nand_)) break;
    t = gc_once(t);
  }
  return t;
}

double IdealFtl::write_pages(uint64_t lpn0, uint32_t npages, uint64_t token0,
                             double t) {
  double done = t;
  for (uint32_t i = 0; i < npages; i++) {
    uint64_t lpn = lpn0 + i;
    t = ensure_space(t);
    auto dst = alloc_.allocate_data(chips_);
    if (!dst) {
      t = gc_once(t);
      dst = alloc_.allocate_data(chips_);
      if (!dst) throw CapacityError("ideal FTL: device full");
    }
    auto ev = nand_.program_page(*dst, lpn, token0 + i, OpClass::DataWrite);
    done = std::max(done, chips_.schedule(ev.chip, t, ev.duration_us));
    if (map_[lpn]) nand_.invalidate_page(Ppn{*map_[lpn]});
    map_[lpn] = dst->value;
  }
  return done;
}

void IdealFtl::fill_metrics(MetricsReport& r) const {
  r.cmt_lookups = lookups_;
  r.cmt_hits = hits_;
  r.cmt_hit_ratio = lookups_ ? double(hits_) / double(lookups_) : 0.0;
  r.model_hits = 0;
  r.model_hit_ratio = 0.0;
  r.model_memory_bytes = 0;
  r.cmt_capacity_entries = logical_pages_;  // the whole table is resident
}

void IdealFtl::reset_variant_stats() { lookups_ = hits_ = 0; }

}  // namespace ftlbench
