#include <algorithm>
#include <cmath>

#include "ftlbench/errors.hpp"
#include "ftl_variants.hpp"

namespace ftlbench {

namespace {
constexpr size_t kMaxSegmentPoints = 256;
}

// GC relocation: moved data pages are re-learned like a miniature buffer
// flush once the episode finishes.
class LeaFtl::Hooks : public DynamicAllocator::GcHooks {
 public:
  explicit Hooks(LeaFtl& f) : f_(f) {}

  double move_data(uint64_t lpn, uint64_t token, Ppn, double t) override {
    auto dst = f_.alloc_.allocate_data(f_.chips_);
    if (!dst) throw CapacityError("leaftl GC: no destination page");
    auto ev = f_.nand_.program_page(*dst, lpn, token, OpClass::GcWrite);
    double done = f_.chips_.schedule(ev.chip, t, ev.duration_us);
    f_.truth_[lpn] = dst->value;
    moved.emplace_back(lpn, ppn_to_vppn(*dst, f_.geom_).value);
    return done;
  }

  double move_translation(uint32_t entry, Ppn, double t) override {
    auto dst = f_.alloc_.allocate_translation();
    if (!dst) throw CapacityError("leaftl GC: no translation page");
    auto ev = f_.nand_.program_page(
        *dst, f_.translation_lpn_base_ + entry, 0, OpClass::GcWrite);
    double done = f_.chips_.schedule(ev.chip, t, ev.duration_us);
    f_.entry_page_[entry] = *dst;
    return done;
  }

  std::vector<std::pair<uint64_t, uint64_t>> moved;  // (lpn, vppn)

 private:
  LeaFtl& f_;
};

LeaFtl::LeaFtl(const SimConfig& cfg)
    : Ftl(cfg),
      truth_(logical_pages_),
      lsmt_(cfg.gtd_entries()),
      entry_page_(cfg.gtd_entries()),
      alloc_(geom_, cfg.dynamic_reserve_blocks),
      cache_budget_(cfg.leaftl_cache_segments()) {}

bool LeaFtl::cache_resident(uint32_t entry) {
  auto it = cache_index_.find(entry);
  if (it == cache_index_.end()) return false;
  cache_lru_.splice(cache_lru_.begin(), cache_lru_, it->second);
  return true;
}

static size_t lsmt_segments(const LeaFtl::Lsmt& l) {
  size_t n = 0;
  for (const auto& lv : l) n += lv.size();
  return n;
}

void LeaFtl::cache_admit(uint32_t entry) {
  if (cache_index_.count(entry)) return;
  cache_lru_.push_front(entry);
  cache_index_[entry] = cache_lru_.begin();
  resident_segments_ += lsmt_segments(lsmt_[entry]);
  while (resident_segments_ > cache_budget_ && cache_lru_.size() > 1) {
    uint32_t victim = cache_lru_.back();
    cache_lru_.pop_back();
    cache_index_.erase(victim);
    resident_segments_ -= lsmt_segments(lsmt_[victim]);
  }
}

void LeaFtl::insert_level(uint32_t entry, size_t level, Segment seg) {
  if (level >= lsmt_[entry].size()) lsmt_[entry].resize(level + 1);
  std::vector<Segment> demoted;
  {
    auto& lv = lsmt_[entry][level];
    for (size_t i = 0; i < lv.size();) {
      const Segment& old = lv[i];
      bool overlap = !(old.start_lpn + old.length < seg.start_lpn ||
                       seg.start_lpn + seg.length < old.start_lpn);
      if (overlap) {
        demoted.push_back(old);
        lv.erase(lv.begin() + ptrdiff_t(i));
      } else {
        i++;
      }
    }
    auto pos = std::lower_bound(lv.begin(), lv.end(), seg.start_lpn,
                                [](const Segment& s, uint32_t v) {
                                  return s.start_lpn < v;
                                });
    lv.insert(pos, seg);
  }
  // Recursing after releasing the level reference: deeper inserts may
  // resize the level vector.
  for (const Segment& d : demoted) insert_level(entry, level + 1, d);
}

const LeaFtl::Segment* LeaFtl::lookup_segment(uint32_t entry,
                                              uint64_t lpn) const {
  uint32_t off = uint32_t(lpn % kEntrySlots);
  for (const auto& lv : lsmt_[entry]) {
    auto it = std::upper_bound(lv.begin(), lv.end(), off,
                               [](uint32_t v, const Segment& s) {
                                 return v < s.start_lpn;
                               });
    if (it == lv.begin()) continue;
    const Segment& s = *(it - 1);
    if (off <= uint32_t(s.start_lpn) + s.length) return &s;
  }
  return nullptr;
}

std::vector<LeaFtl::Segment> LeaFtl::train_batch(
    const std::vector<std::pair<uint64_t, uint64_t>>& lpn_vppn) const {
  // Caller groups pairs by translation page. Offsets are entry-relative.
  std::vector<Segment> out;
  if (lpn_vppn.empty()) return out;
  std::vector<double> xs(lpn_vppn.size()), ys(lpn_vppn.size());
  for (size_t i = 0; i < lpn_vppn.size(); i++) {
    xs[i] = double(lpn_vppn[i].first % kEntrySlots);
    ys[i] = double(lpn_vppn[i].second);
  }
  auto raw = plr::segment(xs, ys, cfg_.leaftl_error_bound, 0);
  for (const auto& rp : raw) {
    // One learned segment indexes at most 256 mappings; longer fits are
    // chopped along the same fitted line.
    for (size_t first = rp.first; first <= rp.last;
         first += kMaxSegmentPoints) {
      size_t last = std::min(rp.last, first + kMaxSegmentPoints - 1);
      Segment s;
      s.start_lpn = uint32_t(xs[first]);
      s.slope = rp.k;
      s.length = uint16_t(uint32_t(xs[last]) - s.start_lpn);
      s.intercept = rp.k * (xs[first] - xs[rp.first]) + rp.b;
      int64_t max_err = 0;
      bool approx = false;
      for (size_t i = first; i <= last; i++) {
        double pred = s.slope * (xs[i] - double(s.start_lpn)) + s.intercept;
        int64_t pi = round_half_even(pred);
        int64_t err = pi - int64_t(ys[i]);
        max_err = std::max(max_err, std::abs(err));
        if (err != 0) approx = true;
        max_err = std::max(max_err,
                           int64_t(std::ceil(std::fabs(pred - ys[i]))));
      }
      s.approximate = approx;
      s.max_err = int32_t(max_err);
      out.push_back(s);
    }
  }
  return out;
}

double LeaFtl::flush_segments(uint32_t entry, std::vector<Segment> segs,
                              double t) {
  if (segs.empty()) return t;
  bool resident = cache_index_.count(entry) != 0;
  size_t before = lsmt_segments(lsmt_[entry]);
  for (auto& s : segs) insert_level(entry, 0, s);
  if (resident) {
    resident_segments_ += lsmt_segments(lsmt_[entry]) - before;
  }
  // Persist the updated log-structured table for this translation page.
  if (entry_page_[entry]) {
    auto [oob, ev] = nand_.read_page(*entry_page_[entry],
                                     OpClass::TranslationRead);
    (void)oob;
    t = chips_.schedule(ev.chip, t, ev.duration_us);
    nand_.invalidate_page(*entry_page_[entry]);
  }
  auto dst = alloc_.allocate_translation();
  if (!dst) {
    t = gc_once(t);
    dst = alloc_.allocate_translation();
    if (!dst) throw CapacityError("leaftl: no room for translation write");
  }
  auto ev = nand_.program_page(*dst, translation_lpn_base_ + entry, 0,
                               OpClass::TranslationWrite);
  t = chips_.schedule(ev.chip, t, ev.duration_us);
  entry_page_[entry] = *dst;
  return t;
}

double LeaFtl::gc_once(double t) {
  Hooks hooks(*this);
  count_gc();
  t = alloc_.collect_once(nand_, chips_, hooks, translation_lpn_base_, t);
  // Learn the relocated mappings, grouped by translation page.
  std::sort(hooks.moved.begin(), hooks.moved.end());
  size_t i = 0;
  while (i < hooks.moved.size()) {
    uint32_t entry = uint32_t(hooks.moved[i].first / kEntrySlots);
    size_t j = i;
    while (j < hooks.moved.size() &&
           uint32_t(hooks.moved[j].first / kEntrySlots) == entry) {
      j++;
    }
    std::vector<std::pair<uint64_t, uint64_t>> group(
        hooks.moved.begin() + ptrdiff_t(i), hooks.moved.begin() + ptrdiff_t(j));
    t = flush_segments(entry, train_batch(group), t);
    i = j;
  }
  return t;
}

double LeaFtl::ensure_space(double t) {
  while (alloc_.below_watermark(cfg_.gc_free_watermark)) {
    if (!alloc_.select_victim(nand_)) break;
    t = gc_once(t);
  }
  return t;
}

double LeaFtl::flush_buffer(double t) {
  if (buffer_.empty()) return t;
  // Sorted by LPN (map order); writes go out back to back so the VPPNs of
  // a sorted batch are as contiguous as the chip allocator permits.
  std::vector<std::pair<uint64_t, uint64_t>> batch(buffer_.begin(),
                                                   buffer_.end());
  buffer_.clear();
  std::vector<std::pair<uint64_t, uint64_t>> placed;  // (lpn, vppn)
  placed.reserve(batch.size());
  std::vector<std::pair<uint64_t, Ppn>> programmed;   // (lpn, ppn)
  programmed.reserve(batch.size());
  double done = t;
  for (const auto& [lpn, token] : batch) {
    t = ensure_space(t);
    auto dst = alloc_.allocate_data(chips_);
    if (!dst) {
      t = gc_once(t);
      dst = alloc_.allocate_data(chips_);
      if (!dst) throw CapacityError("leaftl: device full");
    }
    auto ev = nand_.program_page(*dst, lpn, token, OpClass::DataWrite);
    done = std::max(done, chips_.schedule(ev.chip, t, ev.duration_us));
    if (truth_[lpn]) nand_.invalidate_page(Ppn{*truth_[lpn]});
    truth_[lpn] = dst->value;
    placed.emplace_back(lpn, ppn_to_vppn(*dst, geom_).value);
    programmed.emplace_back(lpn, *dst);
  }
  t = done;
  // Train one group of segments per touched translation page, stamp each
  // page's error interval, and persist the segments.
  size_t i = 0;
  while (i < placed.size()) {
    uint32_t entry = uint32_t(placed[i].first / kEntrySlots);
    size_t j = i;
    while (j < placed.size() &&
           uint32_t(placed[j].first / kEntrySlots) == entry) {
      j++;
    }
    std::vector<std::pair<uint64_t, uint64_t>> group(
        placed.begin() + ptrdiff_t(i), placed.begin() + ptrdiff_t(j));
    auto segs = train_batch(group);
    for (size_t p = i; p < j; p++) {
      uint32_t off = uint32_t(programmed[p].first % kEntrySlots);
      for (const auto& s : segs) {
        if (off >= s.start_lpn && off <= uint32_t(s.start_lpn) + s.length) {
          if (s.approximate) {
            nand_.set_error_interval(programmed[p].second, -s.max_err,
                                     s.max_err);
          }
          break;
        }
      }
    }
    t = flush_segments(entry, std::move(segs), t);
    cache_admit(entry);
    i = j;
  }
  return t;
}

double LeaFtl::write_pages(uint64_t lpn0, uint32_t npages, uint64_t token0,
                           double t) {
  for (uint32_t i = 0; i < npages; i++) {
    buffer_[lpn0 + i] = token0 + i;
    if (buffer_.size() >= cfg_.leaftl_buffer_pages) t = flush_buffer(t);
  }
  return t;
}

void LeaFtl::quiesce(double t) { flush_buffer(t); }

Ftl::PageRead LeaFtl::read_one(uint64_t lpn, uint32_t, double t) {
  PageRead pr;
  cache_lookups_++;
  // The data buffer holds the newest copy until flush.
  auto bit = buffer_.find(lpn);
  if (bit != buffer_.end()) {
    cache_hits_++;
    pr.completion = t;
    pr.token = bit->second;
    pr.mapped = true;
    pr.cls = ReadClass::Single;
    pr.src = HitSource::Cmt;
    return pr;
  }
  uint32_t entry = uint32_t(lpn / kEntrySlots);
  bool resident = cache_resident(entry);
  bool miss_read = false;
  if (!resident) {
    if (entry_page_[entry]) {
      auto [oob, ev] =
          nand_.read_page(*entry_page_[entry], OpClass::TranslationRead);
      (void)oob;
      t = chips_.schedule(ev.chip, t, ev.duration_us);
      miss_read = true;
    }
    cache_admit(entry);
  } else {
    cache_hits_++;
  }
  if (!truth_[lpn]) {
    pr.completion = t;
    return pr;  // never written
  }
  const Segment* seg = lookup_segment(entry, lpn);
  if (!seg) {
    throw InternalError("leaftl: mapped lpn without covering segment");
  }
  uint64_t actual = *truth_[lpn];
  double raw = seg->slope * (double(lpn % kEntrySlots) -
                             double(seg->start_lpn)) +
               seg->intercept;
  int64_t pred_v = round_half_even(raw);
  bool in_range = pred_v >= 0 && uint64_t(pred_v) < geom_.total_pages();
  Ppn pred = in_range ? vppn_to_ppn(Vppn{uint64_t(pred_v)}, geom_) : Ppn{0};
  if (in_range && pred.value == actual) {
    auto [oob, ev] = nand_.read_page(pred, OpClass::DataRead);
    pr.completion = chips_.schedule(ev.chip, t, ev.duration_us);
    pr.token = oob.token;
    pr.mapped = true;
    pr.cls = miss_read ? ReadClass::Double : ReadClass::Single;
    pr.src = HitSource::ModelCache;
    if (!miss_read) model_hits_++;
    return pr;
  }
  // Misprediction: probe the predicted page for its OOB error interval,
  // then fetch the real page.
  auto probe = nand_.charge_read(pred, OpClass::DataRead);
  t = chips_.schedule(probe.chip, t, probe.duration_us);
  auto [oob, ev] = nand_.read_page(Ppn{actual}, OpClass::DataRead);
  pr.completion = chips_.schedule(ev.chip, t, ev.duration_us);
  pr.token = oob.token;
  pr.mapped = true;
  pr.cls = miss_read ? ReadClass::Triple : ReadClass::Double;
  pr.src = HitSource::None;
  return pr;
}

void LeaFtl::fill_metrics(MetricsReport& r) const {
  r.cmt_lookups = cache_lookups_;
  r.cmt_hits = cache_hits_;
  r.cmt_hit_ratio =
      cache_lookups_ ? double(cache_hits_) / double(cache_lookups_) : 0.0;
  r.model_hits = model_hits_;
  uint64_t classified = single_reads_ + double_reads_ + triple_reads_;
  r.model_hit_ratio = classified ? double(model_hits_) / double(classified)
                                 : 0.0;
  r.model_memory_bytes = 0;
  r.cmt_capacity_entries = cache_budget_;
}

void LeaFtl::reset_variant_stats() {
  cache_lookups_ = cache_hits_ = model_hits_ = 0;
}

}  // namespace ftlbench
