#include "ftlbench/learned.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ftlbench/errors.hpp"

namespace ftlbench {

namespace half {

uint16_t encode(double v) {
  if (std::isnan(v)) return 0x7e00;
  uint16_t sign = std::signbit(v) ? 0x8000 : 0;
  double a = std::fabs(v);
  if (a >= 65520.0) return sign | 0x7c00;  // rounds to infinity
  if (a < 0x1p-25) return sign;            // rounds to zero
  if (a < 0x1p-14) {
    // Subnormal range, quantum 2^-24.
    auto m = uint32_t(std::nearbyint(a * 0x1p24));
    if (m == 1024) return sign | 0x0400;
    return sign | uint16_t(m);
  }
  int e = 0;
  double f = std::frexp(a, &e);  // a = f * 2^e, f in [0.5, 1)
  auto m = uint32_t(std::nearbyint(f * 2048.0));  // in [1024, 2048]
  if (m == 2048) {
    m = 1024;
    e++;
  }
  int biased = e - 1 + 15;
  if (biased >= 31) return sign | 0x7c00;
  return sign | uint16_t(biased << 10) | uint16_t(m - 1024);
}

double decode(uint16_t bits) {
  uint32_t sign = bits >> 15;
  uint32_t be = (bits >> 10) & 0x1f;
  uint32_t m = bits & 0x3ff;
  double v;
  if (be == 0) {
    v = m * 0x1p-24;
  } else if (be == 31) {
    v = m ? std::numeric_limits<double>::quiet_NaN()
          : std::numeric_limits<double>::infinity();
  } else {
    v = double(1024 + m) * std::ldexp(1.0, int(be) - 25);
  }
  return sign ? -v : v;
}

}  // namespace half

int64_t round_half_even(double v) { return int64_t(std::nearbyint(v)); }

namespace plr {

std::vector<RawPiece> segment(const std::vector<double>& xs,
                              const std::vector<double>& ys, double epsilon,
                              size_t max_pieces) {
  std::vector<RawPiece> out;
  const size_t n = xs.size();
  size_t i = 0;
  while (i < n) {
    if (max_pieces != 0 && out.size() == max_pieces) break;
    const double x0 = xs[i];
    const double y0 = ys[i];
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    size_t j = i + 1;
    for (; j < n; j++) {
      const double dx = xs[j] - x0;
      const double lo_j = (ys[j] - y0 - epsilon) / dx;
      const double hi_j = (ys[j] - y0 + epsilon) / dx;
      const double nlo = std::max(lo, lo_j);
      const double nhi = std::min(hi, hi_j);
      if (nlo > nhi) break;
      lo = nlo;
      hi = nhi;
    }
    RawPiece p;
    p.first = i;
    p.last = j - 1;
    p.b = y0;
    if (j == i + 1) {
      p.k = 0.0;  // single point, slope unconstrained
    } else {
      p.k = (lo + hi) / 2.0;
    }
    out.push_back(p);
    i = j;
  }
  return out;
}

}  // namespace plr

Piece make_piece(double k, double b, uint32_t off) {
  Piece p;
  p.k_bits = half::encode(k);
  p.b_bits = half::encode(b);
  p.off = uint16_t(off);
  return p;
}

ModelParams train_plr(const std::vector<TrainingPair>& pairs,
                      size_t max_pieces, double epsilon) {
  ModelParams model;
  if (pairs.empty()) return model;
  std::vector<double> xs(pairs.size()), ys(pairs.size());
  for (size_t i = 0; i < pairs.size(); i++) {
    xs[i] = double(pairs[i].lpn_off);
    ys[i] = double(pairs[i].vppn_off);
  }
  auto raw = plr::segment(xs, ys, epsilon, max_pieces);
  model.pieces.reserve(raw.size());
  for (const auto& rp : raw) {
    model.pieces.push_back(make_piece(rp.k, rp.b, pairs[rp.first].lpn_off));
  }
  return model;
}

// Index of the piece covering lpn_off: greatest off <= lpn_off.
static ptrdiff_t covering_piece(const ModelParams& model, uint32_t lpn_off) {
  const auto& ps = model.pieces;
  auto it = std::upper_bound(
      ps.begin(), ps.end(), lpn_off,
      [](uint32_t v, const Piece& p) { return v < p.off; });
  if (it == ps.begin()) return -1;
  return (it - ps.begin()) - 1;
}

std::optional<int64_t> predict_offset(const ModelParams& model,
                                      uint32_t lpn_off) {
  ptrdiff_t idx = covering_piece(model, lpn_off);
  if (idx < 0) return std::nullopt;
  const Piece& p = model.pieces[size_t(idx)];
  double y = p.k() * (double(lpn_off) - double(p.off)) + p.b();
  if (!std::isfinite(y)) return std::nullopt;
  return round_half_even(y);
}

Bitmap evaluate_and_set_bitmap(const ModelParams& model,
                               const std::vector<TrainingPair>& pairs) {
  Bitmap bm;
  for (const auto& pr : pairs) {
    auto y = predict_offset(model, pr.lpn_off);
    if (y && *y == pr.vppn_off) bm.set(pr.lpn_off);
  }
  return bm;
}

std::optional<Ppn> predict(const EntryModel& entry, uint32_t lpn_off,
                           const FlashGeometry& geom) {
  if (lpn_off >= kEntrySlots) {
    throw AddressError("predict: lpn_off out of entry range");
  }
  if (!entry.bitmap.test(lpn_off)) return std::nullopt;
  auto y = predict_offset(entry.params, lpn_off);
  if (!y) {
    throw InternalError("predict: bit set at offset " +
                        std::to_string(lpn_off) + " but no covering piece");
  }
  int64_t v = int64_t(entry.base.value) + *y;
  if (v < 0 || uint64_t(v) >= geom.total_pages()) {
    throw InternalError("predict: bit set but predicted vppn out of range");
  }
  return vppn_to_ppn(Vppn{uint64_t(v)}, geom);
}

void clear_bit_on_write(EntryModel& entry, uint32_t lpn_off) {
  entry.bitmap.reset(lpn_off);
}

// Coverage boundary of piece i: the next piece's off, or the entry end.
static uint32_t piece_boundary(const ModelParams& m, size_t i) {
  return (i + 1 < m.pieces.size()) ? m.pieces[i + 1].off : kEntrySlots;
}

static void zero_bits(Bitmap& bm, uint32_t from, uint32_t to) {
  for (uint32_t i = from; i < to; i++) bm.reset(i);
}

void in_place_update(EntryModel& entry, Piece piece, uint32_t range_end,
                     const std::vector<TrainingPair>& run_pairs,
                     size_t max_pieces) {
  auto& ps = entry.params.pieces;
  const uint32_t s = piece.off;
  const uint32_t e = range_end;

  // Drop pieces fully shadowed by [s, e); a partially overlapped follower
  // gets its off raised past the conflict (intercept rebased so that its
  // surviving range predicts the same values).
  for (size_t i = 0; i < ps.size();) {
    if (ps[i].off < s || ps[i].off >= e) {
      i++;
      continue;
    }
    uint32_t boundary = piece_boundary(entry.params, i);
    if (boundary <= e) {
      ps.erase(ps.begin() + ptrdiff_t(i));
      continue;
    }
    // Raise off to e. Rebasing shifts the anchor: b' = k*(e - off) + b.
    double k = ps[i].k();
    double exact_b = k * (double(e) - double(ps[i].off)) + ps[i].b();
    Piece raised = make_piece(k, exact_b, e);
    // If the rebased intercept does not survive binary16, the surviving
    // range would predict different values than the bits were verified
    // against; those bits must go.
    if (raised.b() != exact_b || raised.k() != k) {
      zero_bits(entry.bitmap, e, boundary);
    }
    ps[i] = raised;
    i++;
  }

  // Insert keeping offs strictly increasing.
  auto pos = std::lower_bound(
      ps.begin(), ps.end(), s,
      [](const Piece& p, uint32_t v) { return p.off < v; });
  ps.insert(pos, piece);

  // The region from e up to the next piece now resolves to the new piece,
  // which is only validated on [s, e).
  {
    ptrdiff_t idx = covering_piece(entry.params, e < kEntrySlots ? e : e - 1);
    if (e < kEntrySlots && idx >= 0 && ps[size_t(idx)].off == s) {
      zero_bits(entry.bitmap, e, piece_boundary(entry.params, size_t(idx)));
    }
  }

  // Re-derive the affected range from the run itself, through the
  // quantized pipeline.
  zero_bits(entry.bitmap, s, e);
  for (const auto& pr : run_pairs) {
    if (pr.lpn_off < s || pr.lpn_off >= e) continue;
    auto y = predict_offset(entry.params, pr.lpn_off);
    if (y && *y == pr.vppn_off) entry.bitmap.set(pr.lpn_off);
  }

  // Piece pressure: evict the piece with the fewest useful bits, measured
  // after the run's bits are in place. The evicted region merges into its
  // predecessor's coverage, whose line was never verified there, so its
  // bits are zeroed.
  if (max_pieces != 0 && ps.size() > max_pieces) {
    size_t victim = 0;
    size_t victim_bits = SIZE_MAX;
    for (size_t i = 0; i < ps.size(); i++) {
      uint32_t from = ps[i].off;
      uint32_t to = piece_boundary(entry.params, i);
      size_t bits = 0;
      for (uint32_t b = from; b < to; b++) {
        if (entry.bitmap.test(b)) bits++;
      }
      if (bits < victim_bits) {
        victim_bits = bits;
        victim = i;
      }
    }
    uint32_t from = ps[victim].off;
    uint32_t to = piece_boundary(entry.params, victim);
    zero_bits(entry.bitmap, from, to);
    ps.erase(ps.begin() + ptrdiff_t(victim));
  }
}

bool sequential_init(std::optional<EntryModel>& entry, uint32_t first_off,
                     uint32_t length, Vppn first_vppn, size_t max_pieces) {
  if (length == 0 || first_off >= kEntrySlots) return false;
  if (first_off + length > kEntrySlots) {
    throw AddressError("sequential_init: run crosses the entry boundary");
  }
  if (!entry) {
    entry.emplace();
    entry->base = first_vppn;
  }
  uint32_t l_old = uint32_t(entry->bitmap.count());
  if (l_old >= length) return false;

  int64_t delta = int64_t(first_vppn.value) - int64_t(entry->base.value);
  Piece piece = make_piece(1.0, double(delta), first_off);
  if (!std::isfinite(piece.b())) return false;  // offset too far for binary16

  std::vector<TrainingPair> run(length);
  for (uint32_t i = 0; i < length; i++) {
    run[i] = TrainingPair{first_off + i, delta + i};
  }
  in_place_update(*entry, piece, first_off + length, run, max_pieces);
  return true;
}

}  // namespace ftlbench
