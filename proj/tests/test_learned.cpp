#include <array>
#include <cmath>
#include <optional>

#include "doctest.h"
#include "ftlbench/errors.hpp"
#include "ftlbench/learned.hpp"
#include "ftlbench/workload.hpp"

using namespace ftlbench;

TEST_CASE("binary16 round-trips the integers models rely on") {
  for (int i = -2048; i <= 2048; i++) {
    CHECK(half::decode(half::encode(double(i))) == double(i));
  }
  // Beyond 2048 the quantum is 2.
  CHECK(half::decode(half::encode(2049.0)) == 2048.0);
  CHECK(half::decode(half::encode(2050.0)) == 2050.0);
  CHECK(half::decode(half::encode(0.5)) == 0.5);
  CHECK(half::decode(half::encode(1e9)) ==
        std::numeric_limits<double>::infinity());
  // Encoding a decoded value is a fixed point.
  Xorshift64Star rng(3);
  for (int i = 0; i < 2000; i++) {
    uint16_t bits = uint16_t(rng.next());
    double v = half::decode(bits);
    if (std::isnan(v)) continue;
    CHECK(half::decode(half::encode(v)) == v);
  }
}

TEST_CASE("round half to even") {
  CHECK(round_half_even(0.5) == 0);
  CHECK(round_half_even(1.5) == 2);
  CHECK(round_half_even(2.5) == 2);
  CHECK(round_half_even(-0.5) == 0);
  CHECK(round_half_even(3.2) == 3);
}

namespace {

std::vector<TrainingPair> identity_pairs(uint32_t n, uint32_t start = 0) {
  std::vector<TrainingPair> p;
  for (uint32_t i = 0; i < n; i++) {
    p.push_back(TrainingPair{start + i, int64_t(start) + i});
  }
  return p;
}

}  // namespace

TEST_CASE("train_plr fits an identity layout with one piece") {
  auto model = train_plr(identity_pairs(100));
  REQUIRE(model.pieces.size() == 1);
  CHECK(model.pieces[0].off == 0);
  CHECK(model.pieces[0].k() == 1.0);
  CHECK(model.pieces[0].b() == 0.0);
}

TEST_CASE("train_plr splits when the slope cone empties") {
  // Points (0,0),(1,1),(2,10): after (1,1) the cone is [0.5, 1.5]; point
  // (2,10) wants [4.75, 5.25], so a second piece starts at off 2.
  std::vector<TrainingPair> pairs{{0, 0}, {1, 1}, {2, 10}};
  auto model = train_plr(pairs, 8, 0.5);
  REQUIRE(model.pieces.size() == 2);
  CHECK(model.pieces[0].off == 0);
  CHECK(model.pieces[1].off == 2);
}

TEST_CASE("train_plr stops emitting pieces at the cap") {
  // Nine linear runs whose slope jumps exceed 2*epsilon.
  std::vector<TrainingPair> pairs;
  for (uint32_t run = 0; run < 9; run++) {
    for (uint32_t i = 0; i < 4; i++) {
      pairs.push_back(
          TrainingPair{run * 8 + i, int64_t(run) * 1000 + i});
    }
  }
  auto model = train_plr(pairs, 8, 0.5);
  CHECK(model.pieces.size() == 8);
  // The ninth run is simply uncovered: its offsets fall after the last
  // piece but predict the previous line, so evaluation rejects them.
  auto bm = evaluate_and_set_bitmap(model, pairs);
  for (uint32_t i = 0; i < 4; i++) CHECK(!bm.test(8 * 8 + i));
}

TEST_CASE("empty training input yields an empty model") {
  auto model = train_plr({});
  CHECK(model.pieces.empty());
  CHECK(evaluate_and_set_bitmap(model, {}).none());
}

TEST_CASE("bitmap evaluation marks exactly the reproducible pairs") {
  auto pairs = identity_pairs(64, 10);
  auto model = train_plr(pairs);
  auto bm = evaluate_and_set_bitmap(model, pairs);
  CHECK(bm.count() == 64);
  for (const auto& p : pairs) CHECK(bm.test(p.lpn_off));

  // Brute-force recount through the same pipeline.
  size_t accurate = 0;
  for (const auto& p : pairs) {
    auto y = predict_offset(model, p.lpn_off);
    if (y && *y == p.vppn_off) accurate++;
  }
  CHECK(accurate == bm.count());
}

TEST_CASE("predict is gated by the bitmap") {
  FlashGeometry geom{2, 2, 1, 8, 32, 4096};
  EntryModel entry;
  entry.base = Vppn{100};
  entry.params = train_plr(identity_pairs(16));
  entry.bitmap = evaluate_and_set_bitmap(entry.params, identity_pairs(16));

  auto hit = predict(entry, 7, geom);
  REQUIRE(hit.has_value());
  CHECK(ppn_to_vppn(*hit, geom).value == 107);

  entry.bitmap.reset(7);
  CHECK(!predict(entry, 7, geom).has_value());  // bit 0 -> fall back
  CHECK(!predict(entry, 200, geom).has_value());  // never trained

  // A set bit without a covering piece is an update bug.
  EntryModel broken;
  broken.bitmap.set(3);
  CHECK_THROWS_AS(predict(broken, 3, geom), InternalError);
}

TEST_CASE("clear_bit_on_write is idempotent and never sets") {
  EntryModel entry;
  entry.params = train_plr(identity_pairs(8));
  entry.bitmap = evaluate_and_set_bitmap(entry.params, identity_pairs(8));
  CHECK(entry.bitmap.test(3));
  clear_bit_on_write(entry, 3);
  CHECK(!entry.bitmap.test(3));
  clear_bit_on_write(entry, 3);
  CHECK(!entry.bitmap.test(3));
  CHECK(entry.bitmap.count() == 7);
}

TEST_CASE("central soundness: every set bit predicts its pair exactly") {
  // Random staircase layouts, the shape GC write-back produces when an
  // entry has holes.
  Xorshift64Star rng(77);
  for (int trial = 0; trial < 200; trial++) {
    std::vector<TrainingPair> pairs;
    int64_t v = int64_t(rng.below(200));
    for (uint32_t off = 0; off < kEntrySlots; off++) {
      if (rng.below(100) < 60) continue;  // hole
      pairs.push_back(TrainingPair{off, v});
      v += 1 + int64_t(rng.below(5));
    }
    auto model = train_plr(pairs, 8, 0.5);
    auto bm = evaluate_and_set_bitmap(model, pairs);
    for (const auto& p : pairs) {
      if (!bm.test(p.lpn_off)) continue;
      auto y = predict_offset(model, p.lpn_off);
      REQUIRE(y.has_value());
      REQUIRE(*y == p.vppn_off);
    }
  }
}

TEST_CASE("sequential_init creates a fresh slope-1 model") {
  std::optional<EntryModel> entry;
  bool applied = sequential_init(entry, 0, 16, Vppn{4096});
  CHECK(applied);
  REQUIRE(entry.has_value());
  CHECK(entry->base.value == 4096);
  CHECK(entry->bitmap.count() == 16);
  REQUIRE(entry->params.pieces.size() == 1);
  CHECK(entry->params.pieces[0].k() == 1.0);
}

TEST_CASE("sequential_init yields to a better-trained model") {
  std::optional<EntryModel> entry;
  entry.emplace();
  entry->base = Vppn{0};
  auto pairs = identity_pairs(300);
  entry->params = train_plr(pairs);
  entry->bitmap = evaluate_and_set_bitmap(entry->params, pairs);
  REQUIRE(entry->bitmap.count() == 300);

  auto before = entry->params.pieces;
  bool applied = sequential_init(entry, 400, 4, Vppn{900});
  CHECK(!applied);  // L_old = 300 >= 4
  CHECK(entry->params.pieces.size() == before.size());
  CHECK(entry->bitmap.count() == 300);
}

TEST_CASE("sequential_init over the whole entry") {
  std::optional<EntryModel> entry;
  bool applied = sequential_init(entry, 0, kEntrySlots, Vppn{8192});
  CHECK(applied);
  CHECK(entry->bitmap.count() == kEntrySlots);
  CHECK(entry->params.pieces.size() == 1);
  FlashGeometry geom{8, 8, 1, 8, 32, 4096};
  for (uint32_t off = 0; off < kEntrySlots; off++) {
    auto p = predict(*entry, off, geom);
    REQUIRE(p.has_value());
    CHECK(ppn_to_vppn(*p, geom).value == 8192 + off);
  }
  CHECK_THROWS_AS(sequential_init(entry, 500, 100, Vppn{0}), AddressError);
}

TEST_CASE("in_place_update structural rules") {
  EntryModel entry;
  entry.base = Vppn{0};

  // Insert into an empty model.
  auto run1 = identity_pairs(64, 0);
  in_place_update(entry, make_piece(1.0, 0.0, 0), 64, run1);
  CHECK(entry.params.pieces.size() == 1);
  CHECK(entry.bitmap.count() == 64);

  // Overlap the predecessor's tail: [32, 96) with a different intercept.
  std::vector<TrainingPair> run2;
  for (uint32_t i = 0; i < 64; i++) {
    run2.push_back(TrainingPair{32 + i, 1000 + i});
  }
  in_place_update(entry, make_piece(1.0, 1000.0, 32), 96, run2);
  REQUIRE(entry.params.pieces.size() == 2);
  CHECK(entry.params.pieces[0].off < entry.params.pieces[1].off);
  CHECK(entry.params.pieces[1].off == 32);
  // Predecessor keeps its head, loses its overlapped tail.
  for (uint32_t off = 0; off < 32; off++) CHECK(entry.bitmap.test(off));
  for (uint32_t off = 32; off < 96; off++) CHECK(entry.bitmap.test(off));
}

TEST_CASE("in_place_update post-state theorem under random churn") {
  // Shadow of the true mapping per offset; after every update, each set
  // bit must predict the shadow exactly.
  Xorshift64Star rng(123);
  for (int trial = 0; trial < 40; trial++) {
    EntryModel entry;
    entry.base = Vppn{0};
    std::array<int64_t, kEntrySlots> shadow{};
    for (int step = 0; step < 60; step++) {
      uint32_t start = uint32_t(rng.below(kEntrySlots));
      uint32_t len = 1 + uint32_t(rng.below(kEntrySlots - start));
      if (len > 96) len = 96;
      auto base_v = int64_t(rng.below(50000));
      std::vector<TrainingPair> run;
      for (uint32_t i = 0; i < len; i++) {
        entry.bitmap.reset(start + i);  // the write path clears first
        shadow[start + i] = base_v + i;
        run.push_back(TrainingPair{start + i, base_v + i});
      }
      in_place_update(entry, make_piece(1.0, double(base_v), start),
                      start + len, run);
      REQUIRE(entry.params.pieces.size() <= kDefaultMaxPieces);
      for (size_t i = 1; i < entry.params.pieces.size(); i++) {
        REQUIRE(entry.params.pieces[i - 1].off < entry.params.pieces[i].off);
      }
      for (uint32_t off = 0; off < kEntrySlots; off++) {
        if (!entry.bitmap.test(off)) continue;
        auto y = predict_offset(entry.params, off);
        REQUIRE(y.has_value());
        REQUIRE(*y == shadow[off]);
      }
    }
  }
}

TEST_CASE("model memory budget holds") {
  // 8 pieces x 6 bytes + 64-byte bitmap fit the flat 128-byte budget.
  CHECK(kDefaultMaxPieces * 6 + kEntrySlots / 8 <= kModelBytes);
}
