#include <map>

#include "doctest.h"
#include "ftlbench/mapping.hpp"
#include "ftlbench/workload.hpp"

using namespace ftlbench;

namespace {

// Counts translation traffic without a flash array behind it.
class FakeIo : public TranslationIo {
 public:
  explicit FakeIo(std::vector<GtdEntry>* gtd = nullptr) : gtd_(gtd) {}
  double read_translation(uint32_t, double t) override {
    reads++;
    return t + 40.0;
  }
  double write_translation(uint32_t entry, double t) override {
    writes++;
    if (gtd_) (*gtd_)[entry].translation_ppn = Ppn{next_ppn++};
    return t + 200.0;
  }
  uint64_t reads = 0;
  uint64_t writes = 0;

 private:
  std::vector<GtdEntry>* gtd_;
  uint64_t next_ppn = 1000;
};

}  // namespace

TEST_CASE("cmt hit and miss basics") {
  Cmt cmt(4);
  CHECK(!cmt.lookup(1).has_value());
  cmt.upsert(1, 100, false);
  auto hit = cmt.lookup(1);
  REQUIRE(hit.has_value());
  CHECK(*hit == 100);
  CHECK(cmt.lookups() == 2);
  CHECK(cmt.hits() == 1);
}

TEST_CASE("cmt evicts least recently used") {
  Cmt cmt(3);
  cmt.upsert(1, 10, false);
  cmt.upsert(2, 20, false);
  cmt.upsert(3, 30, false);
  cmt.lookup(1);  // refresh 1; victim becomes 2
  CHECK(cmt.lru_victim() == 2);
  CHECK(cmt.full());
}

TEST_CASE("load_mapping distinguishes never-written lpns") {
  DemandMap map(4096, 8, 16);
  FakeIo io(&map.gtd());
  // No translation page exists: no flash read.
  auto r = map.load_mapping(7, 1, io, 0.0);
  CHECK(!r.ppn.has_value());
  CHECK(!r.flash_read);
  CHECK(io.reads == 0);

  // Materialize the entry's page via a dirty eviction, then a miss for a
  // still-unwritten sibling lpn really reads the page and finds nothing.
  map.update_on_write(3, 333, io, 0.0);
  for (uint64_t l = 100; l < 100 + 16; l++) map.update_on_write(l, l, io, 0.0);
  CHECK(io.writes > 0);
  CHECK(map.gtd()[0].translation_ppn.has_value());
  CHECK(!map.cmt().contains(3));  // must have been evicted by the flood
  auto r2 = map.load_mapping(7, 1, io, 0.0);
  CHECK(r2.flash_read);
  CHECK(!r2.ppn.has_value());
  auto r3 = map.load_mapping(3, 1, io, 0.0);
  CHECK(r3.flash_read);
  CHECK(r3.ppn == 333);
}

TEST_CASE("dirty eviction costs one read-modify-write") {
  DemandMap map(4096, 8, 2);
  FakeIo io(&map.gtd());
  // First eviction materializes the page: write only.
  map.update_on_write(0, 100, io, 0.0);
  map.update_on_write(1, 101, io, 0.0);
  map.update_on_write(2, 102, io, 0.0);  // evicts lpn 0 (and flushes 0,1)
  CHECK(io.reads == 0);
  CHECK(io.writes == 1);

  // Now the page exists: the next dirty eviction is read-modify-write.
  map.update_on_write(3, 103, io, 0.0);  // evicts; victim already clean?
  map.update_on_write(0, 200, io, 0.0);
  map.update_on_write(1, 201, io, 0.0);
  uint64_t reads_before = io.reads;
  uint64_t writes_before = io.writes;
  map.update_on_write(4, 104, io, 0.0);  // forces a dirty eviction
  CHECK(io.reads == reads_before + 1);
  CHECK(io.writes == writes_before + 1);
}

TEST_CASE("batched write-back flushes co-resident dirty siblings") {
  DemandMap map(4096, 8, 4);
  FakeIo io(&map.gtd());
  // Three dirty mappings of entry 0 plus one of entry 1.
  map.update_on_write(0, 10, io, 0.0);
  map.update_on_write(1, 11, io, 0.0);
  map.update_on_write(2, 12, io, 0.0);
  map.update_on_write(600, 13, io, 0.0);
  CHECK(io.writes == 0);
  // The next insert evicts lpn 0 (dirty, entry 0): one write flushes all
  // three entry-0 mappings.
  map.update_on_write(601, 14, io, 0.0);
  CHECK(io.writes == 1);
  CHECK(!map.cmt().is_dirty(1));
  CHECK(!map.cmt().is_dirty(2));
  CHECK(map.slot(1) == 11);
  CHECK(map.slot(2) == 12);
  // Cycle the cache until lpn 600 is evicted too; its entry-1 flush
  // lands then.
  for (uint64_t l = 700; l < 708; l++) map.update_on_write(l, l, io, 0.0);
  CHECK(!map.cmt().contains(600));
  CHECK(map.slot(600) == 13);
}

TEST_CASE("prefetch loads consecutive mappings with one flash read") {
  DemandMap map(4096, 8, 64);
  FakeIo io(&map.gtd());
  for (uint64_t l = 8; l < 16; l++) map.update_on_write(l, 1000 + l, io, 0.0);
  // Flush everything to the translation page, then drop residency.
  for (uint64_t l = 100; l < 164; l++) map.update_on_write(l, l, io, 0.0);
  for (uint64_t l = 8; l < 16; l++) map.cmt().erase(l);

  uint64_t reads_before = io.reads;
  auto r = map.load_mapping(8, 4, io, 0.0);
  CHECK(r.ppn == 1008);
  CHECK(io.reads == reads_before + 1);
  CHECK(map.cmt().contains(9));
  CHECK(map.cmt().contains(10));
  CHECK(map.cmt().contains(11));
  CHECK(!map.cmt().contains(12));  // beyond the request length
}

TEST_CASE("two separate misses on one translation page cost two reads") {
  DemandMap map(4096, 8, 64);
  FakeIo io(&map.gtd());
  map.update_on_write(20, 120, io, 0.0);
  map.update_on_write(40, 140, io, 0.0);
  for (uint64_t l = 200; l < 264; l++) map.update_on_write(l, l, io, 0.0);
  map.cmt().erase(20);
  map.cmt().erase(40);
  uint64_t reads_before = io.reads;
  map.load_mapping(20, 1, io, 0.0);
  map.load_mapping(40, 1, io, 0.0);
  CHECK(io.reads == reads_before + 2);
}

TEST_CASE("mapping coherence against a shadow replay") {
  DemandMap map(2048, 4, 8);
  FakeIo io(&map.gtd());
  Xorshift64Star rng(17);
  std::map<uint64_t, uint64_t> shadow;
  uint64_t next_ppn = 1;
  for (int step = 0; step < 5000; step++) {
    uint64_t lpn = rng.below(2048);
    if (rng.below(4) == 0 && !shadow.empty()) {
      // Relocation, as GC would do.
      auto it = shadow.begin();
      std::advance(it, ptrdiff_t(rng.below(shadow.size()) % shadow.size()));
      it->second = next_ppn;
      map.relocate(it->first, next_ppn);
      next_ppn++;
    } else {
      shadow[lpn] = next_ppn;
      map.update_on_write(lpn, next_ppn, io, 0.0);
      next_ppn++;
    }
    CHECK(map.cmt().size() <= 8);
  }
  for (const auto& [lpn, ppn] : shadow) {
    auto m = map.current_mapping(lpn);
    REQUIRE(m.has_value());
    REQUIRE(*m == ppn);
  }
}

TEST_CASE("uniform random lookups approach the capacity fraction") {
  const uint64_t space = 10000;
  const size_t cap = 300;
  DemandMap map(space, uint32_t((space + 511) / 512), cap);
  FakeIo io(&map.gtd());
  for (uint64_t l = 0; l < space; l++) map.update_on_write(l, l, io, 0.0);
  map.cmt().reset_stats();
  Xorshift64Star rng(5);
  for (int i = 0; i < 200000; i++) {
    uint64_t lpn = rng.below(space);
    if (!map.cmt().lookup(lpn)) {
      map.load_mapping(lpn, 1, io, 0.0);
    }
  }
  double ratio = double(map.cmt().hits()) / double(map.cmt().lookups());
  CHECK(ratio > 0.02);
  CHECK(ratio < 0.04);
}
