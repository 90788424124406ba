#include <map>

#include "doctest.h"
#include "ftlbench/errors.hpp"
#include "ftlbench/nand.hpp"
#include "ftlbench/workload.hpp"

using namespace ftlbench;

namespace {
// Paper-scale blocks: 512 pages each.
const FlashGeometry kTall{1, 1, 1, 2, 512, 4096};
const FlashGeometry kTiny{1, 1, 1, 4, 8, 4096};
const OpCostTable kCosts{};
}  // namespace

TEST_CASE("program then read round-trips the oob") {
  NandArray nand(kTiny, kCosts);
  auto ev = nand.program_page(Ppn{0}, 42, 7, OpClass::DataWrite);
  CHECK(ev.duration_us == kCosts.write_us);
  CHECK(nand.block(0).write_pointer == 1);
  CHECK(nand.page_state(Ppn{0}) == PageState::Valid);

  auto [oob, rev] = nand.read_page(Ppn{0}, OpClass::DataRead);
  CHECK(oob.lpn == 42);
  CHECK(oob.token == 7);
  CHECK(rev.duration_us == kCosts.read_us);
}

TEST_CASE("in-order programming is enforced") {
  NandArray nand(kTiny, kCosts);
  nand.program_page(Ppn{0}, 0, 1, OpClass::DataWrite);
  CHECK_THROWS_AS(nand.program_page(Ppn{2}, 1, 2, OpClass::DataWrite),
                  DeviceRuleViolation);
  // Reprogramming a written page is equally illegal.
  CHECK_THROWS_AS(nand.program_page(Ppn{0}, 3, 3, OpClass::DataWrite),
                  DeviceRuleViolation);
}

TEST_CASE("a 512-page block accepts exactly 512 programs") {
  NandArray nand(kTall, kCosts);
  for (uint32_t i = 0; i < 512; i++) {
    nand.program_page(Ppn{i}, i, i + 1, OpClass::DataWrite);
  }
  // Any further program into the full block violates device rules (no
  // free page remains), while the next block starts fresh.
  CHECK_THROWS_AS(nand.program_page(Ppn{511}, 0, 0, OpClass::DataWrite),
                  DeviceRuleViolation);
  CHECK(block_id_of(Ppn{512}, kTall) == 1);
  CHECK_NOTHROW(nand.program_page(Ppn{512}, 0, 513, OpClass::DataWrite));
}

TEST_CASE("reading stale data is legal, reading free pages is not") {
  NandArray nand(kTiny, kCosts);
  nand.program_page(Ppn{0}, 9, 1, OpClass::DataWrite);
  nand.invalidate_page(Ppn{0});
  auto [oob, ev] = nand.read_page(Ppn{0}, OpClass::DataRead);
  (void)ev;
  CHECK(oob.token == 1);  // stale content still readable
  CHECK_THROWS_AS(nand.read_page(Ppn{1}, OpClass::DataRead),
                  DeviceRuleViolation);
}

TEST_CASE("read counters count") {
  NandArray nand(kTiny, kCosts);
  nand.program_page(Ppn{0}, 0, 1, OpClass::DataWrite);
  for (int i = 0; i < 3; i++) nand.read_page(Ppn{0}, OpClass::DataRead);
  CHECK(nand.counters().data_read == 3);
  nand.read_page(Ppn{0}, OpClass::TranslationRead);
  nand.read_page(Ppn{0}, OpClass::GcRead);
  CHECK(nand.counters().translation_read == 1);
  CHECK(nand.counters().gc_read == 1);
}

TEST_CASE("erase requires a fully dead block") {
  NandArray nand(kTiny, kCosts);
  for (uint32_t i = 0; i < kTiny.pages; i++) {
    nand.program_page(Ppn{i}, i, i + 1, OpClass::DataWrite);
  }
  CHECK_THROWS_AS(nand.erase_block(0), DeviceRuleViolation);
  for (uint32_t i = 0; i < kTiny.pages; i++) nand.invalidate_page(Ppn{i});
  auto ev = nand.erase_block(0);
  CHECK(ev.duration_us == kCosts.erase_us);
  CHECK(nand.block(0).erase_count == 1);
  for (uint32_t i = 0; i < kTiny.pages; i++) {
    CHECK(nand.page_state(Ppn{i}) == PageState::Free);
  }
  // Erasing an already-free block just counts another cycle.
  nand.erase_block(0);
  CHECK(nand.block(0).erase_count == 2);
}

TEST_CASE("invalidate flips exactly one valid page") {
  NandArray nand(kTiny, kCosts);
  nand.program_page(Ppn{0}, 5, 1, OpClass::DataWrite);
  nand.program_page(Ppn{1}, 5, 2, OpClass::DataWrite);  // overwrite of lpn 5
  nand.invalidate_page(Ppn{0});
  CHECK(nand.block(0).valid_count == 1);
  CHECK(nand.block(0).invalid_count == 1);
  CHECK_THROWS_AS(nand.invalidate_page(Ppn{0}), DeviceRuleViolation);
  CHECK_THROWS_AS(nand.invalidate_page(Ppn{7}), DeviceRuleViolation);
}

TEST_CASE("global accounting stays conserved under random traffic") {
  NandArray nand(kTiny, kCosts);
  Xorshift64Star rng(99);
  std::map<uint64_t, uint32_t> shadow_invalid_per_block;
  uint64_t cursor = 0;
  std::vector<Ppn> valid;
  for (int step = 0; step < 2000; step++) {
    uint64_t total = nand.free_pages() + nand.valid_pages() +
                     nand.invalid_pages();
    REQUIRE(total == kTiny.total_pages());
    if (cursor < kTiny.total_pages() && (valid.empty() || rng.below(2))) {
      nand.program_page(Ppn{cursor}, rng.below(100), step, OpClass::DataWrite);
      valid.push_back(Ppn{cursor});
      cursor++;
    } else if (!valid.empty()) {
      size_t pick = rng.below(valid.size());
      Ppn victim = valid[pick];
      valid.erase(valid.begin() + ptrdiff_t(pick));
      nand.invalidate_page(victim);
      shadow_invalid_per_block[block_id_of(victim, kTiny)]++;
    }
    if (cursor == kTiny.total_pages() && valid.empty()) break;
  }
  for (auto [bid, expect] : shadow_invalid_per_block) {
    CHECK(nand.block(bid).invalid_count == expect);
  }
}

TEST_CASE("counter reset keeps device state") {
  NandArray nand(kTiny, kCosts);
  nand.program_page(Ppn{0}, 1, 1, OpClass::DataWrite);
  nand.reset_counters();
  CHECK(nand.counters().data_write == 0);
  CHECK(nand.energy_total() == 0.0);
  CHECK(nand.page_state(Ppn{0}) == PageState::Valid);
}
