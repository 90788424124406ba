#include "ftlbench/nand.hpp"

#include <string>

#include "ftlbench/errors.hpp"

namespace ftlbench {

NandArray::NandArray(const FlashGeometry& geom, const OpCostTable& costs)
    : geom_(geom), costs_(costs) {
  geom_.validate();
  pages_.resize(geom_.total_pages());
  blocks_.resize(geom_.total_blocks());
  free_pages_ = geom_.total_pages();
}

void NandArray::count_read(OpClass cls) {
  switch (cls) {
    case OpClass::DataRead: counters_.data_read++; break;
    case OpClass::TranslationRead: counters_.translation_read++; break;
    case OpClass::GcRead: counters_.gc_read++; break;
    default:
      throw InternalError("nand: write class used for a read");
  }
  energy_ += costs_.read_energy;
}

void NandArray::count_write(OpClass cls) {
  switch (cls) {
    case OpClass::DataWrite: counters_.data_write++; break;
    case OpClass::TranslationWrite: counters_.translation_write++; break;
    case OpClass::GcWrite: counters_.gc_write++; break;
    default:
      throw InternalError("nand: read class used for a write");
  }
  energy_ += costs_.write_energy;
}

CostEvent NandArray::program_page(Ppn ppn, uint64_t lpn, uint64_t token,
                                  OpClass cls) {
  return program_page(ppn, lpn, token, cls, 0, 0);
}

CostEvent NandArray::program_page(Ppn ppn, uint64_t lpn, uint64_t token,
                                  OpClass cls, int32_t err_lo, int32_t err_hi) {
  if (ppn.value >= pages_.size()) {
    throw AddressError("program_page: ppn out of range");
  }
  FlashPage& pg = pages_[ppn.value];
  uint64_t bid = block_id_of(ppn, geom_);
  FlashBlock& blk = blocks_[bid];
  uint32_t page_idx = uint32_t(ppn.value % geom_.pages);
  if (pg.state != PageState::Free) {
    throw DeviceRuleViolation("program_page: page " + std::to_string(ppn.value) +
                              " is not Free");
  }
  if (page_idx != blk.write_pointer) {
    throw DeviceRuleViolation(
        "program_page: out-of-order program, page index " +
        std::to_string(page_idx) + " but write pointer " +
        std::to_string(blk.write_pointer) + " in block " + std::to_string(bid));
  }
  pg.state = PageState::Valid;
  pg.oob.lpn = lpn;
  pg.oob.token = token;
  pg.oob.err_lo = err_lo;
  pg.oob.err_hi = err_hi;
  pg.oob.has_err = (err_lo != 0 || err_hi != 0);
  blk.write_pointer++;
  blk.valid_count++;
  free_pages_--;
  valid_pages_++;
  count_write(cls);
  return CostEvent{chip_of(ppn, geom_), costs_.write_us};
}

std::pair<Oob, CostEvent> NandArray::read_page(Ppn ppn, OpClass cls) {
  if (ppn.value >= pages_.size()) {
    throw AddressError("read_page: ppn out of range");
  }
  const FlashPage& pg = pages_[ppn.value];
  if (pg.state == PageState::Free) {
    throw DeviceRuleViolation("read_page: page " + std::to_string(ppn.value) +
                              " is Free");
  }
  count_read(cls);
  return {pg.oob, CostEvent{chip_of(ppn, geom_), costs_.read_us}};
}

CostEvent NandArray::charge_read(Ppn ppn, OpClass cls) {
  if (ppn.value >= pages_.size()) {
    throw AddressError("charge_read: ppn out of range");
  }
  count_read(cls);
  return CostEvent{chip_of(ppn, geom_), costs_.read_us};
}

CostEvent NandArray::erase_block(uint64_t block_id) {
  if (block_id >= blocks_.size()) {
    throw AddressError("erase_block: block id out of range");
  }
  FlashBlock& blk = blocks_[block_id];
  uint64_t base = block_id * geom_.pages;
  for (uint32_t i = 0; i < geom_.pages; i++) {
    FlashPage& pg = pages_[base + i];
    if (pg.state == PageState::Valid) {
      throw DeviceRuleViolation("erase_block: block " + std::to_string(block_id) +
                                " still holds valid page " +
                                std::to_string(base + i));
    }
    if (pg.state == PageState::Invalid) {
      invalid_pages_--;
      free_pages_++;
    }
    pg = FlashPage{};
  }
  blk.write_pointer = 0;
  blk.valid_count = 0;
  blk.invalid_count = 0;
  blk.erase_count++;
  counters_.erase++;
  energy_ += costs_.erase_energy;
  // The erase occupies the chip the block lives on.
  Ppn first{base};
  return CostEvent{chip_of(first, geom_), costs_.erase_us};
}

void NandArray::invalidate_page(Ppn ppn) {
  if (ppn.value >= pages_.size()) {
    throw AddressError("invalidate_page: ppn out of range");
  }
  FlashPage& pg = pages_[ppn.value];
  if (pg.state != PageState::Valid) {
    throw DeviceRuleViolation("invalidate_page: page " +
                              std::to_string(ppn.value) + " is not Valid");
  }
  pg.state = PageState::Invalid;
  FlashBlock& blk = blocks_[block_id_of(ppn, geom_)];
  blk.valid_count--;
  blk.invalid_count++;
  valid_pages_--;
  invalid_pages_++;
}

void NandArray::set_error_interval(Ppn ppn, int32_t lo, int32_t hi) {
  if (ppn.value >= pages_.size()) {
    throw AddressError("set_error_interval: ppn out of range");
  }
  FlashPage& pg = pages_[ppn.value];
  if (pg.state != PageState::Valid) {
    throw DeviceRuleViolation("set_error_interval: page is not Valid");
  }
  pg.oob.err_lo = lo;
  pg.oob.err_hi = hi;
  pg.oob.has_err = (lo != 0 || hi != 0);
}

void NandArray::reset_counters() {
  counters_.reset();
  energy_ = 0.0;
}

}  // namespace ftlbench
