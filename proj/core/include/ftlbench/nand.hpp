#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ftlbench/geometry.hpp"

namespace ftlbench {

enum class PageState : uint8_t { Free, Valid, Invalid };

// Cost class of a flash operation; each class has its own counter so that
// write amplification and translation overhead can be split out later.
enum class OpClass : uint8_t {
  DataRead,
  TranslationRead,
  DataWrite,
  TranslationWrite,
  GcRead,
  GcWrite,
};

struct OpCostTable {
  double read_us = 40.0;
  double write_us = 200.0;
  double erase_us = 2000.0;
  double read_energy = 1.0;
  double write_energy = 5.0;
  double erase_energy = 50.0;
};

struct FlashCounters {
  uint64_t data_read = 0;
  uint64_t translation_read = 0;
  uint64_t data_write = 0;
  uint64_t translation_write = 0;
  uint64_t gc_read = 0;
  uint64_t gc_write = 0;
  uint64_t erase = 0;

  uint64_t total_reads() const { return data_read + translation_read + gc_read; }
  uint64_t total_writes() const {
    return data_write + translation_write + gc_write;
  }
  void reset() { *this = FlashCounters{}; }
};

// Out-of-band metadata. Payload bytes are not simulated; the (lpn, token)
// pair identifies the last writer, which is all the correctness oracle needs.
// The error interval is only populated by the LeaFTL-style baseline.
struct Oob {
  uint64_t lpn = 0;
  uint64_t token = 0;
  int32_t err_lo = 0;
  int32_t err_hi = 0;
  bool has_err = false;
};

struct FlashPage {
  PageState state = PageState::Free;
  Oob oob;
};

struct FlashBlock {
  uint32_t write_pointer = 0;  // next programmable page index
  uint32_t valid_count = 0;
  uint32_t invalid_count = 0;
  uint64_t erase_count = 0;
};

// A flash operation as seen by the scheduler: which chip it occupies and
// for how long. Energy is tallied inside NandArray.
struct CostEvent {
  uint32_t chip = 0;
  double duration_us = 0.0;
};

// The NAND array: page states, in-order programming, OOB metadata, erase,
// and per-class counters. Rule violations throw DeviceRuleViolation and
// abort the simulation; they always indicate an FTL bug.
class NandArray {
 public:
  NandArray(const FlashGeometry& geom, const OpCostTable& costs);

  CostEvent program_page(Ppn ppn, uint64_t lpn, uint64_t token, OpClass cls);
  CostEvent program_page(Ppn ppn, uint64_t lpn, uint64_t token, OpClass cls,
                         int32_t err_lo, int32_t err_hi);
  // Returns stored OOB. Reading a Free page violates device rules.
  std::pair<Oob, CostEvent> read_page(Ppn ppn, OpClass cls);
  // Charges the cost of a read without touching page state. Models a probe
  // of an arbitrary page (a learned-index misprediction may land on a page
  // that holds no data); the probe returns nothing useful.
  CostEvent charge_read(Ppn ppn, OpClass cls);
  CostEvent erase_block(uint64_t block_id);
  void invalidate_page(Ppn ppn);
  // Stamps the error interval of a just-programmed page. Hardware embeds
  // it in the program operation; the simulator computes segment bounds a
  // moment after programming, before any read can observe the page.
  void set_error_interval(Ppn ppn, int32_t lo, int32_t hi);

  PageState page_state(Ppn ppn) const { return pages_[ppn.value].state; }
  const Oob& page_oob(Ppn ppn) const { return pages_[ppn.value].oob; }
  const FlashBlock& block(uint64_t block_id) const { return blocks_[block_id]; }
  uint64_t block_count() const { return blocks_.size(); }

  const FlashCounters& counters() const { return counters_; }
  double energy_total() const { return energy_; }
  uint64_t free_pages() const { return free_pages_; }
  uint64_t valid_pages() const { return valid_pages_; }
  uint64_t invalid_pages() const { return invalid_pages_; }

  // Zeroes counters and energy at a measurement boundary; device state
  // (page contents, erase counts) is untouched.
  void reset_counters();

  const FlashGeometry& geometry() const { return geom_; }
  const OpCostTable& costs() const { return costs_; }

 private:
  void count_read(OpClass cls);
  void count_write(OpClass cls);

  FlashGeometry geom_;
  OpCostTable costs_;
  std::vector<FlashPage> pages_;
  std::vector<FlashBlock> blocks_;
  FlashCounters counters_;
  double energy_ = 0.0;
  uint64_t free_pages_ = 0;
  uint64_t valid_pages_ = 0;
  uint64_t invalid_pages_ = 0;
};

}  // namespace ftlbench
