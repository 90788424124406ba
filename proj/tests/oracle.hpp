#pragma once

// Test-only shadow-map oracle. Tracks the last token written per LPN,
// independently of any FTL bookkeeping, and verifies every read against it.

#include <cstdint>
#include <unordered_map>

#include "ftlbench/engine.hpp"

namespace ftlbench_test {

class ShadowOracle : public ftlbench::IoObserver {
 public:
  void on_page_write(uint64_t lpn, uint64_t token) override {
    map_[lpn] = token;
  }

  void on_page_read(uint64_t lpn, bool mapped, uint64_t token) override {
    auto it = map_.find(lpn);
    if (it == map_.end()) {
      if (mapped) phantom_reads_++;
      return;
    }
    checked_++;
    if (!mapped) {
      lost_reads_++;
    } else if (token != it->second) {
      stale_reads_++;
    }
  }

  bool contains(uint64_t lpn) const { return map_.count(lpn) != 0; }
  uint64_t expected_token(uint64_t lpn) const { return map_.at(lpn); }
  size_t mapped_count() const { return map_.size(); }

  uint64_t checked() const { return checked_; }
  uint64_t stale_reads() const { return stale_reads_; }    // wrong token
  uint64_t lost_reads() const { return lost_reads_; }      // mapped -> unmapped
  uint64_t phantom_reads() const { return phantom_reads_; }  // unmapped -> mapped
  bool clean() const {
    return stale_reads_ == 0 && lost_reads_ == 0 && phantom_reads_ == 0;
  }

 private:
  std::unordered_map<uint64_t, uint64_t> map_;
  uint64_t checked_ = 0;
  uint64_t stale_reads_ = 0;
  uint64_t lost_reads_ = 0;
  uint64_t phantom_reads_ = 0;
};

}  // namespace ftlbench_test
