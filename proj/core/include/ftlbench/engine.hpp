#pragma once

#include <cstdint>
#include <vector>

#include "ftlbench/nand.hpp"

namespace ftlbench {

// One host I/O request. Streams model closed-loop threads: each stream has
// at most one request in flight, so arrival timestamps act as lower bounds
// on issue time rather than a strict schedule.
struct IoRequest {
  double arrival_us = 0.0;
  enum class Op : uint8_t { Read, Write } op = Op::Read;
  uint64_t lpn = 0;
  uint32_t npages = 1;
  uint32_t stream = 0;
};

// Per-chip busy horizon. Flash commands on one chip serialize; commands on
// different chips overlap freely.
class ChipTimelines {
 public:
  explicit ChipTimelines(uint32_t chips) : next_free_(chips, 0.0) {}

  // Starts the op at max(earliest_start, chip busy horizon); returns its
  // completion time and advances the horizon.
  double schedule(uint32_t chip, double earliest_start, double duration_us);
  double next_free(uint32_t chip) const { return next_free_[chip]; }
  uint32_t chip_count() const { return uint32_t(next_free_.size()); }
  // Stalls every chip until t (optional GC-blocks-everything mode).
  void block_all_until(double t);
  void reset();

 private:
  std::vector<double> next_free_;
};

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest sample.
// Throws StatisticsError on empty input or p outside (0, 100].
double percentile(std::vector<double> samples, double p);

class Ftl;

// Callback hooks for the oracle and for trace-level debugging. Reads report
// the token found (or nothing for never-written LPNs); writes report the
// token assigned.
class IoObserver {
 public:
  virtual ~IoObserver() = default;
  virtual void on_page_read(uint64_t lpn, bool mapped, uint64_t token) = 0;
  virtual void on_page_write(uint64_t lpn, uint64_t token) = 0;
};

struct RunStats {
  std::vector<double> latencies_us;  // one per request, in completion order
  uint64_t requests = 0;
};

// Replays a workload through the FTL. Closed loop per stream: a stream's
// next request issues at max(its arrival, previous completion). Streams are
// serviced in issue-time order (ties by stream id), which makes the run a
// pure function of (workload, device state, config).
RunStats run_workload(const std::vector<IoRequest>& workload, Ftl& ftl,
                      IoObserver* observer = nullptr);

}  // namespace ftlbench
