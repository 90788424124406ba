#include "ftlbench/engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "ftlbench/errors.hpp"
#include "ftlbench/ftl.hpp"

namespace ftlbench {

double ChipTimelines::schedule(uint32_t chip, double earliest_start,
                               double duration_us) {
  if (chip >= next_free_.size()) {
    throw AddressError("schedule: chip index out of range");
  }
  if (duration_us < 0) {
    throw StatisticsError("schedule: negative duration");
  }
  double start = std::max(earliest_start, next_free_[chip]);
  double completion = start + duration_us;
  next_free_[chip] = completion;
  return completion;
}

void ChipTimelines::block_all_until(double t) {
  for (double& f : next_free_) f = std::max(f, t);
}

void ChipTimelines::reset() {
  std::fill(next_free_.begin(), next_free_.end(), 0.0);
}

double percentile(std::vector<double> samples, double p) {
  if (samples.empty()) {
    throw StatisticsError("percentile: empty sample set");
  }
  if (!(p > 0.0) || p > 100.0) {
    throw StatisticsError("percentile: p must be in (0, 100]");
  }
  std::sort(samples.begin(), samples.end());
  // Nearest rank, with a guard against the binary representation of p
  // nudging ceil() one rank too high (99.9/100*1000 evaluates above 999).
  double exact = p * double(samples.size()) / 100.0;
  auto rank = size_t(std::ceil(exact - 1e-9));
  if (rank < 1) rank = 1;
  if (rank > samples.size()) rank = samples.size();
  return samples[rank - 1];
}

RunStats run_workload(const std::vector<IoRequest>& workload, Ftl& ftl,
                      IoObserver* observer) {
  RunStats stats;
  stats.latencies_us.reserve(workload.size());

  // Requests of one stream run closed loop, in workload order; streams
  // interleave by issue time (ties to the lower stream id).
  std::vector<std::vector<size_t>> per_stream;
  for (size_t i = 0; i < workload.size(); i++) {
    uint32_t s = workload[i].stream;
    if (s >= per_stream.size()) per_stream.resize(s + 1);
    per_stream[s].push_back(i);
  }

  struct Pending {
    double issue;
    uint32_t stream;
    bool operator>(const Pending& o) const {
      if (issue != o.issue) return issue > o.issue;
      return stream > o.stream;
    }
  };
  std::priority_queue<Pending, std::vector<Pending>, std::greater<Pending>> q;
  std::vector<size_t> cursor(per_stream.size(), 0);
  for (uint32_t s = 0; s < per_stream.size(); s++) {
    if (!per_stream[s].empty()) {
      q.push(Pending{workload[per_stream[s][0]].arrival_us, s});
    }
  }

  while (!q.empty()) {
    Pending p = q.top();
    q.pop();
    const IoRequest& req = workload[per_stream[p.stream][cursor[p.stream]]];
    double completion;
    if (req.op == IoRequest::Op::Read) {
      completion = ftl.serve_read(req.lpn, req.npages, p.issue, observer);
    } else {
      completion = ftl.serve_write(req.lpn, req.npages, p.issue, observer);
    }
    stats.latencies_us.push_back(completion - p.issue);
    stats.requests++;
    cursor[p.stream]++;
    if (cursor[p.stream] < per_stream[p.stream].size()) {
      const IoRequest& next =
          workload[per_stream[p.stream][cursor[p.stream]]];
      q.push(Pending{std::max(next.arrival_us, completion), p.stream});
    }
  }
  return stats;
}

}  // namespace ftlbench
