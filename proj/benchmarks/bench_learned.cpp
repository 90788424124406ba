#include <benchmark/benchmark.h>

#include "ftlbench/learned.hpp"
#include "ftlbench/workload.hpp"

using namespace ftlbench;

namespace {

std::vector<TrainingPair> staircase_pairs(uint64_t seed) {
  Xorshift64Star rng(seed);
  std::vector<TrainingPair> pairs;
  int64_t v = 0;
  for (uint32_t off = 0; off < kEntrySlots; off++) {
    if (rng.below(4) == 0) continue;
    pairs.push_back(TrainingPair{off, v});
    v += 1 + int64_t(rng.below(3));
  }
  return pairs;
}

}  // namespace

static void BM_TrainEntry(benchmark::State& state) {
  auto pairs = staircase_pairs(7);
  for (auto _ : state) {
    auto model = train_plr(pairs);
    benchmark::DoNotOptimize(evaluate_and_set_bitmap(model, pairs));
  }
}
BENCHMARK(BM_TrainEntry);

static void BM_Predict(benchmark::State& state) {
  FlashGeometry geom{8, 8, 1, 256, 512, 4096};
  auto pairs = staircase_pairs(7);
  EntryModel entry;
  entry.params = train_plr(pairs);
  entry.bitmap = evaluate_and_set_bitmap(entry.params, pairs);
  entry.base = Vppn{1 << 20};
  uint32_t off = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(entry, off, geom));
    off = (off + 7) % kEntrySlots;
  }
}
BENCHMARK(BM_Predict);
