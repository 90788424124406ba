#include <benchmark/benchmark.h>

#include "ftlbench/geometry.hpp"

using namespace ftlbench;

namespace {
const FlashGeometry kPaperScale{8, 8, 1, 256, 512, 4096};
}

static void BM_ComposeDecompose(benchmark::State& state) {
  uint64_t p = 0;
  for (auto _ : state) {
    PageAddr a = decompose_ppn(Ppn{p}, kPaperScale);
    benchmark::DoNotOptimize(compose_ppn(a, kPaperScale));
    p = (p + 977) % kPaperScale.total_pages();
  }
}
BENCHMARK(BM_ComposeDecompose);

static void BM_VppnRoundTrip(benchmark::State& state) {
  uint64_t p = 0;
  for (auto _ : state) {
    Vppn v = ppn_to_vppn(Ppn{p}, kPaperScale);
    benchmark::DoNotOptimize(vppn_to_ppn(v, kPaperScale));
    p = (p + 977) % kPaperScale.total_pages();
  }
}
BENCHMARK(BM_VppnRoundTrip);
