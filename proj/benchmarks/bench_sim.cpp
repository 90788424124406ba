#include <benchmark/benchmark.h>

#include "ftlbench/config.hpp"
#include "ftlbench/ftl.hpp"
#include "ftlbench/workload.hpp"

using namespace ftlbench;

// End-to-end throughput of the simulator itself: requests simulated per
// second on the desk geometry.
static void BM_SimulatedRequests(benchmark::State& state) {
  SimConfig cfg;
  cfg.geometry = FlashGeometry{2, 2, 1, 64, 64, 4096};
  cfg.ftl = state.range(0) == 0 ? "dftl" : "learnedftl";
  auto ftl = make_ftl(cfg);
  GenSpec warm;
  warm.pattern = Pattern::SeqWrite;
  warm.io_pages = 128;
  warm.streams = 4;
  warm.total_requests = cfg.logical_pages() / 128;
  warm.working_set = cfg.logical_pages();
  run_workload(generate(warm), *ftl);

  GenSpec spec;
  spec.pattern = Pattern::Mixed;
  spec.io_pages = 1;
  spec.streams = 8;
  spec.total_requests = 4096;
  spec.seed = 5;
  spec.working_set = cfg.logical_pages();
  auto reqs = generate(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_workload(reqs, *ftl));
  }
  state.SetItemsProcessed(int64_t(state.iterations()) *
                          int64_t(reqs.size()));
}
BENCHMARK(BM_SimulatedRequests)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
