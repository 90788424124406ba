#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ftlbench/config.hpp"
#include "ftlbench/errors.hpp"
#include "ftlbench/ftl.hpp"
#include "ftlbench/workload.hpp"

using namespace ftlbench;

TEST_CASE("generation is deterministic per seed") {
  GenSpec spec;
  spec.pattern = Pattern::RandRead;
  spec.total_requests = 1000;
  spec.seed = 42;
  spec.working_set = 4096;
  auto a = generate(spec);
  auto b = generate(spec);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); i++) {
    CHECK(a[i].lpn == b[i].lpn);
    CHECK(a[i].op == b[i].op);
  }
  spec.seed = 43;
  auto c = generate(spec);
  bool differs = false;
  for (size_t i = 0; i < a.size(); i++) differs |= (a[i].lpn != c[i].lpn);
  CHECK(differs);
}

TEST_CASE("sequential writes sweep lpns in order") {
  GenSpec spec;
  spec.pattern = Pattern::SeqWrite;
  spec.total_requests = 10;
  spec.streams = 1;
  spec.io_pages = 1;
  spec.working_set = 4096;
  auto reqs = generate(spec);
  for (size_t i = 0; i < reqs.size(); i++) {
    CHECK(reqs[i].lpn == i);
    CHECK(reqs[i].op == IoRequest::Op::Write);
  }
}

TEST_CASE("sequential requests stripe across streams") {
  GenSpec spec;
  spec.pattern = Pattern::SeqRead;
  spec.total_requests = 8;
  spec.streams = 4;
  spec.io_pages = 2;
  spec.working_set = 4096;
  auto reqs = generate(spec);
  for (size_t i = 0; i < reqs.size(); i++) {
    CHECK(reqs[i].stream == i % 4);
    CHECK(reqs[i].lpn == 2 * i);
  }
}

TEST_CASE("random reads draw uniformly (chi-square, 64 cells)") {
  GenSpec spec;
  spec.pattern = Pattern::RandRead;
  spec.total_requests = 1000000;
  spec.working_set = 1 << 16;
  spec.seed = 2024;
  auto reqs = generate(spec);
  std::array<uint64_t, 64> buckets{};
  for (const auto& r : reqs) {
    CHECK(r.lpn < spec.working_set);
    buckets[r.lpn * 64 / spec.working_set]++;
  }
  double expected = double(spec.total_requests) / 64.0;
  double chi2 = 0.0;
  for (uint64_t b : buckets) {
    double d = double(b) - expected;
    chi2 += d * d / expected;
  }
  // Upper critical value of chi-square with 63 degrees of freedom at
  // p = 0.01 is 92.010; staying below it means "not detectably non-uniform".
  CHECK(chi2 < 92.010);
}

TEST_CASE("mixed leans toward the requested read fraction") {
  GenSpec spec;
  spec.pattern = Pattern::Mixed;
  spec.read_fraction = 0.7;
  spec.total_requests = 100000;
  spec.working_set = 4096;
  auto reqs = generate(spec);
  uint64_t rd = 0;
  for (const auto& r : reqs) rd += r.op == IoRequest::Op::Read;
  CHECK(double(rd) / double(reqs.size()) == doctest::Approx(0.7).epsilon(0.02));
}

TEST_CASE("generator rejects bad specs") {
  GenSpec spec;
  spec.working_set = 4;
  spec.io_pages = 8;
  CHECK_THROWS_AS(generate(spec), ConfigError);
  spec.io_pages = 1;
  spec.read_fraction = 1.5;
  spec.pattern = Pattern::Mixed;
  CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("trace parsing follows the line grammar exactly") {
  std::istringstream in(
      "# comment line\n"
      "0,R,100,4\n"
      "12,W,0,1\n");
  auto reqs = parse_trace(in, 4096);
  REQUIRE(reqs.size() == 2);
  CHECK(reqs[0].arrival_us == 0.0);
  CHECK(reqs[0].op == IoRequest::Op::Read);
  CHECK(reqs[0].lpn == 100);
  CHECK(reqs[0].npages == 4);
  CHECK(reqs[1].arrival_us == 12.0);
  CHECK(reqs[1].op == IoRequest::Op::Write);
  CHECK(reqs[1].lpn == 0);
  CHECK(reqs[1].npages == 1);
}

TEST_CASE("malformed trace lines carry their line number") {
  std::istringstream bad("x,y\n");
  try {
    parse_trace(bad, 4096);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }

  std::istringstream bad2("0,R,1,1\n5,Q,1,1\n");
  try {
    parse_trace(bad2, 4096);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream spaces("0, R, 1, 1\n");
  CHECK_THROWS_AS(parse_trace(spaces, 4096), ParseError);

  std::istringstream beyond("0,R,5000,1\n");
  CHECK_THROWS_AS(parse_trace(beyond, 4096), ConfigError);
}

TEST_CASE("trace scaling maps lpns into capacity") {
  std::istringstream in("0,R,1000,1\n0,W,4000,1\n");
  auto reqs = parse_trace(in, 1024, 1, 4);
  CHECK(reqs[0].lpn == 250);
  CHECK(reqs[1].lpn == 1000 % 1024);
}

TEST_CASE("warmup covers every lpn at multiplier one") {
  auto reqs = warmup_requests(4096, 1, 128, 4, 9);
  std::set<uint64_t> covered;
  uint64_t pages = 0;
  for (const auto& r : reqs) {
    CHECK(r.op == IoRequest::Op::Write);
    for (uint64_t l = r.lpn; l < r.lpn + r.npages; l++) covered.insert(l);
    pages += r.npages;
  }
  CHECK(covered.size() == 4096);
  CHECK(pages == 4096);
  CHECK(warmup_requests(4096, 0, 128, 4, 9).empty());
}

TEST_CASE("a heavy random warmup forces garbage collection") {
  SimConfig cfg;
  cfg.geometry = FlashGeometry{2, 1, 1, 32, 64, 4096};  // two chips
  cfg.ftl = "learnedftl";
  cfg.streams = 2;
  auto ftl = make_ftl(cfg);
  auto reqs = warmup_requests(cfg.logical_pages(), 6, 128, 2, 31);
  run_workload(reqs, *ftl);
  CHECK(ftl->gc_episodes() > 0);
  // The measurement boundary then zeroes every counter.
  ftl->reset_measurement();
  CHECK(ftl->gc_episodes() == 0);
  CHECK(ftl->nand().counters().total_writes() == 0);
  CHECK(ftl->host_page_writes() == 0);
}
