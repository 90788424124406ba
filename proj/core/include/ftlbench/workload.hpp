#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "ftlbench/engine.hpp"

namespace ftlbench {

// xorshift64* (Vigna 2016): x ^= x>>12; x ^= x<<25; x ^= x>>27;
// return x * 0x2545F4914F6CDD1D. Chosen over std::mt19937_64 plus
// distributions because the sequence must be identical across standard
// library implementations.
struct Xorshift64Star {
  uint64_t state;
  explicit Xorshift64Star(uint64_t seed)
      : state(seed ? seed : 0x9E3779B97F4A7C15ull) {}
  uint64_t next() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545F4914F6CDD1Dull;
  }
  // Modulo reduction; the bias is below 2^-40 for every bound used here.
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }
};

enum class Pattern : uint8_t { SeqRead, RandRead, SeqWrite, RandWrite, Mixed };

Pattern pattern_from_string(const std::string& name);

struct GenSpec {
  Pattern pattern = Pattern::RandRead;
  double read_fraction = 0.5;  // Mixed only
  uint32_t io_pages = 1;
  uint32_t streams = 1;
  uint64_t total_requests = 0;
  uint64_t seed = 1;
  uint64_t working_set = 0;  // pages
};

// Deterministic for a given spec. Sequential patterns sweep the working
// set in order, striped across streams; random patterns draw uniform
// io-aligned positions.
std::vector<IoRequest> generate(const GenSpec& spec);

// One record per line: `timestamp_us,op,lpn,npages`, decimal unsigned
// integers, op R or W, no spaces; lines starting with '#' are skipped.
// Optional scaling maps lpn to (lpn * scale_num / scale_den) mod
// logical_pages. Throws ParseError with the line number on bad input and
// ConfigError when a record exceeds capacity.
std::vector<IoRequest> parse_trace(std::istream& in, uint64_t logical_pages,
                                   uint64_t scale_num = 1,
                                   uint64_t scale_den = 1);

// Warmup plan: multiplier x logical capacity of writes, one sequential
// sweep first, the remainder uniformly random, all with io_pages-sized
// requests striped over the streams.
std::vector<IoRequest> warmup_requests(uint64_t logical_pages,
                                       uint32_t multiplier, uint32_t io_pages,
                                       uint32_t streams, uint64_t seed);

}  // namespace ftlbench
