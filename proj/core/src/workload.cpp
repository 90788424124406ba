#include "ftlbench/workload.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "ftlbench/errors.hpp"

namespace ftlbench {

Pattern pattern_from_string(const std::string& name) {
  if (name == "seqread") return Pattern::SeqRead;
  if (name == "randread") return Pattern::RandRead;
  if (name == "seqwrite") return Pattern::SeqWrite;
  if (name == "randwrite") return Pattern::RandWrite;
  if (name == "mixed") return Pattern::Mixed;
  throw ConfigError("unknown workload pattern: " + name);
}

std::vector<IoRequest> generate(const GenSpec& spec) {
  if (spec.io_pages == 0 || spec.streams == 0) {
    throw ConfigError("generate: io_pages and streams must be >= 1");
  }
  if (spec.working_set < spec.io_pages) {
    throw ConfigError("generate: working set smaller than one request");
  }
  if (spec.read_fraction < 0.0 || spec.read_fraction > 1.0) {
    throw ConfigError("generate: read_fraction out of [0, 1]");
  }
  Xorshift64Star rng(spec.seed);
  const uint64_t slots = spec.working_set / spec.io_pages;
  const auto read_threshold =
      uint64_t(spec.read_fraction * double(1ull << 32));
  std::vector<IoRequest> out;
  out.reserve(spec.total_requests);
  for (uint64_t i = 0; i < spec.total_requests; i++) {
    IoRequest r;
    r.arrival_us = 0.0;
    r.npages = spec.io_pages;
    r.stream = uint32_t(i % spec.streams);
    switch (spec.pattern) {
      case Pattern::SeqRead:
      case Pattern::SeqWrite:
        r.lpn = (i % slots) * spec.io_pages;
        r.op = spec.pattern == Pattern::SeqRead ? IoRequest::Op::Read
                                                : IoRequest::Op::Write;
        break;
      case Pattern::RandRead:
      case Pattern::RandWrite:
        r.lpn = rng.below(spec.working_set - spec.io_pages + 1);
        r.op = spec.pattern == Pattern::RandRead ? IoRequest::Op::Read
                                                 : IoRequest::Op::Write;
        break;
      case Pattern::Mixed:
        r.lpn = rng.below(spec.working_set - spec.io_pages + 1);
        r.op = (rng.next() >> 32) < read_threshold ? IoRequest::Op::Read
                                                   : IoRequest::Op::Write;
        break;
    }
    out.push_back(r);
  }
  return out;
}

namespace {

uint64_t parse_uint(const std::string& field, size_t line_no) {
  uint64_t v = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() ||
      field.empty()) {
    throw ParseError("trace line " + std::to_string(line_no) +
                     ": bad integer field '" + field + "'");
  }
  return v;
}

}  // namespace

std::vector<IoRequest> parse_trace(std::istream& in, uint64_t logical_pages,
                                   uint64_t scale_num, uint64_t scale_den) {
  if (scale_num == 0 || scale_den == 0) {
    throw ConfigError("trace scaling factors must be nonzero");
  }
  std::vector<IoRequest> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    // timestamp_us,op,lpn,npages
    std::string fields[4];
    size_t field = 0;
    for (char c : line) {
      if (c == ',') {
        field++;
        if (field >= 4) {
          throw ParseError("trace line " + std::to_string(line_no) +
                           ": too many fields");
        }
      } else {
        fields[field].push_back(c);
      }
    }
    if (field != 3) {
      throw ParseError("trace line " + std::to_string(line_no) +
                       ": expected 4 comma-separated fields");
    }
    IoRequest r;
    r.arrival_us = double(parse_uint(fields[0], line_no));
    if (fields[1] == "R") {
      r.op = IoRequest::Op::Read;
    } else if (fields[1] == "W") {
      r.op = IoRequest::Op::Write;
    } else {
      throw ParseError("trace line " + std::to_string(line_no) +
                       ": op must be R or W");
    }
    uint64_t lpn = parse_uint(fields[2], line_no);
    uint64_t npages = parse_uint(fields[3], line_no);
    if (npages == 0) {
      throw ParseError("trace line " + std::to_string(line_no) +
                       ": npages must be >= 1");
    }
    if (scale_num != 1 || scale_den != 1) {
      lpn = uint64_t((__uint128_t(lpn) * scale_num / scale_den) %
                     logical_pages);
    }
    if (lpn + npages > logical_pages) {
      throw ConfigError("trace line " + std::to_string(line_no) +
                        ": lpn " + std::to_string(lpn) + "+" +
                        std::to_string(npages) + " beyond logical capacity " +
                        std::to_string(logical_pages));
    }
    r.lpn = lpn;
    r.npages = uint32_t(npages);
    r.stream = 0;
    out.push_back(r);
  }
  return out;
}

std::vector<IoRequest> warmup_requests(uint64_t logical_pages,
                                       uint32_t multiplier, uint32_t io_pages,
                                       uint32_t streams, uint64_t seed) {
  std::vector<IoRequest> out;
  if (multiplier == 0) return out;
  if (io_pages == 0 || streams == 0) {
    throw ConfigError("warmup: io_pages and streams must be >= 1");
  }
  if (io_pages > logical_pages) io_pages = uint32_t(logical_pages);
  // Decorrelated from the measured workload's stream.
  Xorshift64Star rng(seed ^ 0x5741524d55500aull);
  uint64_t i = 0;
  // One full sequential sweep covers every LPN at least once.
  for (uint64_t lpn = 0; lpn < logical_pages; lpn += io_pages, i++) {
    IoRequest r;
    r.op = IoRequest::Op::Write;
    r.lpn = lpn;
    r.npages = uint32_t(std::min<uint64_t>(io_pages, logical_pages - lpn));
    r.stream = uint32_t(i % streams);
    out.push_back(r);
  }
  // The remaining capacity multiples land uniformly at random.
  uint64_t random_pages = uint64_t(multiplier - 1) * logical_pages;
  for (uint64_t written = 0; written < random_pages;
       written += io_pages, i++) {
    IoRequest r;
    r.op = IoRequest::Op::Write;
    r.lpn = rng.below(logical_pages - io_pages + 1);
    r.npages = io_pages;
    r.stream = uint32_t(i % streams);
    out.push_back(r);
  }
  return out;
}

}  // namespace ftlbench
