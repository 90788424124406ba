#pragma once

#include <cstdint>

namespace ftlbench {

// Physical layout of the flash array. A "chip" is one (channel, way) pair;
// every chip has the same plane/block/page shape.
struct FlashGeometry {
  uint32_t channels = 8;
  uint32_t ways = 8;        // chips per channel
  uint32_t planes = 1;      // planes per chip
  uint32_t blocks = 256;    // blocks per plane
  uint32_t pages = 512;     // pages per block
  uint32_t page_size = 4096;  // bytes

  uint64_t total_pages() const {
    return uint64_t(channels) * ways * planes * blocks * pages;
  }
  uint64_t total_blocks() const {
    return uint64_t(channels) * ways * planes * blocks;
  }
  uint32_t chip_count() const { return channels * ways; }
  uint64_t pages_per_chip() const { return uint64_t(planes) * blocks * pages; }

  // One "slab" is a single block index taken across every chip and plane.
  // Slabs are exactly the VPPN-contiguous units of the device, so group
  // allocation runs are built from whole slabs.
  uint64_t slab_pages() const {
    return uint64_t(pages) * planes * ways * channels;
  }
  uint32_t blocks_per_slab() const { return channels * ways * planes; }

  // Throws ConfigError on zero fields, overflow, or non-power-of-two page size.
  void validate() const;
};

struct PageAddr {
  uint32_t channel = 0;
  uint32_t way = 0;
  uint32_t plane = 0;
  uint32_t block = 0;
  uint32_t page = 0;

  bool operator==(const PageAddr&) const = default;
};

// Physical page number: mixed-radix concatenation of the address fields,
// channel most significant, page least significant.
struct Ppn {
  uint64_t value = 0;
  bool operator==(const Ppn&) const = default;
  auto operator<=>(const Ppn&) const = default;
};

// Virtual page number: the same address fields permuted into allocation
// order, so that pages allocated channel-first round robin get consecutive
// values. Block is most significant, channel least.
struct Vppn {
  uint64_t value = 0;
  bool operator==(const Vppn&) const = default;
  auto operator<=>(const Vppn&) const = default;
};

Ppn compose_ppn(const PageAddr& addr, const FlashGeometry& geom);
PageAddr decompose_ppn(Ppn ppn, const FlashGeometry& geom);
Vppn ppn_to_vppn(Ppn ppn, const FlashGeometry& geom);
Ppn vppn_to_ppn(Vppn vppn, const FlashGeometry& geom);

// chip = channel * ways + way.
uint32_t chip_of(Ppn ppn, const FlashGeometry& geom);
// Global block id = ppn / pages; enumerates (channel, way, plane, block).
uint64_t block_id_of(Ppn ppn, const FlashGeometry& geom);

}  // namespace ftlbench
