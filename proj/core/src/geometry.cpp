#include "ftlbench/geometry.hpp"

#include <limits>
#include <string>

#include "ftlbench/errors.hpp"

namespace ftlbench {

void FlashGeometry::validate() const {
  if (channels == 0 || ways == 0 || planes == 0 || blocks == 0 || pages == 0 ||
      page_size == 0) {
    throw ConfigError("geometry: all fields must be >= 1");
  }
  if ((page_size & (page_size - 1)) != 0) {
    throw ConfigError("geometry: page_size must be a power of two");
  }
  // Overflow check, factor by factor.
  uint64_t acc = channels;
  for (uint64_t f : {uint64_t(ways), uint64_t(planes), uint64_t(blocks),
                     uint64_t(pages)}) {
    if (acc > std::numeric_limits<uint64_t>::max() / f) {
      throw ConfigError("geometry: total page count overflows 64 bits");
    }
    acc *= f;
  }
}

Ppn compose_ppn(const PageAddr& a, const FlashGeometry& g) {
  if (a.channel >= g.channels || a.way >= g.ways || a.plane >= g.planes ||
      a.block >= g.blocks || a.page >= g.pages) {
    throw AddressError("compose_ppn: address field out of range");
  }
  uint64_t v = a.channel;
  v = v * g.ways + a.way;
  v = v * g.planes + a.plane;
  v = v * g.blocks + a.block;
  v = v * g.pages + a.page;
  return Ppn{v};
}

PageAddr decompose_ppn(Ppn ppn, const FlashGeometry& g) {
  if (ppn.value >= g.total_pages()) {
    throw AddressError("decompose_ppn: ppn " + std::to_string(ppn.value) +
                       " >= total pages " + std::to_string(g.total_pages()));
  }
  uint64_t v = ppn.value;
  PageAddr a;
  a.page = uint32_t(v % g.pages);
  v /= g.pages;
  a.block = uint32_t(v % g.blocks);
  v /= g.blocks;
  a.plane = uint32_t(v % g.planes);
  v /= g.planes;
  a.way = uint32_t(v % g.ways);
  v /= g.ways;
  a.channel = uint32_t(v);
  return a;
}

Vppn ppn_to_vppn(Ppn ppn, const FlashGeometry& g) {
  PageAddr a = decompose_ppn(ppn, g);
  uint64_t v = a.block;
  v = v * g.pages + a.page;
  v = v * g.planes + a.plane;
  v = v * g.ways + a.way;
  v = v * g.channels + a.channel;
  return Vppn{v};
}

Ppn vppn_to_ppn(Vppn vppn, const FlashGeometry& g) {
  if (vppn.value >= g.total_pages()) {
    throw AddressError("vppn_to_ppn: vppn " + std::to_string(vppn.value) +
                       " >= total pages " + std::to_string(g.total_pages()));
  }
  uint64_t v = vppn.value;
  PageAddr a;
  a.channel = uint32_t(v % g.channels);
  v /= g.channels;
  a.way = uint32_t(v % g.ways);
  v /= g.ways;
  a.plane = uint32_t(v % g.planes);
  v /= g.planes;
  a.page = uint32_t(v % g.pages);
  v /= g.pages;
  a.block = uint32_t(v);
  return compose_ppn(a, g);
}

uint32_t chip_of(Ppn ppn, const FlashGeometry& g) {
  if (ppn.value >= g.total_pages()) {
    throw AddressError("chip_of: ppn out of range");
  }
  return uint32_t(ppn.value / g.pages_per_chip());
}

uint64_t block_id_of(Ppn ppn, const FlashGeometry& g) {
  if (ppn.value >= g.total_pages()) {
    throw AddressError("block_id_of: ppn out of range");
  }
  return ppn.value / g.pages;
}

}  // namespace ftlbench
