#include "ftlbench/ftl.hpp"

#include <algorithm>

#include "ftlbench/errors.hpp"
#include "ftl_variants.hpp"

namespace ftlbench {

FtlKind ftl_kind_from_string(const std::string& name) {
  if (name == "ideal") return FtlKind::Ideal;
  if (name == "dftl") return FtlKind::Dftl;
  if (name == "tpftl") return FtlKind::Tpftl;
  if (name == "leaftl") return FtlKind::LeaFtlSim;
  if (name == "learnedftl") return FtlKind::LearnedFtl;
  throw ConfigError("unknown ftl kind: " + name);
}

std::string to_string(FtlKind kind) {
  switch (kind) {
    case FtlKind::Ideal: return "ideal";
    case FtlKind::Dftl: return "dftl";
    case FtlKind::Tpftl: return "tpftl";
    case FtlKind::LeaFtlSim: return "leaftl";
    case FtlKind::LearnedFtl: return "learnedftl";
  }
  return "?";
}

Ftl::Ftl(const SimConfig& cfg)
    : cfg_(cfg),
      geom_(cfg.geometry),
      logical_pages_(cfg.logical_pages()),
      translation_lpn_base_(cfg.geometry.total_pages()),
      nand_(cfg.geometry, cfg.costs),
      chips_(cfg.geometry.chip_count()) {}

double Ftl::serve_read(uint64_t lpn, uint32_t npages, double t,
                       IoObserver* obs) {
  if (lpn + npages > logical_pages_) {
    throw AddressError("read beyond logical capacity");
  }
  double done = t;
  for (uint32_t i = 0; i < npages; i++) {
    PageRead pr = read_one(lpn + i, npages - i, t);
    host_page_reads_++;
    if (!pr.mapped) {
      unmapped_reads_++;
    } else {
      switch (pr.cls) {
        case ReadClass::Single: single_reads_++; break;
        case ReadClass::Double: double_reads_++; break;
        case ReadClass::Triple: triple_reads_++; break;
      }
    }
    if (obs) obs->on_page_read(lpn + i, pr.mapped, pr.token);
    done = std::max(done, pr.completion);
  }
  return done;
}

double Ftl::serve_write(uint64_t lpn, uint32_t npages, double t,
                        IoObserver* obs) {
  if (lpn + npages > logical_pages_) {
    throw AddressError("write beyond logical capacity");
  }
  uint64_t token0 = token_counter_ + 1;
  token_counter_ += npages;
  double done = write_pages(lpn, npages, token0, t);
  host_page_writes_ += npages;
  if (obs) {
    for (uint32_t i = 0; i < npages; i++) {
      obs->on_page_write(lpn + i, token0 + i);
    }
  }
  return done;
}

void Ftl::reset_measurement() {
  nand_.reset_counters();
  chips_.reset();
  gc_episodes_ = 0;
  single_reads_ = double_reads_ = triple_reads_ = unmapped_reads_ = 0;
  host_page_reads_ = host_page_writes_ = 0;
  reset_variant_stats();
}

std::unique_ptr<Ftl> make_ftl(const SimConfig& cfg) {
  switch (ftl_kind_from_string(cfg.ftl)) {
    case FtlKind::Ideal: return std::make_unique<IdealFtl>(cfg);
    case FtlKind::Dftl: return std::make_unique<DemandFtl>(cfg, false);
    case FtlKind::Tpftl: return std::make_unique<DemandFtl>(cfg, true);
    case FtlKind::LeaFtlSim: return std::make_unique<LeaFtl>(cfg);
    case FtlKind::LearnedFtl: return std::make_unique<LearnedFtl>(cfg);
  }
  throw ConfigError("unknown ftl kind: " + cfg.ftl);
}

}  // namespace ftlbench
