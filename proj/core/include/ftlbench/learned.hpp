#pragma once

#include <bitset>
#include <cstdint>
#include <optional>
#include <vector>

#include "ftlbench/geometry.hpp"

namespace ftlbench {

// LPNs covered by one GTD entry == slots per translation page == bits per
// bitmap filter.
inline constexpr uint32_t kEntrySlots = 512;

// Flat per-model budget used for memory accounting: 8 pieces x 6 B + 64 B
// bitmap, rounded up to house the base VPPN and length metadata.
inline constexpr uint64_t kModelBytes = 128;

inline constexpr size_t kDefaultMaxPieces = 8;
inline constexpr double kDefaultEpsilon = 0.5;

// IEEE binary16: 1 sign, 5 exponent, 10 mantissa bits. Encoding rounds to
// nearest, ties to even, directly from double.
namespace half {
uint16_t encode(double v);
double decode(uint16_t bits);
}  // namespace half

// Round to nearest integer, ties to even.
int64_t round_half_even(double v);

// Shared greedy piecewise-linear fitter. Anchored at each segment's first
// point: the feasible set of lines through (x0, y0) covering every later
// point within +/-epsilon is a slope interval that shrinks as points are
// added; a new segment starts when it empties.
namespace plr {
struct RawPiece {
  size_t first = 0;  // index range [first, last] into the input
  size_t last = 0;
  double k = 0.0;  // y ~= k * (x - x_first) + b
  double b = 0.0;
};
std::vector<RawPiece> segment(const std::vector<double>& xs,
                              const std::vector<double>& ys, double epsilon,
                              size_t max_pieces);
}  // namespace plr

using Bitmap = std::bitset<kEntrySlots>;

// One point to fit: LPN offset within the entry, VPPN offset from the
// entry's base VPPN.
struct TrainingPair {
  uint32_t lpn_off = 0;
  int64_t vppn_off = 0;
};

// One linear piece. Slope and intercept live in binary16, anchored at the
// piece's own off: predicted_vppn_off = round(k * (lpn_off - off) + b).
struct Piece {
  uint16_t k_bits = 0;
  uint16_t b_bits = 0;
  uint16_t off = 0;

  double k() const { return half::decode(k_bits); }
  double b() const { return half::decode(b_bits); }
};

Piece make_piece(double k, double b, uint32_t off);

// Parameter array of a model; offs strictly increasing. A piece covers
// [off_i, off_{i+1}) (the last one up to kEntrySlots).
struct ModelParams {
  std::vector<Piece> pieces;
};

// The in-place-update linear model attached to a GTD entry: parameter
// array, bitmap filter, and the VPPN the offsets are relative to.
struct EntryModel {
  ModelParams params;
  Bitmap bitmap;
  Vppn base;
};

// Greedy PLR over sorted, unique pairs. Pieces beyond max_pieces are not
// emitted; the points they would have covered stay unfitted.
ModelParams train_plr(const std::vector<TrainingPair>& pairs,
                      size_t max_pieces = kDefaultMaxPieces,
                      double epsilon = kDefaultEpsilon);

// Runs every pair through the quantized prediction pipeline; bit i is set
// iff the model reproduces pair i exactly. Reported accuracy therefore
// reflects the binary16 parameters actually deployed.
Bitmap evaluate_and_set_bitmap(const ModelParams& model,
                               const std::vector<TrainingPair>& pairs);

// Raw prediction, no bitmap gate. nullopt when no piece covers lpn_off.
std::optional<int64_t> predict_offset(const ModelParams& model,
                                      uint32_t lpn_off);

// Bitmap-gated prediction. nullopt means "fall back to the double read".
// Throws InternalError if a set bit has no covering piece.
std::optional<Ppn> predict(const EntryModel& entry, uint32_t lpn_off,
                           const FlashGeometry& geom);

void clear_bit_on_write(EntryModel& entry, uint32_t lpn_off);

// Inserts a piece covering [piece.off, range_end), truncating or removing
// overlapped pieces and evicting the least useful piece if the array would
// exceed max_pieces. Bits in the affected range are re-derived from
// run_pairs; bits whose predictor changed or vanished are zeroed.
void in_place_update(EntryModel& entry, Piece piece, uint32_t range_end,
                     const std::vector<TrainingPair>& run_pairs,
                     size_t max_pieces = kDefaultMaxPieces);

// Applies a y=x model for a host write that received consecutive VPPNs.
// Creates the model on first touch; otherwise only replaces coverage when
// the run is longer than the bitmap population. Returns true if applied.
bool sequential_init(std::optional<EntryModel>& entry, uint32_t first_off,
                     uint32_t length, Vppn first_vppn,
                     size_t max_pieces = kDefaultMaxPieces);

}  // namespace ftlbench
