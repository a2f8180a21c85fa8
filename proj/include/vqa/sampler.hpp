#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vqa/frame_io.hpp"

namespace vqa {

// Full-pixel-covering tiling of one frame. Patch origins advance in steps of
// the patch size; when a dimension is not a multiple of the patch size, the
// final row/column is aligned to the frame edge and overlaps its neighbour
// instead of padding, so every pixel is covered by real content.
struct PatchSet {
  std::string frame_id;
  int patch_size = 0;
  std::vector<Frame> patches;                // row-major by origin
  std::vector<std::pair<int, int>> origins;  // (row, col) of each top-left

  size_t size() const { return patches.size(); }
};

enum class StrategyKind { kFupic, kGridMinipatch, kCenterCrop, kResize };

const char* strategy_name(StrategyKind kind);

struct StrategySpec {
  StrategyKind kind = StrategyKind::kFupic;
  int input_side = 224;  // pixels consumed by the network, non-fupic kinds
  int patch_size = 384;  // fupic patch side
};

// All patches of one frame plus its label: the unit the trainer supervises.
struct SupervisionUnit {
  std::string frame_id;
  double label = 0.0;
  PatchSet patches;
};

PatchSet partition(const Frame& frame, int patch_size,
                   const std::string& frame_id = "");

// Writes patches back at their origins (later writes win on overlaps).
// Inverse of partition for the covered region.
Frame stitch(const PatchSet& set, int width, int height);

// Fraction of source pixels a sampling strategy feeds to the network.
// Full covering is 1 by construction; the fixed-input strategies retain
// input_side^2 source pixels out of width*height.
double coverage(const StrategySpec& spec, int width, int height);

std::vector<SupervisionUnit> make_supervision_units(
    std::vector<PatchSet> patch_sets, const std::vector<double>& labels);

// Permutes whole units, never the patches inside one.
void shuffle_units(std::vector<SupervisionUnit>& units, uint64_t seed);

}  // namespace vqa
