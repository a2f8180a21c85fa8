#include "vqa/sampler.hpp"

#include <stdexcept>

#include "vqa/rng.hpp"

namespace vqa {

const char* strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kFupic:
      return "fupic";
    case StrategyKind::kGridMinipatch:
      return "grid_minipatch";
    case StrategyKind::kCenterCrop:
      return "center_crop";
    case StrategyKind::kResize:
      return "resize";
  }
  return "unknown";
}

namespace {

// Origins 0, l, 2l, ...; the last one is pulled back to extent-l so the tiling
// ends flush with the frame edge.
std::vector<int> axis_origins(int extent, int patch_size) {
  const int n = (extent + patch_size - 1) / patch_size;
  std::vector<int> origins(size_t(n), 0);
  for (int i = 0; i < n; ++i) {
    origins[size_t(i)] = (i + 1 < n) ? i * patch_size : extent - patch_size;
  }
  return origins;
}

}  // namespace

PatchSet partition(const Frame& frame, int patch_size,
                   const std::string& frame_id) {
  if (patch_size < 2 || patch_size % 2 != 0) {
    throw std::invalid_argument("partition: patch size must be even and >= 2");
  }
  if (patch_size > frame.width || patch_size > frame.height) {
    throw std::invalid_argument("partition: patch size exceeds frame dimensions");
  }

  const std::vector<int> rows = axis_origins(frame.height, patch_size);
  const std::vector<int> cols = axis_origins(frame.width, patch_size);

  PatchSet set;
  set.frame_id = frame_id;
  set.patch_size = patch_size;
  set.patches.reserve(rows.size() * cols.size());
  set.origins.reserve(rows.size() * cols.size());

  for (int r0 : rows) {
    for (int c0 : cols) {
      Frame patch = make_frame(patch_size, patch_size);
      for (int c = 0; c < kChannels; ++c) {
        for (int r = 0; r < patch_size; ++r) {
          for (int col = 0; col < patch_size; ++col) {
            patch.at(c, r, col) = frame.at(c, r0 + r, c0 + col);
          }
        }
      }
      set.patches.push_back(std::move(patch));
      set.origins.emplace_back(r0, c0);
    }
  }
  return set;
}

Frame stitch(const PatchSet& set, int width, int height) {
  if (set.patches.size() != set.origins.size() || set.patches.empty()) {
    throw std::invalid_argument("stitch: inconsistent patch set");
  }
  Frame out = make_frame(width, height);
  const int l = set.patch_size;
  for (size_t i = 0; i < set.patches.size(); ++i) {
    const auto [r0, c0] = set.origins[i];
    if (r0 < 0 || c0 < 0 || r0 + l > height || c0 + l > width) {
      throw std::invalid_argument("stitch: patch outside the target frame");
    }
    const Frame& patch = set.patches[i];
    for (int c = 0; c < kChannels; ++c) {
      for (int r = 0; r < l; ++r) {
        for (int col = 0; col < l; ++col) {
          out.at(c, r0 + r, c0 + col) = patch.at(c, r, col);
        }
      }
    }
  }
  return out;
}

double coverage(const StrategySpec& spec, int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("coverage: empty source");
  }
  const double area = double(width) * double(height);
  if (spec.kind == StrategyKind::kFupic) {
    if (spec.patch_size < 2 || spec.patch_size % 2 != 0) {
      throw std::invalid_argument("coverage: patch size must be even and >= 2");
    }
    if (spec.patch_size > width || spec.patch_size > height) {
      throw std::invalid_argument("coverage: patch size exceeds source dimensions");
    }
    return 1.0;
  }
  if (spec.input_side < 1) {
    throw std::invalid_argument("coverage: input side must be >= 1");
  }
  if (spec.input_side > width || spec.input_side > height) {
    throw std::invalid_argument("coverage: input side exceeds source dimensions");
  }
  // center_crop keeps one input_side^2 window; grid mini-patches total the
  // same pixel count split across fragments; resize retains an input_side^2
  // pixel budget of the source.
  return double(spec.input_side) * double(spec.input_side) / area;
}

std::vector<SupervisionUnit> make_supervision_units(
    std::vector<PatchSet> patch_sets, const std::vector<double>& labels) {
  if (patch_sets.size() != labels.size()) {
    throw std::invalid_argument("make_supervision_units: one label per patch set");
  }
  for (double label : labels) {
    if (!(label >= 0.0 && label <= 1.0)) {
      throw std::invalid_argument("make_supervision_units: label out of [0,1]");
    }
  }
  std::vector<SupervisionUnit> units;
  units.reserve(patch_sets.size());
  for (size_t i = 0; i < patch_sets.size(); ++i) {
    SupervisionUnit u;
    u.frame_id = patch_sets[i].frame_id;
    u.label = labels[i];
    u.patches = std::move(patch_sets[i]);
    units.push_back(std::move(u));
  }
  return units;
}

void shuffle_units(std::vector<SupervisionUnit>& units, uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(units);
}

}  // namespace vqa
