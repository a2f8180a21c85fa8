#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vqa/frame_io.hpp"

namespace vqa {

// Whole-clip content indicators. Luma is 0.299R + 0.587G + 0.114B.
//   spatial_activity: max over frames of stdev of the Sobel magnitude
//   temporal_activity: max over consecutive frame pairs of stdev(Y_t - Y_{t-1})
//   noise: per-frame MAD of the 3x3 Laplacian response / 0.6745, averaged
//   brightness: mean luma over the clip
//   contrast: stdev of luma over the clip
// Sobel and Laplacian statistics use interior pixels (where the 3x3 stencil
// fits); stdevs are population stdevs.
struct IndicatorVector {
  double spatial_activity = 0.0;
  double temporal_activity = 0.0;
  double noise = 0.0;
  double brightness = 0.0;
  double contrast = 0.0;
};

IndicatorVector indicators(const std::vector<Frame>& clip);  // needs >= 2 frames

// Deviation of the selected subset's per-indicator 5-bin histograms from
// uniform: sum over indicators and bins of (fraction - 1/5)^2. Bins come from
// min-max normalizing each indicator over the whole pool.
double representative_objective(const std::vector<IndicatorVector>& pool,
                                const std::vector<size_t>& selected);

// Greedy selection of k clips: each step adds the clip that minimizes the
// objective, ties broken by lowest index. Selections are nested: the result
// for k-1 is the result for k minus its last pick.
std::vector<size_t> representative_sample(const std::vector<IndicatorVector>& pool,
                                          size_t k);

struct PairComparisonRecord {
  std::string winner_id;
  std::string loser_id;
  int64_t count = 1;
};

struct MosRecord {
  std::string video_id;
  double mos = 0.0;
};

struct BtResult {
  std::vector<std::string> ids;   // first-appearance order
  std::vector<double> scores;     // latent scores, sum zero per component
};

// Maximum-likelihood Bradley-Terry scores from pairwise outcomes, solved by
// the MM fixed-point iteration until the likelihood gradient drops below
// 1e-10. A disconnected comparison graph is scaled per component with a
// warning on stderr.
BtResult bradley_terry_fit(const std::vector<PairComparisonRecord>& records);

// Latent scores min-max rescaled to [0,1] (per component when disconnected);
// a degenerate score range maps everything to 0.5.
std::vector<MosRecord> bradley_terry_mos(
    const std::vector<PairComparisonRecord>& records);

}  // namespace vqa
