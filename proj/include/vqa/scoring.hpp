#pragma once

#include <string>
#include <vector>

#include "vqa/model.hpp"

namespace vqa {

// Frame score as a convex combination of patch scores; weights are
// nonnegative and sum to 1.
struct FrameScore {
  std::string frame_id;
  double value = 0.0;
  std::vector<double> weights;
};

struct VideoScore {
  std::string video_id;
  double value = 0.0;
  std::vector<FrameScore> frame_scores;
};

// Uniform weights 1/N.
FrameScore aggregate_mean(const std::vector<PatchOutput>& outputs);

// Region-aware weights: y_i = exp(w_i - max w) / sum exp(w_j - max w), then
// O = sum y_i * o_i. Equal logits reduce to aggregate_mean bit for bit.
FrameScore aggregate_region_aware(const std::vector<PatchOutput>& outputs);

// Final video score: the arithmetic mean of the sampled frame scores.
VideoScore aggregate_video(const std::string& video_id,
                           std::vector<FrameScore> frame_scores);

// Squared error against the frame label in [0,1].
double frame_loss(const FrameScore& pred, double label);

}  // namespace vqa
