#include "vqa/scoring.hpp"

#include <cmath>
#include <stdexcept>

#include "vqa/errors.hpp"

namespace vqa {

namespace {

// Both aggregations go through the same convex combination so that equal
// logits reproduce the uniform mean bit for bit.
FrameScore combine(const std::vector<PatchOutput>& outputs,
                   std::vector<double> weights) {
  FrameScore fs;
  fs.frame_id = outputs.front().frame_id;
  fs.weights = std::move(weights);
  double acc = 0.0;
  for (size_t i = 0; i < outputs.size(); ++i) {
    acc += fs.weights[i] * outputs[i].score;
  }
  fs.value = acc;
  return fs;
}

}  // namespace

FrameScore aggregate_mean(const std::vector<PatchOutput>& outputs) {
  if (outputs.empty()) {
    throw std::invalid_argument("aggregate_mean: empty output list");
  }
  const double w = 1.0 / double(outputs.size());
  return combine(outputs, std::vector<double>(outputs.size(), w));
}

FrameScore aggregate_region_aware(const std::vector<PatchOutput>& outputs) {
  if (outputs.empty()) {
    throw std::invalid_argument("aggregate_region_aware: empty output list");
  }
  const size_t n = outputs.size();
  double max_logit = outputs[0].weight_logit;
  for (const auto& o : outputs) {
    if (!std::isfinite(o.weight_logit) || !std::isfinite(o.score)) {
      throw NumericError("aggregate_region_aware: non-finite patch output");
    }
    max_logit = std::max(max_logit, o.weight_logit);
  }
  std::vector<double> y(n);
  double denom = 0.0;
  for (size_t i = 0; i < n; ++i) {
    y[i] = std::exp(outputs[i].weight_logit - max_logit);
    denom += y[i];
  }
  for (size_t i = 0; i < n; ++i) {
    y[i] /= denom;
  }
  return combine(outputs, std::move(y));
}

VideoScore aggregate_video(const std::string& video_id,
                           std::vector<FrameScore> frame_scores) {
  if (frame_scores.empty()) {
    throw std::invalid_argument("aggregate_video: empty frame score list");
  }
  VideoScore vs;
  vs.video_id = video_id;
  double acc = 0.0;
  for (const auto& fs : frame_scores) {
    acc += fs.value;
  }
  vs.value = acc / double(frame_scores.size());
  vs.frame_scores = std::move(frame_scores);
  return vs;
}

double frame_loss(const FrameScore& pred, double label) {
  if (!(label >= 0.0 && label <= 1.0)) {
    throw std::invalid_argument("frame_loss: label out of [0,1]");
  }
  const double d = pred.value - label;
  return d * d;
}

}  // namespace vqa
