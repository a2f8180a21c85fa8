#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vqa/frame_io.hpp"
#include "vqa/model.hpp"
#include "vqa/sampler.hpp"
#include "vqa/scoring.hpp"

namespace vqa {

using GradientSet = ParamSet;

struct TrainConfig {
  uint64_t seed = 1;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 30;
  int micro_batch = 16;   // patches per forward/backward chunk
  int units_per_step = 1; // supervision units averaged into one update
  double split = 0.8;     // train fraction, split at video level
  size_t interval = 10;   // frame sampling stride t
  int workers = 1;
  ModelConfig model;

  // kFullCover is the frame-as-supervision-unit strategy; kRandomCrop is the
  // ablation baseline that trains on one random patch per frame with the
  // video score as its direct label.
  enum class Sampling { kFullCover, kRandomCrop };
  Sampling sampling = Sampling::kFullCover;

  std::string checkpoint_out;  // written after training when non-empty
  std::string history_csv;     // per-epoch stats when non-empty
};

struct UnitGradients {
  double loss = 0.0;
  GradientSet grads;
};

// Exact reverse-mode gradients of
//   frame_loss(aggregate_region_aware(forward_frame(unit)), unit.label)
// with respect to every parameter. Patches are processed in chunks of
// micro_batch; per-patch contributions are merged in patch order, so the
// result is independent of micro_batch and workers.
UnitGradients compute_gradients(const SupervisionUnit& unit,
                                const ModelParams& params,
                                int micro_batch = 1 << 30, int workers = 1);

struct AdamState {
  size_t step = 0;
  ParamSet m, v;
};

AdamState make_adam_state(const ModelConfig& config);

// Bias-corrected adaptive-moment update.
void optimizer_step(ModelParams& params, const GradientSet& grads,
                    AdamState& state, const TrainConfig& config);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_srcc = 0.0;  // NaN while predictions are degenerate
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
  std::vector<std::string> train_videos;
  std::vector<std::string> test_videos;
};

// Deterministic given config.seed: initialization, the video-level split and
// per-epoch unit shuffles all derive from it. Every training video needs a
// mos label. epochs == 0 returns the initialization unchanged.
TrainResult train(const std::vector<VideoManifest>& manifests,
                  const TrainConfig& config);

// Central-difference check of compute_gradients over every coordinate, or a
// seeded subset of max_coords_per_group per parameter array when that is
// nonzero. Returns max |g_a - g_n| / max(|g_a|, |g_n|, 1e-8).
double grad_check(const ModelParams& params, const SupervisionUnit& unit,
                  double epsilon, size_t max_coords_per_group = 0,
                  uint64_t seed = 0);

// Inference: sampled frames -> full-cover patches -> region-aware frame
// scores -> mean video score.
std::vector<VideoScore> score_videos(const std::vector<VideoManifest>& manifests,
                                     const ModelParams& params, size_t interval,
                                     int workers = 1);

}  // namespace vqa
