#include "vqa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "model_internal.hpp"
#include "parallel.hpp"
#include "vqa/errors.hpp"
#include "vqa/metrics.hpp"
#include "vqa/rng.hpp"

namespace vqa {

namespace {

std::vector<std::vector<double>*> array_view(ParamSet& p) {
  std::vector<std::vector<double>*> v;
  for_each_array(p, [&](std::vector<double>& a) { v.push_back(&a); });
  return v;
}

std::vector<const std::vector<double>*> array_view(const ParamSet& p) {
  std::vector<const std::vector<double>*> v;
  for_each_array(p, [&](const std::vector<double>& a) { v.push_back(&a); });
  return v;
}

void zero_fill(ParamSet& p) {
  for_each_array(p, [](std::vector<double>& a) {
    std::fill(a.begin(), a.end(), 0.0);
  });
}

void accumulate(ParamSet& into, const ParamSet& from) {
  auto dst = array_view(into);
  auto src = array_view(from);
  for (size_t g = 0; g < dst.size(); ++g) {
    for (size_t i = 0; i < dst[g]->size(); ++i) {
      (*dst[g])[i] += (*src[g])[i];
    }
  }
}

// Names the first stage that produced a non-finite value for a patch.
[[noreturn]] void diagnose_nonfinite(const Frame& patch,
                                     const ModelParams& params) {
  auto all_finite = [](const std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  const FreqMaps maps = haar_forward(patch);
  if (!all_finite(maps.avg) || !all_finite(maps.h1) || !all_finite(maps.h2) ||
      !all_finite(maps.h3)) {
    throw NumericError("non-finite value after haar_forward");
  }
  const Mat z = embed_fuse(maps, params);
  if (!all_finite(z.a)) {
    throw NumericError("non-finite value after embed_fuse");
  }
  const std::vector<double> feature = encode(z, params);
  if (!all_finite(feature)) {
    throw NumericError("non-finite value after encode");
  }
  throw NumericError("non-finite value after heads");
}

double unit_loss(const SupervisionUnit& unit, const ModelParams& params) {
  const std::vector<PatchOutput> outputs =
      forward_frame(unit.patches, params, 1);
  return frame_loss(aggregate_region_aware(outputs), unit.label);
}

}  // namespace

UnitGradients compute_gradients(const SupervisionUnit& unit,
                                const ModelParams& params, int micro_batch,
                                int workers) {
  if (unit.patches.patches.empty()) {
    throw std::invalid_argument("compute_gradients: empty unit");
  }
  if (micro_batch < 1) {
    throw std::invalid_argument("compute_gradients: micro_batch must be >= 1");
  }
  const size_t n = unit.patches.size();

  // Pass 1: outputs only, so the frame-level seeds exist before any backward.
  const std::vector<PatchOutput> outputs =
      forward_frame(unit.patches, params, workers);
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(outputs[i].score) ||
        !std::isfinite(outputs[i].weight_logit)) {
      diagnose_nonfinite(unit.patches.patches[i], params);
    }
  }
  const FrameScore fs = aggregate_region_aware(outputs);
  const double loss = frame_loss(fs, unit.label);
  const double d_value = 2.0 * (fs.value - unit.label);

  std::vector<double> d_score(n), d_logit(n);
  for (size_t i = 0; i < n; ++i) {
    d_score[i] = d_value * fs.weights[i];
    d_logit[i] = d_value * fs.weights[i] * (outputs[i].score - fs.value);
  }

  // Pass 2: traced forward + backward per patch, chunked by micro_batch.
  // Per-patch gradients merge in patch order, so the totals are identical for
  // every chunking and worker count.
  UnitGradients result;
  result.loss = loss;
  result.grads = zero_params(params.config);

  const size_t chunk = std::min<size_t>(size_t(micro_batch), n);
  std::vector<ParamSet> patch_grads(chunk);
  for (auto& g : patch_grads) g = zero_params(params.config);
  std::vector<detail::PatchTape> tapes(chunk);

  for (size_t start = 0; start < n; start += chunk) {
    const size_t count = std::min(chunk, n - start);
    detail::parallel_for(count, workers, [&](size_t s) {
      const size_t i = start + s;
      zero_fill(patch_grads[s]);
      detail::patch_forward(unit.patches.patches[i], params, &tapes[s]);
      detail::patch_backward(tapes[s], params, d_score[i], d_logit[i],
                             patch_grads[s]);
    });
    for (size_t s = 0; s < count; ++s) {
      accumulate(result.grads, patch_grads[s]);
    }
  }

  bool finite = std::isfinite(loss);
  for_each_array(result.grads, [&](const std::vector<double>& a) {
    for (double v : a) finite = finite && std::isfinite(v);
  });
  if (!finite) {
    throw NumericError("non-finite value after backward");
  }
  return result;
}

AdamState make_adam_state(const ModelConfig& config) {
  AdamState st;
  st.m = zero_params(config);
  st.v = zero_params(config);
  return st;
}

void optimizer_step(ModelParams& params, const GradientSet& grads,
                    AdamState& state, const TrainConfig& config) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, double(state.step));

  auto theta = array_view(params.p);
  auto g = array_view(grads);
  auto m = array_view(state.m);
  auto v = array_view(state.v);
  if (theta.size() != g.size()) {
    throw std::invalid_argument("optimizer_step: parameter/gradient mismatch");
  }
  for (size_t a = 0; a < theta.size(); ++a) {
    if (theta[a]->size() != g[a]->size()) {
      throw std::invalid_argument("optimizer_step: shape mismatch");
    }
    for (size_t i = 0; i < theta[a]->size(); ++i) {
      const double grad = (*g[a])[i];
      double& mi = (*m[a])[i];
      double& vi = (*v[a])[i];
      mi = config.beta1 * mi + (1.0 - config.beta1) * grad;
      vi = config.beta2 * vi + (1.0 - config.beta2) * grad * grad;
      (*theta[a])[i] -=
          config.lr * (mi / bc1) / (std::sqrt(vi / bc2) + config.epsilon);
    }
  }
}

namespace {

struct UnitRef {
  size_t video = 0;
  size_t frame = 0;
};

SupervisionUnit build_full_cover_unit(const VideoManifest& manifest,
                                      size_t frame_idx, int patch_size) {
  const Frame frame = load_frame(manifest.frame_paths[frame_idx]);
  const std::string id =
      manifest.video_id + "#" + std::to_string(frame_idx);
  SupervisionUnit unit;
  unit.frame_id = id;
  unit.label = *manifest.mos;
  unit.patches = partition(frame, patch_size, id);
  return unit;
}

SupervisionUnit build_random_crop_unit(const VideoManifest& manifest,
                                       size_t frame_idx, int patch_size,
                                       Rng& rng) {
  const Frame frame = load_frame(manifest.frame_paths[frame_idx]);
  const std::string id =
      manifest.video_id + "#" + std::to_string(frame_idx);
  if (frame.height < patch_size || frame.width < patch_size) {
    throw DataError("frame " + manifest.frame_paths[frame_idx] +
                    " is smaller than the patch size");
  }
  const int r0 = int(rng.index(size_t(frame.height - patch_size + 1)));
  const int c0 = int(rng.index(size_t(frame.width - patch_size + 1)));

  Frame crop = make_frame(patch_size, patch_size);
  for (int c = 0; c < kChannels; ++c) {
    for (int r = 0; r < patch_size; ++r) {
      for (int col = 0; col < patch_size; ++col) {
        crop.at(c, r, col) = frame.at(c, r0 + r, c0 + col);
      }
    }
  }
  SupervisionUnit unit;
  unit.frame_id = id;
  unit.label = *manifest.mos;
  unit.patches.frame_id = id;
  unit.patches.patch_size = patch_size;
  unit.patches.patches.push_back(std::move(crop));
  unit.patches.origins.emplace_back(r0, c0);
  return unit;
}

}  // namespace

std::vector<VideoScore> score_videos(const std::vector<VideoManifest>& manifests,
                                     const ModelParams& params, size_t interval,
                                     int workers) {
  std::vector<VideoScore> scores;
  scores.reserve(manifests.size());
  for (const VideoManifest& manifest : manifests) {
    const std::vector<size_t> idx =
        sample_frame_indices(manifest.total_frames(), interval);
    std::vector<FrameScore> frames(idx.size());
    detail::parallel_for(idx.size(), workers, [&](size_t i) {
      const Frame frame = load_frame(manifest.frame_paths[idx[i]]);
      const PatchSet set =
          partition(frame, params.config.patch_size, std::to_string(idx[i]));
      FrameScore fs = aggregate_region_aware(forward_frame(set, params, 1));
      fs.frame_id = std::to_string(idx[i]);
      frames[i] = std::move(fs);
    });
    scores.push_back(aggregate_video(manifest.video_id, std::move(frames)));
  }
  return scores;
}

TrainResult train(const std::vector<VideoManifest>& manifests,
                  const TrainConfig& config) {
  config.model.validate();
  if (!(config.split > 0.0 && config.split < 1.0)) {
    throw std::invalid_argument("train: split fraction must be in (0,1)");
  }
  if (config.micro_batch < 1 || config.epochs < 0 || config.interval < 1 ||
      config.units_per_step < 1) {
    throw std::invalid_argument("train: invalid config");
  }
  if (manifests.size() < 2) {
    throw DataError("train: need at least 2 videos for a train/test split");
  }

  // Video-level split; frames of one video never straddle it.
  std::vector<size_t> order(manifests.size());
  std::iota(order.begin(), order.end(), size_t(0));
  Rng split_rng(Rng::derive(config.seed, 2));
  split_rng.shuffle(order);
  size_t n_train = size_t(std::llround(config.split * double(manifests.size())));
  n_train = std::max<size_t>(1, std::min(n_train, manifests.size() - 1));

  TrainResult result;
  std::vector<size_t> train_idx(order.begin(), order.begin() + long(n_train));
  for (size_t i = 0; i < manifests.size(); ++i) {
    const std::string& id = manifests[order[i]].video_id;
    (i < n_train ? result.train_videos : result.test_videos).push_back(id);
  }
  for (size_t v : train_idx) {
    if (!manifests[v].mos.has_value()) {
      throw DataError("train: video " + manifests[v].video_id + " has no mos");
    }
  }

  result.params = init_params(config.model, Rng::derive(config.seed, 1));

  std::vector<UnitRef> refs;
  std::vector<VideoManifest> train_manifests;
  for (size_t v : train_idx) {
    train_manifests.push_back(manifests[v]);
    const std::vector<size_t> idx =
        sample_frame_indices(manifests[v].total_frames(), config.interval);
    for (size_t f : idx) {
      refs.push_back({v, f});
    }
  }

  std::vector<double> train_mos;
  for (const auto& m : train_manifests) train_mos.push_back(*m.mos);

  AdamState adam = make_adam_state(config.model);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng epoch_rng(Rng::derive(config.seed, 100 + uint64_t(epoch)));
    std::vector<UnitRef> epoch_order = refs;
    epoch_rng.shuffle(epoch_order);

    // Loss over a step is the mean over its supervision units; gradients
    // average the per-unit gradients the same way.
    double loss_sum = 0.0;
    const size_t per_step = size_t(config.units_per_step);
    for (size_t start = 0; start < epoch_order.size(); start += per_step) {
      const size_t count = std::min(per_step, epoch_order.size() - start);
      GradientSet step_grads = zero_params(config.model);
      for (size_t u = 0; u < count; ++u) {
        const UnitRef& ref = epoch_order[start + u];
        SupervisionUnit unit =
            config.sampling == TrainConfig::Sampling::kRandomCrop
                ? build_random_crop_unit(manifests[ref.video], ref.frame,
                                         config.model.patch_size, epoch_rng)
                : build_full_cover_unit(manifests[ref.video], ref.frame,
                                        config.model.patch_size);
        UnitGradients ug = compute_gradients(unit, result.params,
                                             config.micro_batch, config.workers);
        accumulate(step_grads, ug.grads);
        loss_sum += ug.loss;
      }
      if (count > 1) {
        const double inv = 1.0 / double(count);
        for_each_array(step_grads, [&](std::vector<double>& a) {
          for (double& v : a) v *= inv;
        });
      }
      optimizer_step(result.params, step_grads, adam, config);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / double(epoch_order.size());
    try {
      const std::vector<VideoScore> scores = score_videos(
          train_manifests, result.params, config.interval, config.workers);
      std::vector<double> preds;
      for (const auto& s : scores) preds.push_back(s.value);
      stats.train_srcc = srcc(preds, train_mos);
    } catch (const NumericError&) {
      stats.train_srcc = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.push_back(stats);
  }

  if (!config.checkpoint_out.empty()) {
    save_checkpoint(result.params, config.checkpoint_out);
  }
  if (!config.history_csv.empty()) {
    std::ofstream out(config.history_csv);
    if (!out) {
      throw DataError("cannot open history csv: " + config.history_csv);
    }
    out << "epoch,mean_loss,train_srcc\n";
    char buf[128];
    for (const EpochStats& s : result.history) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", s.epoch, s.mean_loss,
                    s.train_srcc);
      out << buf;
    }
  }
  return result;
}

double grad_check(const ModelParams& params, const SupervisionUnit& unit,
                  double epsilon, size_t max_coords_per_group, uint64_t seed) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("grad_check: epsilon must be positive");
  }
  const UnitGradients base = compute_gradients(unit, params);

  ModelParams probe = params;
  auto theta = array_view(probe.p);
  auto analytic = array_view(base.grads);

  double max_rel = 0.0;
  for (size_t g = 0; g < theta.size(); ++g) {
    const size_t len = theta[g]->size();
    std::vector<size_t> coords;
    if (max_coords_per_group == 0 || len <= max_coords_per_group) {
      coords.resize(len);
      std::iota(coords.begin(), coords.end(), size_t(0));
    } else {
      // Seeded subset without replacement, stratified per group.
      std::vector<size_t> all(len);
      std::iota(all.begin(), all.end(), size_t(0));
      Rng rng(Rng::derive(seed, 50 + g));
      rng.shuffle(all);
      coords.assign(all.begin(), all.begin() + long(max_coords_per_group));
      std::sort(coords.begin(), coords.end());
    }
    for (size_t idx : coords) {
      const double orig = (*theta[g])[idx];
      (*theta[g])[idx] = orig + epsilon;
      const double lp = unit_loss(unit, probe);
      (*theta[g])[idx] = orig - epsilon;
      const double lm = unit_loss(unit, probe);
      (*theta[g])[idx] = orig;
      const double numeric = (lp - lm) / (2.0 * epsilon);
      const double exact = (*analytic[g])[idx];
      const double rel = std::fabs(exact - numeric) /
                         std::max({std::fabs(exact), std::fabs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace vqa
