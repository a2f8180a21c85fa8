#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vqa/haar.hpp"
#include "vqa/sampler.hpp"

namespace vqa {

// Dense row-major matrix of doubles; all model math runs in double with
// index-ascending reductions so results are bit-reproducible.
struct Mat {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  double at(size_t r, size_t c) const { return a[r * cols + c]; }
  double& at(size_t r, size_t c) { return a[r * cols + c]; }
  double* row(size_t r) { return a.data() + r * cols; }
  const double* row(size_t r) const { return a.data() + r * cols; }
};

struct ModelConfig {
  int patch_size = 64;  // l; even, with l/2 divisible by token_side
  int token_side = 4;   // s; each half-res map is cut into s x s x 3 tokens
  int embed_dim = 32;   // d
  int depth = 2;        // encoder blocks; windows shift on odd blocks
  int window = 4;       // tokens per attention window
  int ffn_hidden = 64;

  int token_dim() const { return kChannels * token_side * token_side; }
  int tokens_per_side() const { return patch_size / 2 / token_side; }
  int token_count() const { return tokens_per_side() * tokens_per_side(); }
  void validate() const;  // throws std::invalid_argument
};

struct BlockParams {
  std::vector<double> ln1_gamma, ln1_beta;          // d
  std::vector<double> wq, bq, wk, bk, wv, bv;       // d x d, d
  std::vector<double> wo, bo;                       // d x d, d
  std::vector<double> ln2_gamma, ln2_beta;          // d
  std::vector<double> w1, b1;                       // h x d, h
  std::vector<double> w2, b2;                       // d x h, d
};

// Every learnable array. for_each_array visits them in a fixed order; that
// order is also the checkpoint layout (see save_checkpoint).
struct ParamSet {
  std::vector<double> alpha;      // 4 fusion coefficients
  std::vector<double> le_w, le_b; // shared linear embedding: d x token_dim, d
  std::vector<BlockParams> blocks;
  std::vector<double> score_w, score_b;    // d, 1
  std::vector<double> weight_w, weight_b;  // d, 1
};

template <typename PS, typename Fn>
void for_each_array(PS& p, Fn&& fn) {
  fn(p.alpha);
  fn(p.le_w);
  fn(p.le_b);
  for (auto& b : p.blocks) {
    fn(b.ln1_gamma);
    fn(b.ln1_beta);
    fn(b.wq);
    fn(b.bq);
    fn(b.wk);
    fn(b.bk);
    fn(b.wv);
    fn(b.bv);
    fn(b.wo);
    fn(b.bo);
    fn(b.ln2_gamma);
    fn(b.ln2_beta);
    fn(b.w1);
    fn(b.b1);
    fn(b.w2);
    fn(b.b2);
  }
  fn(p.score_w);
  fn(p.score_b);
  fn(p.weight_w);
  fn(p.weight_b);
}

struct ModelParams {
  ModelConfig config;
  ParamSet p;
};

// Raw per-patch outputs: an unbounded score and a weight logit that is
// normalized across the frame's patches downstream.
struct PatchOutput {
  double score = 0.0;
  double weight_logit = 0.0;
  size_t index = 0;
  std::string frame_id;
};

// alpha starts at (1,1,1,1); matrices draw from uniform(-1/sqrt(fan_in),
// +1/sqrt(fan_in)); biases, LN offsets start at zero, LN scales at one.
ModelParams init_params(const ModelConfig& config, uint64_t seed);

ParamSet zero_params(const ModelConfig& config);
size_t param_count(const ModelConfig& config);

// Eq-style fusion: each component is cut into tokens, passed through the one
// shared linear embedding, and the four embeddings are mixed by alpha:
//   z_t = a1*LE(avg_t) + a2*LE(h1_t) + a3*LE(h2_t) + a4*LE(h3_t)
Mat embed_fuse(const FreqMaps& maps, const ModelParams& params);

// Windowed self-attention encoder, mean-pooled over tokens. Depth 0 returns
// the token mean unchanged. No positional terms and no cross-patch state.
std::vector<double> encode(const Mat& tokens, const ModelParams& params);

// The two affine heads on the shared trunk feature.
PatchOutput heads(const std::vector<double>& feature, const ModelParams& params);

// haar_forward -> embed_fuse -> encode -> heads for every patch, outputs in
// patch order. Pure in params; patches may be processed by parallel workers.
std::vector<PatchOutput> forward_frame(const PatchSet& set,
                                       const ModelParams& params,
                                       int workers = 1);

// Flat binary checkpoint: magic "VQCK", u32 version, six u32 config fields
// (patch_size, token_side, embed_dim, depth, window, ffn_hidden), u64 count,
// then count little-endian f64 values in for_each_array order.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace vqa
