#pragma once

#include <array>
#include <vector>

#include "vqa/haar.hpp"
#include "vqa/model.hpp"

// Traced forward pass and its exact reverse-mode companion. The public model
// functions are thin wrappers over these with a null tape.
namespace vqa::detail {

struct LnTape {
  std::vector<double> xhat;  // n * d
  std::vector<double> istd;  // n
};

struct BlockTape {
  Mat x_in;
  LnTape ln1;
  Mat a;        // normalized block input
  Mat q, k, v;
  std::vector<std::vector<size_t>> windows;
  std::vector<std::vector<double>> attn;  // softmax rows per window
  Mat attn_out;
  Mat x_mid;    // after the attention residual
  LnTape ln2;
  Mat f;        // normalized x_mid
  Mat h_pre, h_act;
};

struct PatchTape {
  std::array<Mat, 4> comp_tokens;  // per-component token matrices
  Mat fused;                       // sum_j alpha_j * tokens_j
  Mat z;                           // encoder input
  std::vector<BlockTape> blocks;
  std::vector<double> feature;
};

Mat embed_fuse_impl(const FreqMaps& maps, const ModelParams& params,
                    PatchTape* tape);
std::vector<double> encode_impl(const Mat& tokens, const ModelParams& params,
                                PatchTape* tape);
PatchOutput patch_forward(const Frame& patch, const ModelParams& params,
                          PatchTape* tape);

// Accumulates d(loss)/d(theta) into grads given the seeds d_score = dL/do and
// d_logit = dL/dw for this patch. All reductions are index-ascending.
void patch_backward(const PatchTape& tape, const ModelParams& params,
                    double d_score, double d_logit, ParamSet& grads);

// Token index groups for one block; odd blocks use a cyclic half-window
// shift. A trailing group may be smaller when n is not a window multiple.
std::vector<std::vector<size_t>> window_groups(size_t n, int window,
                                               bool shifted);

}  // namespace vqa::detail
