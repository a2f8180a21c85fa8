#include "vqa/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "model_internal.hpp"
#include "parallel.hpp"
#include "vqa/errors.hpp"
#include "vqa/rng.hpp"

namespace vqa {

void ModelConfig::validate() const {
  if (patch_size < 2 || patch_size % 2 != 0) {
    throw std::invalid_argument("model config: patch size must be even and >= 2");
  }
  if (token_side < 1 || (patch_size / 2) % token_side != 0) {
    throw std::invalid_argument(
        "model config: half-resolution side must be divisible by token side");
  }
  if (embed_dim < 1 || depth < 0 || window < 1 || ffn_hidden < 1) {
    throw std::invalid_argument("model config: invalid encoder dimensions");
  }
}

ParamSet zero_params(const ModelConfig& config) {
  config.validate();
  const size_t d = size_t(config.embed_dim);
  const size_t m = size_t(config.token_dim());
  const size_t h = size_t(config.ffn_hidden);
  ParamSet p;
  p.alpha.assign(4, 0.0);
  p.le_w.assign(d * m, 0.0);
  p.le_b.assign(d, 0.0);
  p.blocks.resize(size_t(config.depth));
  for (auto& b : p.blocks) {
    b.ln1_gamma.assign(d, 0.0);
    b.ln1_beta.assign(d, 0.0);
    b.wq.assign(d * d, 0.0);
    b.bq.assign(d, 0.0);
    b.wk.assign(d * d, 0.0);
    b.bk.assign(d, 0.0);
    b.wv.assign(d * d, 0.0);
    b.bv.assign(d, 0.0);
    b.wo.assign(d * d, 0.0);
    b.bo.assign(d, 0.0);
    b.ln2_gamma.assign(d, 0.0);
    b.ln2_beta.assign(d, 0.0);
    b.w1.assign(h * d, 0.0);
    b.b1.assign(h, 0.0);
    b.w2.assign(d * h, 0.0);
    b.b2.assign(d, 0.0);
  }
  p.score_w.assign(d, 0.0);
  p.score_b.assign(1, 0.0);
  p.weight_w.assign(d, 0.0);
  p.weight_b.assign(1, 0.0);
  return p;
}

size_t param_count(const ModelConfig& config) {
  ParamSet p = zero_params(config);
  size_t n = 0;
  for_each_array(p, [&](const std::vector<double>& a) { n += a.size(); });
  return n;
}

ModelParams init_params(const ModelConfig& config, uint64_t seed) {
  ModelParams mp;
  mp.config = config;
  mp.p = zero_params(config);
  mp.p.alpha.assign(4, 1.0);

  Rng rng(seed);
  auto fill = [&](std::vector<double>& w, int fan_in) {
    const double a = 1.0 / std::sqrt(double(fan_in));
    for (double& x : w) x = rng.uniform(-a, a);
  };
  fill(mp.p.le_w, config.token_dim());
  for (auto& b : mp.p.blocks) {
    b.ln1_gamma.assign(b.ln1_gamma.size(), 1.0);
    b.ln2_gamma.assign(b.ln2_gamma.size(), 1.0);
    fill(b.wq, config.embed_dim);
    fill(b.wk, config.embed_dim);
    fill(b.wv, config.embed_dim);
    fill(b.wo, config.embed_dim);
    fill(b.w1, config.embed_dim);
    fill(b.w2, config.ffn_hidden);
  }
  fill(mp.p.score_w, config.embed_dim);
  // The weight head starts at zero: region weights open uniform (the mean
  // aggregation) and sharpen only as the loss asks for it. A random start
  // here saturates the weight softmax early and can stall training.
  return mp;
}

namespace detail {

namespace {

constexpr double kLnEps = 1e-6;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  return cdf + x * std::exp(-0.5 * x * x) * kInvSqrt2Pi;
}

// out = x * W^T + b with W stored row-major as (out_dim, in_dim).
Mat linear(const Mat& x, const std::vector<double>& w,
           const std::vector<double>& b, size_t out_dim) {
  const size_t in_dim = x.cols;
  Mat out(x.rows, out_dim);
  for (size_t t = 0; t < x.rows; ++t) {
    const double* xr = x.row(t);
    double* yr = out.row(t);
    for (size_t o = 0; o < out_dim; ++o) {
      const double* wr = w.data() + o * in_dim;
      double acc = b[o];
      for (size_t i = 0; i < in_dim; ++i) {
        acc += wr[i] * xr[i];
      }
      yr[o] = acc;
    }
  }
  return out;
}

// Accumulates dW += dy^T x, db += colsum(dy) and returns dx = dy W.
Mat linear_backward(const Mat& x, const Mat& dy, const std::vector<double>& w,
                    std::vector<double>& dw, std::vector<double>& db) {
  const size_t in_dim = x.cols;
  const size_t out_dim = dy.cols;
  for (size_t t = 0; t < x.rows; ++t) {
    const double* xr = x.row(t);
    const double* dyr = dy.row(t);
    for (size_t o = 0; o < out_dim; ++o) {
      const double g = dyr[o];
      db[o] += g;
      double* dwr = dw.data() + o * in_dim;
      for (size_t i = 0; i < in_dim; ++i) {
        dwr[i] += g * xr[i];
      }
    }
  }
  Mat dx(x.rows, in_dim);
  for (size_t t = 0; t < x.rows; ++t) {
    const double* dyr = dy.row(t);
    double* dxr = dx.row(t);
    for (size_t o = 0; o < out_dim; ++o) {
      const double g = dyr[o];
      const double* wr = w.data() + o * in_dim;
      for (size_t i = 0; i < in_dim; ++i) {
        dxr[i] += g * wr[i];
      }
    }
  }
  return dx;
}

Mat layer_norm(const Mat& x, const std::vector<double>& gamma,
               const std::vector<double>& beta, LnTape* tape) {
  const size_t n = x.rows, d = x.cols;
  Mat out(n, d);
  if (tape) {
    tape->xhat.assign(n * d, 0.0);
    tape->istd.assign(n, 0.0);
  }
  for (size_t t = 0; t < n; ++t) {
    const double* xr = x.row(t);
    double mu = 0.0;
    for (size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= double(d);
    double var = 0.0;
    for (size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= double(d);
    const double istd = 1.0 / std::sqrt(var + kLnEps);
    double* yr = out.row(t);
    for (size_t j = 0; j < d; ++j) {
      const double xh = (xr[j] - mu) * istd;
      if (tape) tape->xhat[t * d + j] = xh;
      yr[j] = gamma[j] * xh + beta[j];
    }
    if (tape) tape->istd[t] = istd;
  }
  return out;
}

Mat layer_norm_backward(const LnTape& tape, const Mat& dy,
                        const std::vector<double>& gamma,
                        std::vector<double>& dgamma,
                        std::vector<double>& dbeta) {
  const size_t n = dy.rows, d = dy.cols;
  Mat dx(n, d);
  for (size_t t = 0; t < n; ++t) {
    const double* dyr = dy.row(t);
    const double* xh = tape.xhat.data() + t * d;
    double m1 = 0.0, m2 = 0.0;
    for (size_t j = 0; j < d; ++j) {
      dgamma[j] += dyr[j] * xh[j];
      dbeta[j] += dyr[j];
      const double dxh = dyr[j] * gamma[j];
      m1 += dxh;
      m2 += dxh * xh[j];
    }
    m1 /= double(d);
    m2 /= double(d);
    double* dxr = dx.row(t);
    const double istd = tape.istd[t];
    for (size_t j = 0; j < d; ++j) {
      const double dxh = dyr[j] * gamma[j];
      dxr[j] = istd * (dxh - m1 - xh[j] * m2);
    }
  }
  return dx;
}

// Scaled-dot-product attention inside each window; rows of `attn` hold the
// softmax coefficients for the backward pass.
Mat window_attention(const Mat& q, const Mat& k, const Mat& v,
                     const std::vector<std::vector<size_t>>& windows,
                     std::vector<std::vector<double>>* attn) {
  const size_t d = q.cols;
  const double scale = 1.0 / std::sqrt(double(d));
  Mat out(q.rows, d);
  if (attn) attn->assign(windows.size(), {});
  for (size_t g = 0; g < windows.size(); ++g) {
    const auto& idx = windows[g];
    const size_t ws = idx.size();
    std::vector<double> probs(ws * ws, 0.0);
    for (size_t r = 0; r < ws; ++r) {
      const double* qr = q.row(idx[r]);
      double row_max = -1e300;
      for (size_t c = 0; c < ws; ++c) {
        const double* kr = k.row(idx[c]);
        double acc = 0.0;
        for (size_t e = 0; e < d; ++e) acc += qr[e] * kr[e];
        probs[r * ws + c] = acc * scale;
        row_max = std::max(row_max, probs[r * ws + c]);
      }
      double denom = 0.0;
      for (size_t c = 0; c < ws; ++c) {
        probs[r * ws + c] = std::exp(probs[r * ws + c] - row_max);
        denom += probs[r * ws + c];
      }
      for (size_t c = 0; c < ws; ++c) probs[r * ws + c] /= denom;
      double* outr = out.row(idx[r]);
      for (size_t c = 0; c < ws; ++c) {
        const double p = probs[r * ws + c];
        const double* vr = v.row(idx[c]);
        for (size_t e = 0; e < d; ++e) outr[e] += p * vr[e];
      }
    }
    if (attn) (*attn)[g] = std::move(probs);
  }
  return out;
}

void window_attention_backward(const Mat& q, const Mat& k, const Mat& v,
                               const std::vector<std::vector<size_t>>& windows,
                               const std::vector<std::vector<double>>& attn,
                               const Mat& d_out, Mat& dq, Mat& dk, Mat& dv) {
  const size_t d = q.cols;
  const double scale = 1.0 / std::sqrt(double(d));
  for (size_t g = 0; g < windows.size(); ++g) {
    const auto& idx = windows[g];
    const size_t ws = idx.size();
    const std::vector<double>& probs = attn[g];
    std::vector<double> dprobs(ws * ws, 0.0);
    for (size_t r = 0; r < ws; ++r) {
      const double* dor = d_out.row(idx[r]);
      // dA(r,c) = <d_out_r, v_c>; dv_c += A(r,c) * d_out_r
      for (size_t c = 0; c < ws; ++c) {
        const double* vr = v.row(idx[c]);
        double* dvr = dv.row(idx[c]);
        const double p = probs[r * ws + c];
        double acc = 0.0;
        for (size_t e = 0; e < d; ++e) {
          acc += dor[e] * vr[e];
          dvr[e] += p * dor[e];
        }
        dprobs[r * ws + c] = acc;
      }
      // softmax rows: dP = A o (dA - <dA, A>)
      double dot = 0.0;
      for (size_t c = 0; c < ws; ++c) dot += dprobs[r * ws + c] * probs[r * ws + c];
      for (size_t c = 0; c < ws; ++c) {
        dprobs[r * ws + c] = probs[r * ws + c] * (dprobs[r * ws + c] - dot);
      }
      double* dqr = dq.row(idx[r]);
      const double* qr = q.row(idx[r]);
      for (size_t c = 0; c < ws; ++c) {
        const double dp = dprobs[r * ws + c] * scale;
        const double* kr = k.row(idx[c]);
        double* dkr = dk.row(idx[c]);
        for (size_t e = 0; e < d; ++e) {
          dqr[e] += dp * kr[e];
          dkr[e] += dp * qr[e];
        }
      }
    }
  }
}

// Cuts one planar component into row-major s x s x 3 tokens, channel-major
// inside each token.
Mat component_tokens(const std::vector<double>& comp, int half, int side) {
  const int per_axis = half / side;
  const size_t n = size_t(per_axis) * per_axis;
  const size_t m = size_t(kChannels) * side * side;
  Mat tok(n, m);
  for (int tr = 0; tr < per_axis; ++tr) {
    for (int tc = 0; tc < per_axis; ++tc) {
      double* row = tok.row(size_t(tr) * per_axis + tc);
      size_t out = 0;
      for (int c = 0; c < kChannels; ++c) {
        for (int dr = 0; dr < side; ++dr) {
          for (int dc = 0; dc < side; ++dc) {
            row[out++] =
                comp[(size_t(c) * half + size_t(tr * side + dr)) * half +
                     size_t(tc * side + dc)];
          }
        }
      }
    }
  }
  return tok;
}

}  // namespace

std::vector<std::vector<size_t>> window_groups(size_t n, int window,
                                               bool shifted) {
  const size_t w = std::min(size_t(window), n);
  const size_t shift = shifted ? w / 2 : 0;
  std::vector<std::vector<size_t>> groups;
  for (size_t start = 0; start < n; start += w) {
    const size_t end = std::min(n, start + w);
    std::vector<size_t> idx(end - start);
    for (size_t j = start; j < end; ++j) {
      idx[j - start] = (j + shift) % n;
    }
    groups.push_back(std::move(idx));
  }
  return groups;
}

Mat embed_fuse_impl(const FreqMaps& maps, const ModelParams& params,
                    PatchTape* tape) {
  const ModelConfig& cfg = params.config;
  if (maps.source_size != cfg.patch_size) {
    throw std::invalid_argument("embed_fuse: component size does not match config");
  }
  const int half = maps.half();
  const int side = cfg.token_side;
  if (half % side != 0) {
    throw std::invalid_argument("embed_fuse: token grid does not divide the maps");
  }

  std::array<Mat, 4> tokens = {
      component_tokens(maps.avg, half, side),
      component_tokens(maps.h1, half, side),
      component_tokens(maps.h2, half, side),
      component_tokens(maps.h3, half, side),
  };
  const size_t n = tokens[0].rows;
  const size_t m = tokens[0].cols;

  // z = LE(sum_j alpha_j tok_j) + (sum_j alpha_j) * bias, identical to
  // summing the four shared-weight embeddings.
  Mat fused(n, m);
  for (size_t j = 0; j < 4; ++j) {
    const double a = params.p.alpha[j];
    for (size_t i = 0; i < n * m; ++i) {
      fused.a[i] += a * tokens[j].a[i];
    }
  }
  double alpha_sum = 0.0;
  for (double a : params.p.alpha) alpha_sum += a;
  std::vector<double> bias(params.p.le_b.size());
  for (size_t i = 0; i < bias.size(); ++i) bias[i] = alpha_sum * params.p.le_b[i];
  Mat z = linear(fused, params.p.le_w, bias, size_t(cfg.embed_dim));

  if (tape) {
    tape->comp_tokens = std::move(tokens);
    tape->fused = std::move(fused);
    tape->z = z;
  }
  return z;
}

std::vector<double> encode_impl(const Mat& tokens, const ModelParams& params,
                                PatchTape* tape) {
  const ModelConfig& cfg = params.config;
  const size_t n = tokens.rows;
  const size_t d = size_t(cfg.embed_dim);
  if (n == 0 || tokens.cols != d) {
    throw std::invalid_argument("encode: empty or mismatched token sequence");
  }
  if (tape) tape->blocks.resize(size_t(cfg.depth));

  Mat x = tokens;
  for (int b = 0; b < cfg.depth; ++b) {
    BlockTape local;
    BlockTape* bt = tape ? &tape->blocks[size_t(b)] : &local;
    const BlockParams& bp = params.p.blocks[size_t(b)];

    bt->x_in = x;
    bt->a = layer_norm(bt->x_in, bp.ln1_gamma, bp.ln1_beta, &bt->ln1);
    bt->q = linear(bt->a, bp.wq, bp.bq, d);
    bt->k = linear(bt->a, bp.wk, bp.bk, d);
    bt->v = linear(bt->a, bp.wv, bp.bv, d);
    bt->windows = window_groups(n, cfg.window, b % 2 == 1);
    bt->attn_out = window_attention(bt->q, bt->k, bt->v, bt->windows, &bt->attn);
    Mat y = linear(bt->attn_out, bp.wo, bp.bo, d);

    bt->x_mid = bt->x_in;
    for (size_t i = 0; i < n * d; ++i) bt->x_mid.a[i] += y.a[i];

    bt->f = layer_norm(bt->x_mid, bp.ln2_gamma, bp.ln2_beta, &bt->ln2);
    bt->h_pre = linear(bt->f, bp.w1, bp.b1, size_t(cfg.ffn_hidden));
    bt->h_act = bt->h_pre;
    for (double& v : bt->h_act.a) v = gelu(v);
    Mat y2 = linear(bt->h_act, bp.w2, bp.b2, d);

    x = bt->x_mid;
    for (size_t i = 0; i < n * d; ++i) x.a[i] += y2.a[i];
  }

  std::vector<double> feature(d, 0.0);
  for (size_t t = 0; t < n; ++t) {
    const double* xr = x.row(t);
    for (size_t j = 0; j < d; ++j) feature[j] += xr[j];
  }
  for (size_t j = 0; j < d; ++j) feature[j] /= double(n);
  if (tape) tape->feature = feature;
  return feature;
}

PatchOutput patch_forward(const Frame& patch, const ModelParams& params,
                          PatchTape* tape) {
  const FreqMaps maps = haar_forward(patch);
  const Mat z = embed_fuse_impl(maps, params, tape);
  const std::vector<double> feature = encode_impl(z, params, tape);
  return heads(feature, params);
}

void patch_backward(const PatchTape& tape, const ModelParams& params,
                    double d_score, double d_logit, ParamSet& grads) {
  const ModelConfig& cfg = params.config;
  const size_t d = size_t(cfg.embed_dim);
  const size_t n = tape.z.rows;

  // Heads.
  std::vector<double> dfeat(d, 0.0);
  for (size_t j = 0; j < d; ++j) {
    grads.score_w[j] += d_score * tape.feature[j];
    grads.weight_w[j] += d_logit * tape.feature[j];
    dfeat[j] = d_score * params.p.score_w[j] + d_logit * params.p.weight_w[j];
  }
  grads.score_b[0] += d_score;
  grads.weight_b[0] += d_logit;

  // Mean pool.
  Mat dx(n, d);
  for (size_t t = 0; t < n; ++t) {
    double* dxr = dx.row(t);
    for (size_t j = 0; j < d; ++j) dxr[j] = dfeat[j] / double(n);
  }

  for (int b = cfg.depth - 1; b >= 0; --b) {
    const BlockTape& bt = tape.blocks[size_t(b)];
    const BlockParams& bp = params.p.blocks[size_t(b)];
    BlockParams& gb = grads.blocks[size_t(b)];

    // FFN branch: x_out = x_mid + W2 gelu(W1 f + b1) + b2.
    Mat dh_act = linear_backward(bt.h_act, dx, bp.w2, gb.w2, gb.b2);
    for (size_t i = 0; i < dh_act.a.size(); ++i) {
      dh_act.a[i] *= gelu_grad(bt.h_pre.a[i]);
    }
    Mat df = linear_backward(bt.f, dh_act, bp.w1, gb.w1, gb.b1);
    Mat dx_mid =
        layer_norm_backward(bt.ln2, df, bp.ln2_gamma, gb.ln2_gamma, gb.ln2_beta);
    for (size_t i = 0; i < dx_mid.a.size(); ++i) dx_mid.a[i] += dx.a[i];

    // Attention branch: x_mid = x_in + Wo attn(LN1(x_in)) + bo.
    Mat d_attn_out =
        linear_backward(bt.attn_out, dx_mid, bp.wo, gb.wo, gb.bo);
    Mat dq(n, d), dk(n, d), dv(n, d);
    window_attention_backward(bt.q, bt.k, bt.v, bt.windows, bt.attn, d_attn_out,
                              dq, dk, dv);
    Mat da = linear_backward(bt.a, dq, bp.wq, gb.wq, gb.bq);
    Mat da_k = linear_backward(bt.a, dk, bp.wk, gb.wk, gb.bk);
    Mat da_v = linear_backward(bt.a, dv, bp.wv, gb.wv, gb.bv);
    for (size_t i = 0; i < da.a.size(); ++i) da.a[i] += da_k.a[i] + da_v.a[i];
    Mat dx_in =
        layer_norm_backward(bt.ln1, da, bp.ln1_gamma, gb.ln1_gamma, gb.ln1_beta);
    for (size_t i = 0; i < dx_in.a.size(); ++i) dx_in.a[i] += dx_mid.a[i];
    dx = std::move(dx_in);
  }

  // Fusion and the shared embedding. dZ = dx.
  const size_t m = tape.fused.cols;
  double alpha_sum = 0.0;
  for (double a : params.p.alpha) alpha_sum += a;

  std::vector<double> col_sum(d, 0.0);
  for (size_t t = 0; t < n; ++t) {
    const double* dzr = dx.row(t);
    for (size_t j = 0; j < d; ++j) col_sum[j] += dzr[j];
  }
  for (size_t j = 0; j < d; ++j) grads.le_b[j] += alpha_sum * col_sum[j];

  double bias_dot = 0.0;
  for (size_t j = 0; j < d; ++j) bias_dot += col_sum[j] * params.p.le_b[j];

  Mat dfused(n, m);  // dZ * W
  for (size_t t = 0; t < n; ++t) {
    const double* dzr = dx.row(t);
    const double* sr = tape.fused.row(t);
    double* dfr = dfused.row(t);
    for (size_t o = 0; o < d; ++o) {
      const double g = dzr[o];
      const double* wr = params.p.le_w.data() + o * m;
      double* gw = grads.le_w.data() + o * m;
      for (size_t i = 0; i < m; ++i) {
        gw[i] += g * sr[i];
        dfr[i] += g * wr[i];
      }
    }
  }
  for (size_t j = 0; j < 4; ++j) {
    double acc = 0.0;
    const Mat& tok = tape.comp_tokens[j];
    for (size_t i = 0; i < n * m; ++i) acc += tok.a[i] * dfused.a[i];
    grads.alpha[j] += acc + bias_dot;
  }
}

}  // namespace detail

Mat embed_fuse(const FreqMaps& maps, const ModelParams& params) {
  return detail::embed_fuse_impl(maps, params, nullptr);
}

std::vector<double> encode(const Mat& tokens, const ModelParams& params) {
  return detail::encode_impl(tokens, params, nullptr);
}

PatchOutput heads(const std::vector<double>& feature, const ModelParams& params) {
  const size_t d = size_t(params.config.embed_dim);
  if (feature.size() != d) {
    throw std::invalid_argument("heads: feature dimension mismatch");
  }
  PatchOutput out;
  double score = params.p.score_b[0];
  double logit = params.p.weight_b[0];
  for (size_t j = 0; j < d; ++j) {
    score += params.p.score_w[j] * feature[j];
    logit += params.p.weight_w[j] * feature[j];
  }
  out.score = score;
  out.weight_logit = logit;
  return out;
}

std::vector<PatchOutput> forward_frame(const PatchSet& set,
                                       const ModelParams& params, int workers) {
  if (set.patches.empty()) {
    throw std::invalid_argument("forward_frame: empty patch set");
  }
  std::vector<PatchOutput> outputs(set.patches.size());
  detail::parallel_for(set.patches.size(), workers, [&](size_t i) {
    PatchOutput o = detail::patch_forward(set.patches[i], params, nullptr);
    o.index = i;
    o.frame_id = set.frame_id;
    outputs[i] = o;
  });
  return outputs;
}

namespace {

constexpr char kMagic[4] = {'V', 'Q', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4] = {0, 0, 0, 0};
  in.read(reinterpret_cast<char*>(b), 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
  return v;
}

uint64_t get_u64(std::istream& in) {
  unsigned char b[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  in.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot open checkpoint for writing: " + path);
  }
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  const ModelConfig& c = params.config;
  put_u32(out, uint32_t(c.patch_size));
  put_u32(out, uint32_t(c.token_side));
  put_u32(out, uint32_t(c.embed_dim));
  put_u32(out, uint32_t(c.depth));
  put_u32(out, uint32_t(c.window));
  put_u32(out, uint32_t(c.ffn_hidden));
  size_t count = 0;
  for_each_array(params.p, [&](const std::vector<double>& a) { count += a.size(); });
  put_u64(out, uint64_t(count));
  for_each_array(params.p, [&](const std::vector<double>& a) {
    for (double v : a) {
      uint64_t bits;
      std::memcpy(&bits, &v, 8);
      put_u64(out, bits);
    }
  });
  if (!out) {
    throw DataError("failed writing checkpoint: " + path);
  }
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open checkpoint: " + path);
  }
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }
  if (get_u32(in) != kVersion) {
    throw DataError("unsupported checkpoint version in " + path);
  }
  ModelConfig c;
  c.patch_size = int(get_u32(in));
  c.token_side = int(get_u32(in));
  c.embed_dim = int(get_u32(in));
  c.depth = int(get_u32(in));
  c.window = int(get_u32(in));
  c.ffn_hidden = int(get_u32(in));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError("invalid checkpoint config in " + path + ": " + e.what());
  }
  const uint64_t count = get_u64(in);
  if (!in || count != param_count(c)) {
    throw DataError("checkpoint parameter count mismatch in " + path);
  }
  ModelParams mp;
  mp.config = c;
  mp.p = zero_params(c);
  for_each_array(mp.p, [&](std::vector<double>& a) {
    for (double& v : a) {
      const uint64_t bits = get_u64(in);
      std::memcpy(&v, &bits, 8);
    }
  });
  if (!in) {
    throw DataError("truncated checkpoint: " + path);
  }
  return mp;
}

}  // namespace vqa
