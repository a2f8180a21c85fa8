#include "vqa/dataset_tools.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "vqa/errors.hpp"

namespace vqa {

namespace {

constexpr int kBins = 5;
constexpr int kIndicators = 5;

std::vector<double> luma(const Frame& f) {
  const size_t n = f.plane();
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    y[i] = 0.299 * f.data[i] + 0.587 * f.data[n + i] + 0.114 * f.data[2 * n + i];
  }
  return y;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / double(v.size());
}

// Population stdev; an empty set counts as zero spread.
double stdev_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size()));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Sobel gradient magnitude over interior pixels.
std::vector<double> sobel_magnitude(const std::vector<double>& y, int w, int h) {
  std::vector<double> out;
  if (w < 3 || h < 3) return out;
  out.reserve(size_t(w - 2) * size_t(h - 2));
  auto at = [&](int r, int c) { return y[size_t(r) * w + c]; };
  for (int r = 1; r + 1 < h; ++r) {
    for (int c = 1; c + 1 < w; ++c) {
      const double gx = -at(r - 1, c - 1) + at(r - 1, c + 1) - 2 * at(r, c - 1) +
                        2 * at(r, c + 1) - at(r + 1, c - 1) + at(r + 1, c + 1);
      const double gy = -at(r - 1, c - 1) - 2 * at(r - 1, c) - at(r - 1, c + 1) +
                        at(r + 1, c - 1) + 2 * at(r + 1, c) + at(r + 1, c + 1);
      out.push_back(std::sqrt(gx * gx + gy * gy));
    }
  }
  return out;
}

// 3x3 Laplacian response over interior pixels.
std::vector<double> laplacian(const std::vector<double>& y, int w, int h) {
  std::vector<double> out;
  if (w < 3 || h < 3) return out;
  out.reserve(size_t(w - 2) * size_t(h - 2));
  auto at = [&](int r, int c) { return y[size_t(r) * w + c]; };
  for (int r = 1; r + 1 < h; ++r) {
    for (int c = 1; c + 1 < w; ++c) {
      out.push_back(at(r - 1, c) + at(r + 1, c) + at(r, c - 1) + at(r, c + 1) -
                    4 * at(r, c));
    }
  }
  return out;
}

}  // namespace

IndicatorVector indicators(const std::vector<Frame>& clip) {
  if (clip.size() < 2) {
    throw std::invalid_argument(
        "indicators: need at least 2 frames (temporal activity undefined)");
  }
  const int w = clip[0].width;
  const int h = clip[0].height;
  for (const Frame& f : clip) {
    if (f.width != w || f.height != h) {
      throw std::invalid_argument("indicators: frames must share dimensions");
    }
  }

  std::vector<std::vector<double>> lumas;
  lumas.reserve(clip.size());
  for (const Frame& f : clip) {
    lumas.push_back(luma(f));
  }

  IndicatorVector iv;

  for (const auto& y : lumas) {
    iv.spatial_activity =
        std::max(iv.spatial_activity, stdev_of(sobel_magnitude(y, w, h)));
  }

  for (size_t t = 1; t < lumas.size(); ++t) {
    std::vector<double> diff(lumas[t].size());
    for (size_t i = 0; i < diff.size(); ++i) {
      diff[i] = lumas[t][i] - lumas[t - 1][i];
    }
    iv.temporal_activity = std::max(iv.temporal_activity, stdev_of(diff));
  }

  // Robust per-frame noise estimate: MAD of the Laplacian response mapped to
  // a Gaussian sigma, then averaged over frames.
  double noise_sum = 0.0;
  for (const auto& y : lumas) {
    std::vector<double> lap = laplacian(y, w, h);
    const double med = median_of(lap);
    for (double& v : lap) v = std::fabs(v - med);
    noise_sum += median_of(lap) / 0.6745;
  }
  iv.noise = noise_sum / double(lumas.size());

  std::vector<double> all;
  all.reserve(lumas.size() * lumas[0].size());
  for (const auto& y : lumas) {
    all.insert(all.end(), y.begin(), y.end());
  }
  iv.brightness = mean_of(all);
  iv.contrast = stdev_of(all);
  return iv;
}

namespace {

std::array<double, kIndicators> indicator_values(const IndicatorVector& v) {
  return {v.spatial_activity, v.temporal_activity, v.noise, v.brightness,
          v.contrast};
}

// Bin index per indicator after min-max normalization over the pool. A
// constant indicator collapses into bin 0.
std::vector<std::array<int, kIndicators>> bin_pool(
    const std::vector<IndicatorVector>& pool) {
  std::array<double, kIndicators> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& v : pool) {
    const auto vals = indicator_values(v);
    for (int i = 0; i < kIndicators; ++i) {
      lo[i] = std::min(lo[i], vals[i]);
      hi[i] = std::max(hi[i], vals[i]);
    }
  }
  std::vector<std::array<int, kIndicators>> bins(pool.size());
  for (size_t p = 0; p < pool.size(); ++p) {
    const auto vals = indicator_values(pool[p]);
    for (int i = 0; i < kIndicators; ++i) {
      int b = 0;
      if (hi[i] > lo[i]) {
        const double norm = (vals[i] - lo[i]) / (hi[i] - lo[i]);
        b = std::min(kBins - 1, int(norm * kBins));
      }
      bins[p][i] = b;
    }
  }
  return bins;
}

double histogram_objective(const std::vector<std::array<int, kIndicators>>& bins,
                           const std::vector<size_t>& selected) {
  std::array<std::array<double, kBins>, kIndicators> hist{};
  for (size_t idx : selected) {
    for (int i = 0; i < kIndicators; ++i) {
      hist[i][size_t(bins[idx][i])] += 1.0;
    }
  }
  const double total = double(selected.size());
  double obj = 0.0;
  for (int i = 0; i < kIndicators; ++i) {
    for (int b = 0; b < kBins; ++b) {
      const double frac = total > 0.0 ? hist[i][size_t(b)] / total : 0.0;
      const double d = frac - 1.0 / kBins;
      obj += d * d;
    }
  }
  return obj;
}

}  // namespace

double representative_objective(const std::vector<IndicatorVector>& pool,
                                const std::vector<size_t>& selected) {
  for (size_t idx : selected) {
    if (idx >= pool.size()) {
      throw std::invalid_argument("representative_objective: index out of range");
    }
  }
  return histogram_objective(bin_pool(pool), selected);
}

std::vector<size_t> representative_sample(const std::vector<IndicatorVector>& pool,
                                          size_t k) {
  if (k > pool.size()) {
    throw std::invalid_argument("representative_sample: k exceeds pool size");
  }
  const auto bins = bin_pool(pool);
  std::vector<bool> taken(pool.size(), false);
  std::vector<size_t> selected;
  selected.reserve(k);
  while (selected.size() < k) {
    size_t best = pool.size();
    double best_obj = std::numeric_limits<double>::infinity();
    selected.push_back(0);  // slot for the candidate
    for (size_t c = 0; c < pool.size(); ++c) {
      if (taken[c]) continue;
      selected.back() = c;
      const double obj = histogram_objective(bins, selected);
      if (obj < best_obj) {  // strict: ties keep the lowest index
        best_obj = obj;
        best = c;
      }
    }
    selected.back() = best;
    taken[best] = true;
  }
  return selected;
}

namespace {

struct PairCount {
  size_t a = 0, b = 0;      // item indices, a < b
  double wins_a = 0.0;       // a beat b this many times
  double wins_b = 0.0;
};

// Union-find over the comparison graph.
size_t find_root(std::vector<size_t>& parent, size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

// MM fixed point for one connected component, in gamma = exp(s) space:
//   gamma_i <- wins_i / sum_j n_ij / (gamma_i + gamma_j)
// iterated until the log-likelihood gradient is below tol. Geometric-mean
// normalization keeps sum(s) = 0.
std::vector<double> solve_component(const std::vector<size_t>& items,
                                    const std::vector<PairCount>& pairs) {
  const size_t n = items.size();
  if (n == 1) return {0.0};
  std::map<size_t, size_t> local;
  for (size_t i = 0; i < n; ++i) local[items[i]] = i;

  std::vector<double> wins(n, 0.0);
  struct Edge {
    size_t i, j;
    double n_ij;
  };
  std::vector<Edge> edges;
  for (const auto& pc : pairs) {
    auto ia = local.find(pc.a);
    if (ia == local.end()) continue;
    const size_t i = ia->second;
    const size_t j = local.at(pc.b);
    wins[i] += pc.wins_a;
    wins[j] += pc.wins_b;
    edges.push_back({i, j, pc.wins_a + pc.wins_b});
  }

  std::vector<double> gamma(n, 1.0);
  const double tol = 1e-10;
  const int max_iters = 200000;
  for (int iter = 0; iter < max_iters; ++iter) {
    // Gradient of the log-likelihood w.r.t. s_i.
    std::vector<double> grad = wins;
    for (const Edge& e : edges) {
      const double p = gamma[e.i] / (gamma[e.i] + gamma[e.j]);
      grad[e.i] -= e.n_ij * p;
      grad[e.j] -= e.n_ij * (1.0 - p);
    }
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::fabs(g));
    if (gmax < tol) break;

    std::vector<double> denom(n, 0.0);
    for (const Edge& e : edges) {
      const double inv = e.n_ij / (gamma[e.i] + gamma[e.j]);
      denom[e.i] += inv;
      denom[e.j] += inv;
    }
    double log_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (denom[i] > 0.0 && wins[i] > 0.0) {
        gamma[i] = wins[i] / denom[i];
      } else if (denom[i] > 0.0) {
        // No observed win: damp toward zero instead of jumping there so the
        // iteration stays finite.
        gamma[i] *= 0.5;
      }
      gamma[i] = std::max(gamma[i], 1e-300);
      log_sum += std::log(gamma[i]);
    }
    const double shift = std::exp(-log_sum / double(n));
    for (double& g : gamma) g *= shift;
  }

  std::vector<double> s(n);
  double mean_s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    s[i] = std::log(gamma[i]);
    mean_s += s[i];
  }
  mean_s /= double(n);
  for (double& v : s) v -= mean_s;
  return s;
}

}  // namespace

BtResult bradley_terry_fit(const std::vector<PairComparisonRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("bradley_terry_fit: empty record list");
  }
  std::vector<std::string> ids;
  std::map<std::string, size_t> index;
  auto intern = [&](const std::string& id) {
    auto it = index.find(id);
    if (it != index.end()) return it->second;
    index[id] = ids.size();
    ids.push_back(id);
    return ids.size() - 1;
  };

  std::map<std::pair<size_t, size_t>, PairCount> pair_map;
  for (const auto& r : records) {
    if (r.winner_id == r.loser_id) {
      throw std::invalid_argument("bradley_terry_fit: self comparison for " +
                                  r.winner_id);
    }
    if (r.count <= 0) {
      throw std::invalid_argument("bradley_terry_fit: count must be positive");
    }
    const size_t w = intern(r.winner_id);
    const size_t l = intern(r.loser_id);
    const size_t a = std::min(w, l);
    const size_t b = std::max(w, l);
    PairCount& pc = pair_map[{a, b}];
    pc.a = a;
    pc.b = b;
    (w == a ? pc.wins_a : pc.wins_b) += double(r.count);
  }

  const size_t n = ids.size();
  std::vector<PairCount> pairs;
  pairs.reserve(pair_map.size());
  for (auto& [key, pc] : pair_map) pairs.push_back(pc);

  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t(0));
  for (const auto& pc : pairs) {
    parent[find_root(parent, pc.a)] = find_root(parent, pc.b);
  }
  std::map<size_t, std::vector<size_t>> components;
  for (size_t i = 0; i < n; ++i) {
    components[find_root(parent, i)].push_back(i);
  }
  if (components.size() > 1) {
    std::cerr << "warning: comparison graph has " << components.size()
              << " components; scores are scaled per component\n";
  }

  BtResult result;
  result.ids = ids;
  result.scores.assign(n, 0.0);
  for (auto& [root, items] : components) {
    const std::vector<double> s = solve_component(items, pairs);
    for (size_t i = 0; i < items.size(); ++i) {
      result.scores[items[i]] = s[i];
    }
  }
  return result;
}

std::vector<MosRecord> bradley_terry_mos(
    const std::vector<PairComparisonRecord>& records) {
  const BtResult fit = bradley_terry_fit(records);
  const size_t n = fit.ids.size();

  // Group by component again so each one rescales independently.
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < n; ++i) index[fit.ids[i]] = i;
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t(0));
  for (const auto& r : records) {
    parent[find_root(parent, index.at(r.winner_id))] =
        find_root(parent, index.at(r.loser_id));
  }
  std::map<size_t, std::vector<size_t>> components;
  for (size_t i = 0; i < n; ++i) {
    components[find_root(parent, i)].push_back(i);
  }

  std::vector<MosRecord> out(n);
  for (auto& [root, items] : components) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (size_t i : items) {
      lo = std::min(lo, fit.scores[i]);
      hi = std::max(hi, fit.scores[i]);
    }
    const bool degenerate = items.size() == 1 || hi - lo <= 1e-9;
    for (size_t i : items) {
      out[i].video_id = fit.ids[i];
      out[i].mos = degenerate ? 0.5 : (fit.scores[i] - lo) / (hi - lo);
    }
  }
  return out;
}

}  // namespace vqa
