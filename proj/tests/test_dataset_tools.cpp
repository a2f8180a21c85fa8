#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "support/helpers.hpp"
#include "vqa/dataset_tools.hpp"
#include "vqa/rng.hpp"

using namespace vqa;

namespace {

// Plain reimplementation of the indicator formulas, structured around 2D
// arrays instead of the library's flat buffers.
struct Naive {
  double sa = 0, ta = 0, noise = 0, brightness = 0, contrast = 0;
};

std::vector<std::vector<double>> naive_luma(const Frame& f) {
  std::vector<std::vector<double>> y(size_t(f.height),
                                     std::vector<double>(size_t(f.width)));
  for (int r = 0; r < f.height; ++r) {
    for (int c = 0; c < f.width; ++c) {
      y[size_t(r)][size_t(c)] =
          0.299 * f.at(0, r, c) + 0.587 * f.at(1, r, c) + 0.114 * f.at(2, r, c);
    }
  }
  return y;
}

double naive_stdev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double m = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size()));
}

double naive_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Naive naive_indicators(const std::vector<Frame>& clip) {
  Naive out;
  std::vector<std::vector<std::vector<double>>> lum;
  for (const Frame& f : clip) lum.push_back(naive_luma(f));
  const int h = clip[0].height, w = clip[0].width;

  for (const auto& y : lum) {
    std::vector<double> mag;
    for (int r = 1; r < h - 1; ++r) {
      for (int c = 1; c < w - 1; ++c) {
        const double gx = (y[r - 1][c + 1] + 2 * y[r][c + 1] + y[r + 1][c + 1]) -
                          (y[r - 1][c - 1] + 2 * y[r][c - 1] + y[r + 1][c - 1]);
        const double gy = (y[r + 1][c - 1] + 2 * y[r + 1][c] + y[r + 1][c + 1]) -
                          (y[r - 1][c - 1] + 2 * y[r - 1][c] + y[r - 1][c + 1]);
        mag.push_back(std::hypot(gx, gy));
      }
    }
    out.sa = std::max(out.sa, naive_stdev(mag));
  }

  for (size_t t = 1; t < lum.size(); ++t) {
    std::vector<double> diff;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        diff.push_back(lum[t][size_t(r)][size_t(c)] - lum[t - 1][size_t(r)][size_t(c)]);
      }
    }
    out.ta = std::max(out.ta, naive_stdev(diff));
  }

  double noise_sum = 0;
  for (const auto& y : lum) {
    std::vector<double> lap;
    for (int r = 1; r < h - 1; ++r) {
      for (int c = 1; c < w - 1; ++c) {
        lap.push_back(y[r - 1][c] + y[r + 1][c] + y[r][c - 1] + y[r][c + 1] -
                      4 * y[r][c]);
      }
    }
    const double med = naive_median(lap);
    std::vector<double> dev;
    for (double v : lap) dev.push_back(std::fabs(v - med));
    noise_sum += naive_median(dev) / 0.6745;
  }
  out.noise = noise_sum / double(lum.size());

  std::vector<double> all;
  for (const auto& y : lum) {
    for (const auto& row : y) all.insert(all.end(), row.begin(), row.end());
  }
  double m = 0;
  for (double v : all) m += v;
  out.brightness = m / double(all.size());
  out.contrast = naive_stdev(all);
  return out;
}

Frame hflip(const Frame& f) {
  Frame out = f;
  for (int c = 0; c < kChannels; ++c) {
    for (int r = 0; r < f.height; ++r) {
      for (int col = 0; col < f.width; ++col) {
        out.at(c, r, col) = f.at(c, r, f.width - 1 - col);
      }
    }
  }
  return out;
}

IndicatorVector clip_with_all_bins(double v) {
  IndicatorVector iv;
  iv.spatial_activity = v;
  iv.temporal_activity = v;
  iv.noise = v;
  iv.brightness = v;
  iv.contrast = v;
  return iv;
}

}  // namespace

TEST_CASE("indicators of degenerate clips") {
  const std::vector<Frame> gray(3, make_frame(8, 8, 0.5));
  const IndicatorVector iv = indicators(gray);
  CHECK(iv.spatial_activity == 0.0);
  CHECK(iv.temporal_activity == 0.0);
  CHECK(iv.noise == 0.0);
  CHECK(iv.brightness == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(iv.contrast == 0.0);

  Rng rng(51);
  const Frame textured = testutil::random_frame(rng, 10, 10);
  const IndicatorVector st = indicators({textured, textured});
  CHECK(st.temporal_activity == 0.0);
  CHECK(st.spatial_activity > 0.0);

  CHECK_THROWS_AS(indicators({textured}), std::invalid_argument);
}

TEST_CASE("indicators match the naive direct-formula oracle") {
  Rng rng(52);
  std::vector<Frame> clip;
  for (int t = 0; t < 4; ++t) clip.push_back(testutil::random_frame(rng, 14, 11));
  const IndicatorVector iv = indicators(clip);
  const Naive naive = naive_indicators(clip);
  CHECK(std::fabs(iv.spatial_activity - naive.sa) <= 1e-9);
  CHECK(std::fabs(iv.temporal_activity - naive.ta) <= 1e-9);
  CHECK(std::fabs(iv.noise - naive.noise) <= 1e-9);
  CHECK(std::fabs(iv.brightness - naive.brightness) <= 1e-9);
  CHECK(std::fabs(iv.contrast - naive.contrast) <= 1e-9);
}

TEST_CASE("indicators are invariant to frame reversal and horizontal flips") {
  Rng rng(53);
  std::vector<Frame> clip;
  for (int t = 0; t < 4; ++t) clip.push_back(testutil::random_frame(rng, 9, 9));
  const IndicatorVector fwd = indicators(clip);

  std::vector<Frame> rev(clip.rbegin(), clip.rend());
  const IndicatorVector bwd = indicators(rev);
  CHECK(fwd.spatial_activity == doctest::Approx(bwd.spatial_activity).epsilon(1e-12));
  CHECK(fwd.temporal_activity == doctest::Approx(bwd.temporal_activity).epsilon(1e-12));
  CHECK(fwd.noise == doctest::Approx(bwd.noise).epsilon(1e-12));
  CHECK(fwd.brightness == doctest::Approx(bwd.brightness).epsilon(1e-12));
  CHECK(fwd.contrast == doctest::Approx(bwd.contrast).epsilon(1e-12));

  std::vector<Frame> flipped;
  for (const Frame& f : clip) flipped.push_back(hflip(f));
  const IndicatorVector flip = indicators(flipped);
  CHECK(fwd.spatial_activity == doctest::Approx(flip.spatial_activity).epsilon(1e-12));
  CHECK(fwd.temporal_activity == doctest::Approx(flip.temporal_activity).epsilon(1e-12));
  CHECK(fwd.noise == doctest::Approx(flip.noise).epsilon(1e-12));
  CHECK(fwd.brightness == doctest::Approx(flip.brightness).epsilon(1e-12));
  CHECK(fwd.contrast == doctest::Approx(flip.contrast).epsilon(1e-12));
}

TEST_CASE("representative_sample selects everything when k is the pool") {
  std::vector<IndicatorVector> pool;
  for (int i = 0; i < 5; ++i) pool.push_back(clip_with_all_bins(double(i) / 4.0));
  const auto sel = representative_sample(pool, pool.size());
  CHECK(sel.size() == pool.size());
  std::vector<size_t> sorted = sel;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("representative_sample k=1 is deterministic") {
  std::vector<IndicatorVector> pool;
  for (int i = 0; i < 7; ++i) pool.push_back(clip_with_all_bins(double(i) / 6.0));
  const auto a = representative_sample(pool, 1);
  const auto b = representative_sample(pool, 1);
  REQUIRE(a.size() == 1);
  CHECK(a == b);
  CHECK_THROWS_AS(representative_sample(pool, 8), std::invalid_argument);
}

TEST_CASE("greedy selection matches exhaustive search on a crafted pool") {
  // clips 0..4 sit in bins 0..4 on every indicator; 5..9 duplicate bin 0
  std::vector<IndicatorVector> pool;
  for (int i = 0; i < 5; ++i) pool.push_back(clip_with_all_bins(double(i) / 4.0));
  for (int i = 0; i < 5; ++i) pool.push_back(clip_with_all_bins(0.0));

  const auto sel = representative_sample(pool, 5);
  const double greedy_obj = representative_objective(pool, sel);

  double best = 1e300;
  for (unsigned mask = 0; mask < (1u << 10); ++mask) {
    if (__builtin_popcount(mask) != 5) continue;
    std::vector<size_t> subset;
    for (size_t i = 0; i < 10; ++i) {
      if (mask & (1u << i)) subset.push_back(i);
    }
    best = std::min(best, representative_objective(pool, subset));
  }
  CHECK(greedy_obj == doctest::Approx(best).epsilon(1e-12));
  CHECK(greedy_obj == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("greedy selections are nested prefixes") {
  Rng rng(54);
  std::vector<IndicatorVector> pool;
  for (int i = 0; i < 12; ++i) {
    IndicatorVector iv;
    iv.spatial_activity = rng.uniform();
    iv.temporal_activity = rng.uniform();
    iv.noise = rng.uniform();
    iv.brightness = rng.uniform();
    iv.contrast = rng.uniform();
    pool.push_back(iv);
  }
  const auto full = representative_sample(pool, 8);
  for (size_t k = 1; k <= 8; ++k) {
    const auto prefix = representative_sample(pool, k);
    REQUIRE(prefix.size() == k);
    for (size_t i = 0; i < k; ++i) CHECK(prefix[i] == full[i]);
  }
}

TEST_CASE("two-item bradley-terry has the closed-form gap") {
  std::vector<PairComparisonRecord> recs = {{"A", "B", 3}, {"B", "A", 1}};
  const BtResult fit = bradley_terry_fit(recs);
  REQUIRE(fit.ids.size() == 2);
  const size_t a = fit.ids[0] == "A" ? 0 : 1;
  const size_t b = 1 - a;
  CHECK(fit.scores[a] - fit.scores[b] ==
        doctest::Approx(std::log(3.0)).epsilon(1e-9));  // MLE p = 3/4

  const auto mos = bradley_terry_mos(recs);
  std::map<std::string, double> by_id;
  for (const auto& r : mos) by_id[r.video_id] = r.mos;
  CHECK(by_id.at("A") == 1.0);
  CHECK(by_id.at("B") == 0.0);
}

TEST_CASE("symmetric round-robin collapses to all 0.5") {
  std::vector<PairComparisonRecord> recs;
  const std::vector<std::string> ids = {"a", "b", "c", "d"};
  for (size_t i = 0; i < ids.size(); ++i) {
    for (size_t j = i + 1; j < ids.size(); ++j) {
      recs.push_back({ids[i], ids[j], 2});
      recs.push_back({ids[j], ids[i], 2});
    }
  }
  for (const auto& r : bradley_terry_mos(recs)) {
    CHECK(r.mos == 0.5);
  }
}

namespace {

double bt_loglik(const std::vector<PairComparisonRecord>& recs,
                 const std::map<std::string, double>& s) {
  double ll = 0.0;
  for (const auto& r : recs) {
    const double d = s.at(r.winner_id) - s.at(r.loser_id);
    ll += double(r.count) * (d - std::log1p(std::exp(d)));
  }
  return ll;
}

}  // namespace

TEST_CASE("four-item fit agrees with a grid-search oracle") {
  Rng rng(55);
  const std::vector<std::string> ids = {"w", "x", "y", "z"};
  std::vector<PairComparisonRecord> recs;
  for (size_t i = 0; i < ids.size(); ++i) {
    for (size_t j = i + 1; j < ids.size(); ++j) {
      recs.push_back({ids[i], ids[j], int64_t(1 + rng.index(5))});
      recs.push_back({ids[j], ids[i], int64_t(1 + rng.index(5))});
    }
  }

  // refine a 3D grid over (s1,s2,s3) with s0 fixed at 0
  std::array<double, 3> center = {0, 0, 0};
  double radius = 4.0;
  for (int round = 0; round < 30; ++round) {
    std::array<double, 3> best = center;
    double best_ll = -1e300;
    const int steps = 10;
    for (int a = -steps; a <= steps; ++a) {
      for (int b = -steps; b <= steps; ++b) {
        for (int c = -steps; c <= steps; ++c) {
          std::map<std::string, double> s = {
              {"w", 0.0},
              {"x", center[0] + radius * a / steps},
              {"y", center[1] + radius * b / steps},
              {"z", center[2] + radius * c / steps}};
          const double ll = bt_loglik(recs, s);
          if (ll > best_ll) {
            best_ll = ll;
            best = {s["x"], s["y"], s["z"]};
          }
        }
      }
    }
    center = best;
    radius *= 0.35;
  }

  const BtResult fit = bradley_terry_fit(recs);
  std::map<std::string, double> fitted;
  for (size_t i = 0; i < fit.ids.size(); ++i) fitted[fit.ids[i]] = fit.scores[i];
  const std::map<std::string, double> oracle = {
      {"w", 0.0}, {"x", center[0]}, {"y", center[1]}, {"z", center[2]}};
  for (const std::string& id : ids) {
    const double got = fitted.at(id) - fitted.at("w");
    const double want = oracle.at(id) - oracle.at("w");
    CHECK(std::fabs(got - want) <= 1e-6);
  }
}

TEST_CASE("balanced extra wins shrink the score gap monotonically") {
  double prev_gap = 1e300;
  for (int64_t extra : {0, 1, 5, 50}) {
    std::vector<PairComparisonRecord> recs = {{"A", "B", 3 + extra},
                                              {"B", "A", 1 + extra}};
    const BtResult fit = bradley_terry_fit(recs);
    const size_t a = fit.ids[0] == "A" ? 0 : 1;
    const double gap = fit.scores[a] - fit.scores[1 - a];
    CHECK(gap > 0.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("bradley-terry output follows relabeled items") {
  std::vector<PairComparisonRecord> recs = {
      {"p", "q", 4}, {"q", "p", 1}, {"q", "r", 3}, {"r", "p", 2}};
  const auto base = bradley_terry_mos(recs);
  std::map<std::string, std::string> rename = {{"p", "P2"}, {"q", "Q2"}, {"r", "R2"}};
  std::vector<PairComparisonRecord> renamed;
  for (auto r : recs) {
    r.winner_id = rename[r.winner_id];
    r.loser_id = rename[r.loser_id];
    renamed.push_back(r);
  }
  const auto moved = bradley_terry_mos(renamed);
  std::map<std::string, double> base_by, moved_by;
  for (const auto& r : base) base_by[r.video_id] = r.mos;
  for (const auto& r : moved) moved_by[r.video_id] = r.mos;
  for (const auto& [old_id, new_id] : rename) {
    CHECK(base_by.at(old_id) == doctest::Approx(moved_by.at(new_id)).epsilon(1e-12));
  }
}

TEST_CASE("disconnected comparison graphs scale per component") {
  std::vector<PairComparisonRecord> recs = {
      {"a", "b", 3}, {"b", "a", 1}, {"c", "d", 3}, {"d", "c", 1}};
  const auto mos = bradley_terry_mos(recs);
  std::map<std::string, double> by_id;
  for (const auto& r : mos) by_id[r.video_id] = r.mos;
  CHECK(by_id.at("a") == 1.0);
  CHECK(by_id.at("b") == 0.0);
  CHECK(by_id.at("c") == 1.0);
  CHECK(by_id.at("d") == 0.0);
}

TEST_CASE("bradley-terry input validation") {
  CHECK_THROWS_AS(bradley_terry_fit({}), std::invalid_argument);
  CHECK_THROWS_AS(bradley_terry_fit({{"a", "a", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(bradley_terry_fit({{"a", "b", 0}}), std::invalid_argument);
}
