#include <cmath>

#include "doctest.h"
#include "vqa/errors.hpp"
#include "vqa/rng.hpp"
#include "vqa/scoring.hpp"

using namespace vqa;

namespace {

std::vector<PatchOutput> outputs_from(const std::vector<double>& scores,
                                      const std::vector<double>& logits) {
  std::vector<PatchOutput> out(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    out[i].score = scores[i];
    out[i].weight_logit = logits[i];
    out[i].index = i;
    out[i].frame_id = "f";
  }
  return out;
}

}  // namespace

TEST_CASE("aggregate_mean averages patch scores") {
  CHECK(aggregate_mean(outputs_from({0.2, 0.8}, {0, 0})).value == 0.5);
  CHECK(aggregate_mean(outputs_from({0.3, 0.3, 0.3}, {0, 0, 0})).value ==
        doctest::Approx(0.3).epsilon(1e-15));
  // summation oracle: (0.1+0.2+0.3+0.8)/4
  double acc = 0.0;
  for (double o : {0.1, 0.2, 0.3, 0.8}) acc += o * 0.25;
  const FrameScore fs = aggregate_mean(outputs_from({0.1, 0.2, 0.3, 0.8}, {0, 0, 0, 0}));
  CHECK(fs.value == acc);
  CHECK(fs.value == doctest::Approx(0.35).epsilon(1e-15));
  CHECK_THROWS_AS(aggregate_mean({}), std::invalid_argument);
}

TEST_CASE("region-aware weights reduce to the mean under equal logits, bit-exactly") {
  Rng rng(31);
  for (int iter = 0; iter < 20; ++iter) {
    const size_t n = 1 + rng.index(9);
    std::vector<double> scores(n);
    for (double& s : scores) s = rng.uniform();
    const auto outs = outputs_from(scores, std::vector<double>(n, 1.7));
    const FrameScore ra = aggregate_region_aware(outs);
    const FrameScore mean = aggregate_mean(outs);
    CHECK(ra.value == mean.value);
    CHECK(ra.weights == mean.weights);
  }
}

TEST_CASE("region-aware weights follow the exp-normalized logits") {
  // oracle: plain exp(w)/sum(exp(w)) without the max shift
  const std::vector<double> logits = {std::log(3.0), 0.0};
  const std::vector<double> scores = {0.2, 0.8};
  double z = 0.0;
  for (double w : logits) z += std::exp(w);
  std::vector<double> expected_y;
  for (double w : logits) expected_y.push_back(std::exp(w) / z);
  double expected_score = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    expected_score += expected_y[i] * scores[i];
  }

  const FrameScore fs = aggregate_region_aware(outputs_from(scores, logits));
  CHECK(fs.weights[0] == doctest::Approx(expected_y[0]).epsilon(1e-12));
  CHECK(fs.weights[1] == doctest::Approx(expected_y[1]).epsilon(1e-12));
  CHECK(fs.weights[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(fs.value == doctest::Approx(expected_score).epsilon(1e-12));
  CHECK(fs.value == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("region-aware singleton and error cases") {
  const FrameScore fs = aggregate_region_aware(outputs_from({0.42}, {3.0}));
  CHECK(fs.weights == std::vector<double>{1.0});
  CHECK(fs.value == 0.42);
  CHECK_THROWS_AS(aggregate_region_aware({}), std::invalid_argument);
  auto bad = outputs_from({0.5}, {std::nan("")});
  CHECK_THROWS_AS(aggregate_region_aware(bad), NumericError);
}

TEST_CASE("region-aware weight properties") {
  Rng rng(32);
  for (int iter = 0; iter < 50; ++iter) {
    const size_t n = 1 + rng.index(12);
    std::vector<double> scores(n), logits(n);
    for (size_t i = 0; i < n; ++i) {
      scores[i] = rng.uniform();
      logits[i] = rng.uniform(-30.0, 30.0);
    }
    const FrameScore fs = aggregate_region_aware(outputs_from(scores, logits));
    double sum = 0.0;
    double lo = scores[0], hi = scores[0];
    for (size_t i = 0; i < n; ++i) {
      CHECK(fs.weights[i] >= 0.0);
      sum += fs.weights[i];
      lo = std::min(lo, scores[i]);
      hi = std::max(hi, scores[i]);
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-9);
    CHECK(fs.value >= lo - 1e-12);  // convex combination
    CHECK(fs.value <= hi + 1e-12);

    // shift invariance of the normalization
    std::vector<double> shifted = logits;
    for (double& w : shifted) w += 7.25;
    const FrameScore fs2 = aggregate_region_aware(outputs_from(scores, shifted));
    for (size_t i = 0; i < n; ++i) {
      CHECK(fs2.weights[i] == doctest::Approx(fs.weights[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("video score is the mean of frame scores") {
  auto frames = [](const std::vector<double>& values) {
    std::vector<FrameScore> fs(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
      fs[i].frame_id = std::to_string(i);
      fs[i].value = values[i];
    }
    return fs;
  };

  CHECK(aggregate_video("v", frames(std::vector<double>(30, 0.5))).value == 0.5);
  CHECK(aggregate_video("v", frames({0.2, 0.4})).value ==
        doctest::Approx(0.3).epsilon(1e-15));

  std::vector<double> nine;
  double acc = 0.0;
  for (int i = 0; i < 9; ++i) {
    nine.push_back(0.1 * i);
    acc += 0.1 * i;
  }
  CHECK(aggregate_video("v", frames(nine)).value ==
        doctest::Approx(acc / 9.0).epsilon(1e-15));  // mean oracle
  CHECK(aggregate_video("v", frames(nine)).value ==
        doctest::Approx(0.4).epsilon(1e-12));

  CHECK_THROWS_AS(aggregate_video("v", {}), std::invalid_argument);

  // permutation invariance (within rounding)
  Rng rng(33);
  std::vector<double> vals(11);
  for (double& v : vals) v = rng.uniform();
  const double q1 = aggregate_video("v", frames(vals)).value;
  std::vector<double> perm = vals;
  rng.shuffle(perm);
  const double q2 = aggregate_video("v", frames(perm)).value;
  CHECK(q1 == doctest::Approx(q2).epsilon(1e-12));
}

TEST_CASE("frame loss is squared error") {
  FrameScore fs;
  fs.value = 0.5;
  CHECK(frame_loss(fs, 0.5) == 0.0);
  fs.value = 0.8;
  CHECK(frame_loss(fs, 0.5) == doctest::Approx(0.09).epsilon(1e-15));
  fs.value = 0.35;
  CHECK(frame_loss(fs, 0.6) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK_THROWS_AS(frame_loss(fs, 1.5), std::invalid_argument);
}
