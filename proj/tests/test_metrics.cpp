#include <cmath>

#include "doctest.h"
#include "support/helpers.hpp"
#include "vqa/errors.hpp"
#include "vqa/metrics.hpp"
#include "vqa/rng.hpp"

using namespace vqa;

TEST_CASE("plcc on affine and anti-affine data") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  CHECK(plcc(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  y.clear();
  for (double v : x) y.push_back(-v);
  CHECK(plcc(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("plcc worked example matches the covariance oracle") {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {1, 3, 2, 4};
  CHECK(plcc(x, y) == doctest::Approx(testutil::pearson_oracle(x, y)).epsilon(1e-12));
  CHECK(plcc(x, y) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("srcc is invariant to monotone transforms") {
  Rng rng(41);
  std::vector<double> x(20);
  for (double& v : x) v = rng.uniform();
  std::vector<double> y;
  for (double v : x) y.push_back(std::exp(3.0 * v) + 5.0);  // strictly increasing
  CHECK(srcc(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(srcc(y, x) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("srcc worked examples") {
  // no ties: 1 - 6*sum(d^2)/(n(n^2-1)) computed here
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {1, 3, 2, 4};
  const auto rx = testutil::ranks_oracle(x);
  const auto ry = testutil::ranks_oracle(y);
  double d2 = 0.0;
  for (size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double expected = 1.0 - 6.0 * d2 / (4.0 * (16.0 - 1.0));
  CHECK(expected == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(srcc(x, y) == doctest::Approx(expected).epsilon(1e-12));

  // ties: ranks (1.5, 1.5, 3) vs (1, 2, 3), brute-force rank oracle
  const std::vector<double> xt = {1, 1, 2};
  const std::vector<double> yt = {1, 2, 3};
  const double tie_expected = testutil::pearson_oracle(testutil::ranks_oracle(xt),
                                                       testutil::ranks_oracle(yt));
  CHECK(srcc(xt, yt) == doctest::Approx(tie_expected).epsilon(1e-12));
  CHECK(srcc(xt, yt) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("metrics agree with oracles on random data") {
  Rng rng(42);
  for (int iter = 0; iter < 300; ++iter) {
    const size_t n = 2 + rng.index(40);
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      // quantized draws inject ties
      x[i] = double(rng.index(12)) / 4.0;
      y[i] = rng.uniform();
    }
    bool varied = false;
    for (size_t i = 1; i < n; ++i) varied = varied || x[i] != x[0];
    if (!varied) continue;
    CHECK(std::fabs(plcc(x, y) - testutil::pearson_oracle(x, y)) <= 1e-12);
    CHECK(std::fabs(srcc(x, y) -
                    testutil::pearson_oracle(testutil::ranks_oracle(x),
                                             testutil::ranks_oracle(y))) <= 1e-12);
  }
}

TEST_CASE("metric properties: symmetry, bounds, affine invariance, rank identity") {
  Rng rng(43);
  for (int iter = 0; iter < 50; ++iter) {
    const size_t n = 3 + rng.index(30);
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform();
      y[i] = rng.uniform();
    }
    const double p = plcc(x, y);
    const double s = srcc(x, y);
    CHECK(p == doctest::Approx(plcc(y, x)).epsilon(1e-12));
    CHECK(s == doctest::Approx(srcc(y, x)).epsilon(1e-12));
    CHECK(p >= -1.0 - 1e-12);
    CHECK(p <= 1.0 + 1e-12);
    CHECK(s >= -1.0 - 1e-12);
    CHECK(s <= 1.0 + 1e-12);

    std::vector<double> ax;
    for (double v : x) ax.push_back(3.5 * v + 2.0);
    CHECK(plcc(ax, y) == doctest::Approx(p).epsilon(1e-10));
    CHECK(srcc(ax, y) == doctest::Approx(s).epsilon(1e-12));

    // srcc == plcc on rank vectors, exactly the same computation
    CHECK(srcc(x, y) == plcc(average_ranks(x), average_ranks(y)));
  }
}

TEST_CASE("degenerate metric inputs are reported") {
  const std::vector<double> flat = {1, 1, 1};
  const std::vector<double> y = {1, 2, 3};
  CHECK_THROWS_AS(plcc(flat, y), NumericError);
  CHECK_THROWS_AS(srcc(flat, y), NumericError);
  CHECK_THROWS_AS(plcc({1.0}, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(plcc({1, 2}, {1, 2, 3}), std::invalid_argument);

  ScorePairs pairs;
  pairs.predictions = {1, 2, 3};
  pairs.labels = {0.1, 0.2, 0.3};
  CHECK(srcc(pairs) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(plcc(pairs) == doctest::Approx(1.0).epsilon(1e-12));
}
