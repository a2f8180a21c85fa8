#include "vqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vqa/errors.hpp"

namespace vqa {

std::vector<double> average_ranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    // Positions i..j (0-based) share the mean of ranks i+1..j+1.
    const double rank = (double(i + 1) + double(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) {
      ranks[order[k]] = rank;
    }
    i = j + 1;
  }
  return ranks;
}

double plcc(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("plcc: length mismatch");
  }
  const size_t n = x.size();
  if (n < 2) {
    throw std::invalid_argument("plcc: need at least 2 points");
  }
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericError("plcc: zero variance, correlation undefined");
  }
  return sxy / std::sqrt(sxx * syy);
}

double srcc(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("srcc: length mismatch");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("srcc: need at least 2 points");
  }
  try {
    return plcc(average_ranks(x), average_ranks(y));
  } catch (const NumericError&) {
    throw NumericError("srcc: zero rank variance, correlation undefined");
  }
}

double plcc(const ScorePairs& pairs) { return plcc(pairs.predictions, pairs.labels); }

double srcc(const ScorePairs& pairs) { return srcc(pairs.predictions, pairs.labels); }

}  // namespace vqa
