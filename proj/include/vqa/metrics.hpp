#pragma once

#include <vector>

namespace vqa {

struct ScorePairs {
  std::vector<double> predictions;
  std::vector<double> labels;
};

// Average ranks, 1-based; ties get the mean of their rank span.
std::vector<double> average_ranks(const std::vector<double>& values);

// Sample Pearson correlation. Throws NumericError when either side has zero
// variance (undefined), std::invalid_argument when n < 2.
double plcc(const std::vector<double>& x, const std::vector<double>& y);

// Spearman rank-order correlation: Pearson applied to average ranks. Equals
// 1 - 6*sum(d^2)/(n(n^2-1)) when there are no ties.
double srcc(const std::vector<double>& x, const std::vector<double>& y);

double plcc(const ScorePairs& pairs);
double srcc(const ScorePairs& pairs);

}  // namespace vqa
