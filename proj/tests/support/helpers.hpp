#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vqa/frame_io.hpp"
#include "vqa/rng.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("vqa_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

inline vqa::Frame random_frame(vqa::Rng& rng, int w, int h) {
  vqa::Frame f = vqa::make_frame(w, h);
  for (double& v : f.data) v = rng.uniform();
  return f;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// Raw-moment Pearson formula; deliberately a different computation than the
// library's centered two-pass version.
inline double pearson_oracle(const std::vector<double>& x,
                             const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  return (n * sxy - sx * sy) /
         std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// O(n^2) counting ranks with tie averaging.
inline std::vector<double> ranks_oracle(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    size_t less = 0, equal = 0;
    for (size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    out[i] = double(less + 1) + double(equal - 1) * 0.5;
  }
  return out;
}

// The four kernel dot products of one 2x2 block, built literally from the
// L/H outer products.
inline std::array<double, 4> haar_block_oracle(double a, double b, double c,
                                               double d) {
  const double L[2] = {M_SQRT1_2, M_SQRT1_2};
  const double H[2] = {M_SQRT1_2, -M_SQRT1_2};
  const double block[2][2] = {{a, b}, {c, d}};
  auto apply = [&](const double* u, const double* v) {
    double s = 0.0;
    for (int r = 0; r < 2; ++r) {
      for (int col = 0; col < 2; ++col) {
        s += u[r] * v[col] * block[r][col];  // kernel = u v^T
      }
    }
    return s;
  };
  return {apply(L, L), apply(H, L), apply(L, H), apply(H, H)};
}

// Redirects fd 1 to a file while alive; used to assert printed CLI output.
class StdoutCapture {
 public:
  explicit StdoutCapture(const std::string& path) {
    std::fflush(stdout);
    saved_ = ::dup(1);
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    ::dup2(fd, 1);
    ::close(fd);
  }
  ~StdoutCapture() {
    std::fflush(stdout);
    ::dup2(saved_, 1);
    ::close(saved_);
  }

 private:
  int saved_ = -1;
};

}  // namespace testutil
