#include "vqa/haar.hpp"

#include <stdexcept>

namespace vqa {

FreqMaps haar_forward(const Frame& patch) {
  if (patch.width != patch.height) {
    throw std::invalid_argument("haar_forward: patch must be square");
  }
  const int l = patch.width;
  if (l < 2 || l % 2 != 0) {
    throw std::invalid_argument("haar_forward: side must be even and >= 2");
  }
  const int h = l / 2;
  FreqMaps maps;
  maps.source_size = l;
  const size_t n = size_t(kChannels) * h * h;
  maps.avg.resize(n);
  maps.h1.resize(n);
  maps.h2.resize(n);
  maps.h3.resize(n);

  for (int c = 0; c < kChannels; ++c) {
    for (int r = 0; r < h; ++r) {
      for (int col = 0; col < h; ++col) {
        const double a = patch.at(c, 2 * r, 2 * col);
        const double b = patch.at(c, 2 * r, 2 * col + 1);
        const double cc = patch.at(c, 2 * r + 1, 2 * col);
        const double d = patch.at(c, 2 * r + 1, 2 * col + 1);
        const size_t i = (size_t(c) * h + r) * h + col;
        maps.avg[i] = (a + b + cc + d) / 2.0;
        maps.h1[i] = (a + b - cc - d) / 2.0;
        maps.h2[i] = (a - b + cc - d) / 2.0;
        maps.h3[i] = (a - b - cc + d) / 2.0;
      }
    }
  }
  return maps;
}

Frame haar_inverse(const FreqMaps& maps) {
  const int l = maps.source_size;
  if (l < 2 || l % 2 != 0) {
    throw std::invalid_argument("haar_inverse: invalid source size");
  }
  const int h = l / 2;
  const size_t n = size_t(kChannels) * h * h;
  if (maps.avg.size() != n || maps.h1.size() != n || maps.h2.size() != n ||
      maps.h3.size() != n) {
    throw std::invalid_argument("haar_inverse: component shape mismatch");
  }

  Frame patch = make_frame(l, l);
  for (int c = 0; c < kChannels; ++c) {
    for (int r = 0; r < h; ++r) {
      for (int col = 0; col < h; ++col) {
        const size_t i = (size_t(c) * h + r) * h + col;
        const double A = maps.avg[i];
        const double B = maps.h1[i];
        const double C = maps.h2[i];
        const double D = maps.h3[i];
        patch.at(c, 2 * r, 2 * col) = (A + B + C + D) / 2.0;
        patch.at(c, 2 * r, 2 * col + 1) = (A + B - C - D) / 2.0;
        patch.at(c, 2 * r + 1, 2 * col) = (A - B + C - D) / 2.0;
        patch.at(c, 2 * r + 1, 2 * col + 1) = (A - B - C + D) / 2.0;
      }
    }
  }
  return patch;
}

}  // namespace vqa
