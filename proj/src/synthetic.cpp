#include "vqa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "vqa/errors.hpp"
#include "vqa/frame_io.hpp"
#include "vqa/rng.hpp"

namespace vqa {

namespace {

// Stateless value noise so textures translate rigidly with their rectangle.
double hash_noise(uint64_t a, uint64_t b, uint64_t c) {
  uint64_t z = a * 0x9E3779B97F4A7C15ull ^ b * 0xBF58476D1CE4E5B9ull ^
               c * 0x94D049BB133111EBull;
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return double(z >> 11) * 0x1.0p-53;
}

struct TexturedRect {
  int x = 0, y = 0, w = 0, h = 0;
  double base[3] = {0, 0, 0};
  double amplitude = 0.0;
  double phase = 0.0;
  uint64_t noise_key = 0;
};

void box_blur_axis(std::vector<double>& plane, int w, int h, int radius,
                   bool horizontal) {
  if (radius <= 0) return;
  const int len = horizontal ? w : h;
  const int lines = horizontal ? h : w;
  std::vector<double> prefix(size_t(len) + 1, 0.0);
  std::vector<double> line(size_t(len), 0.0);
  for (int s = 0; s < lines; ++s) {
    for (int i = 0; i < len; ++i) {
      line[size_t(i)] =
          horizontal ? plane[size_t(s) * w + i] : plane[size_t(i) * w + s];
    }
    prefix[0] = 0.0;
    for (int i = 0; i < len; ++i) prefix[size_t(i) + 1] = prefix[size_t(i)] + line[size_t(i)];
    for (int i = 0; i < len; ++i) {
      const int lo = std::max(0, i - radius);
      const int hi = std::min(len - 1, i + radius);
      const double mean =
          (prefix[size_t(hi) + 1] - prefix[size_t(lo)]) / double(hi - lo + 1);
      if (horizontal) {
        plane[size_t(s) * w + i] = mean;
      } else {
        plane[size_t(i) * w + s] = mean;
      }
    }
  }
}

void box_blur(Frame& frame, int radius) {
  if (radius <= 0) return;
  const size_t plane = frame.plane();
  for (int c = 0; c < kChannels; ++c) {
    std::vector<double> p(frame.data.begin() + long(c * plane),
                          frame.data.begin() + long((c + 1) * plane));
    box_blur_axis(p, frame.width, frame.height, radius, true);
    box_blur_axis(p, frame.width, frame.height, radius, false);
    std::copy(p.begin(), p.end(), frame.data.begin() + long(c * plane));
  }
}

// Degradation is regional: radius-r blur inside a per-video band, sharp
// content outside. Fragment-based samplers that miss the band see evidence
// unrelated to the video's grade.
struct DegradedBand {
  bool horizontal = true;
  int start = 0;
  int length = 0;
  int feather = 8;

  double weight(int r, int c) const {
    const int pos = horizontal ? r : c;
    const double lo = double(pos - start);
    const double hi = double(start + length - 1 - pos);
    const double edge = std::min(lo, hi);
    if (edge < 0.0) return 0.0;
    if (edge >= double(feather)) return 1.0;
    return (edge + 1.0) / double(feather + 1);
  }
};

Frame render_frame(const SynthConfig& cfg, int video, int frame_idx,
                   double base_gray, const double tint[3],
                   const std::vector<TexturedRect>& rects,
                   const DegradedBand& band, double blur_radius) {
  Frame f = make_frame(cfg.width, cfg.height);
  const size_t plane = f.plane();
  for (int c = 0; c < kChannels; ++c) {
    const double v = base_gray + tint[c];
    std::fill(f.data.begin() + long(c * plane),
              f.data.begin() + long((c + 1) * plane), v);
  }

  // Rectangles drift slowly so consecutive frames differ.
  for (const TexturedRect& r : rects) {
    const double t = 2.0 * M_PI * double(frame_idx) / double(cfg.frames_per_video);
    const int dx = int(std::lround(3.0 * std::sin(t + r.phase)));
    const int dy = int(std::lround(3.0 * std::cos(t + r.phase)));
    const int x0 = std::max(0, r.x + dx);
    const int y0 = std::max(0, r.y + dy);
    const int x1 = std::min(cfg.width, r.x + dx + r.w);
    const int y1 = std::min(cfg.height, r.y + dy + r.h);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const double noise =
            hash_noise(r.noise_key, uint64_t(x - dx) + (1u << 20),
                       uint64_t(y - dy) + (1u << 20)) -
            0.5;
        for (int c = 0; c < kChannels; ++c) {
          f.at(c, y, x) = r.base[c] + r.amplitude * noise;
        }
      }
    }
  }

  // Fine full-frame grain; blurring removes it, which is the quality signal.
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const double g = 0.02 * (hash_noise(uint64_t(video) * 31 + 7,
                                          uint64_t(frame_idx) * 131 + uint64_t(y),
                                          uint64_t(x)) -
                               0.5);
      for (int c = 0; c < kChannels; ++c) {
        f.at(c, y, x) += g;
      }
    }
  }

  // Fractional radius: blend the two neighbouring integer box blurs.
  const int k = int(std::floor(blur_radius));
  const double frac = blur_radius - double(k);
  Frame low = f;
  box_blur(low, k);
  if (frac > 0.0) {
    Frame high = f;
    box_blur(high, k + 1);
    for (size_t i = 0; i < low.data.size(); ++i) {
      low.data[i] = (1.0 - frac) * low.data[i] + frac * high.data[i];
    }
  }

  // Composite the blurred band over the sharp render with feathered edges.
  Frame out = f;
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < cfg.height; ++y) {
      for (int x = 0; x < cfg.width; ++x) {
        const double m = band.weight(y, x);
        double v = (1.0 - m) * f.at(c, y, x) + m * low.at(c, y, x);
        out.at(c, y, x) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      }
    }
  }
  return out;
}

}  // namespace

std::string write_synthetic_corpus(const std::string& dir,
                                   const SynthConfig& cfg) {
  if (cfg.videos < 1 || cfg.frames_per_video < 2 || cfg.width < 16 ||
      cfg.height < 16) {
    throw std::invalid_argument("write_synthetic_corpus: invalid config");
  }
  std::filesystem::create_directories(dir);

  nlohmann::json manifest = nlohmann::json::array();
  char name[64];
  for (int v = 0; v < cfg.videos; ++v) {
    Rng rng(Rng::derive(cfg.seed, 1000 + uint64_t(v)));
    const double base_gray = rng.uniform(0.35, 0.65);
    double tint[3];
    for (double& t : tint) t = rng.uniform(-0.04, 0.04);
    // Layouts and colors vary per video; texture statistics stay homogeneous
    // so the blur grade is the dominant quality factor.
    std::vector<TexturedRect> rects(14);
    for (size_t r = 0; r < rects.size(); ++r) {
      TexturedRect& rect = rects[r];
      rect.w = int(rng.uniform(0.15, 0.3) * cfg.width);
      rect.h = int(rng.uniform(0.15, 0.3) * cfg.height);
      rect.x = int(rng.index(size_t(std::max(1, cfg.width - rect.w))));
      rect.y = int(rng.index(size_t(std::max(1, cfg.height - rect.h))));
      for (double& b : rect.base) b = rng.uniform(0.25, 0.75);
      rect.amplitude = 0.3;
      rect.phase = rng.uniform(0.0, 2.0 * M_PI);
      rect.noise_key = rng.next_u64();
    }

    DegradedBand band;
    band.horizontal = rng.index(2) == 0;
    const int extent = band.horizontal ? cfg.height : cfg.width;
    band.length = int(0.65 * extent);
    band.start = int(rng.index(size_t(extent - band.length + 1)));

    const double blur =
        cfg.videos > 1 ? cfg.max_blur * double(v) / double(cfg.videos - 1) : 0.0;
    const double mos = 1.0 - 0.85 * (cfg.max_blur > 0.0 ? blur / cfg.max_blur : 0.0);

    std::snprintf(name, sizeof(name), "v%03d", v);
    const std::string video_id = name;
    const std::filesystem::path video_dir = std::filesystem::path(dir) / video_id;
    std::filesystem::create_directories(video_dir);

    nlohmann::json entry;
    entry["video_id"] = video_id;
    entry["mos"] = mos;
    nlohmann::json frames = nlohmann::json::array();
    for (int f = 0; f < cfg.frames_per_video; ++f) {
      const Frame frame =
          render_frame(cfg, v, f, base_gray, tint, rects, band, blur);
      std::snprintf(name, sizeof(name), "f%03d.ppm", f);
      const std::string path = (video_dir / name).string();
      save_frame(frame, path);
      frames.push_back(path);
    }
    entry["frames"] = std::move(frames);
    manifest.push_back(std::move(entry));
  }

  const std::string manifest_path =
      (std::filesystem::path(dir) / "manifest.json").string();
  std::ofstream out(manifest_path);
  if (!out) {
    throw DataError("cannot write manifest: " + manifest_path);
  }
  out << manifest.dump(2) << "\n";
  return manifest_path;
}

}  // namespace vqa
