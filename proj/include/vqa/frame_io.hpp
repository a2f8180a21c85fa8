#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace vqa {

inline constexpr int kChannels = 3;

// One decoded frame: planar RGB, channel-major then row-major, values in [0,1].
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // kChannels * height * width

  size_t plane() const { return size_t(width) * size_t(height); }
  double at(int c, int r, int col) const {
    return data[size_t(c) * plane() + size_t(r) * width + col];
  }
  double& at(int c, int r, int col) {
    return data[size_t(c) * plane() + size_t(r) * width + col];
  }
};

Frame make_frame(int width, int height, double fill = 0.0);

// One video: an ordered list of pre-extracted frame files plus an optional
// subjective score in [0,1].
struct VideoManifest {
  std::string video_id;
  std::vector<std::string> frame_paths;
  std::optional<double> mos;

  size_t total_frames() const { return frame_paths.size(); }
};

// Reads a binary PPM (P6, maxval 255). Pixel values map to byte/255 exactly.
// Missing file, malformed header and truncated pixel data are reported as
// distinct DataError messages.
Frame load_frame(const std::string& path);

// Writes the canonical form "P6\n<w> <h>\n255\n" + RGB triplets; loading a
// file produced by save_frame and saving it again is byte-identical.
void save_frame(const Frame& frame, const std::string& path);

// 8-bit PGM (P5) writer for single-channel exports; values are clamped to
// [0,1] and scaled to 0..255.
void save_pgm(const std::vector<double>& gray, int width, int height,
              const std::string& path);

// Parses a manifest: a JSON array of {"video_id", "frames", "mos"} objects.
// "mos" may be null or omitted. Order is preserved.
std::vector<VideoManifest> load_manifest(const std::string& path);

// Inference frame selection: indices {0, t, 2t, ...}, exactly max(1, T/t) of
// them, so a clip shorter than the interval still contributes its first frame.
std::vector<size_t> sample_frame_indices(size_t total_frames, size_t interval);

}  // namespace vqa
