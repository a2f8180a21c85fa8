#pragma once

#include <cstdint>
#include <string>

namespace vqa {

// Blur-graded synthetic corpus: textured clips whose per-video box blur
// radius increases with the video index while the MOS label decreases
// strictly monotonically with it. Used by the demo tool and the end-to-end
// training tests.
struct SynthConfig {
  uint64_t seed = 7;
  int videos = 64;
  int frames_per_video = 20;
  int width = 256;
  int height = 192;
  double max_blur = 7.0;
};

// Writes <dir>/<video>/<frame>.ppm files plus <dir>/manifest.json and returns
// the manifest path. Fully deterministic in config.seed.
std::string write_synthetic_corpus(const std::string& dir,
                                   const SynthConfig& config);

}  // namespace vqa
