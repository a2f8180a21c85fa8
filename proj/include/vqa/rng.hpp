#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace vqa {

// Seeded RNG used for every random draw in the project. Raw engine words are
// mapped to doubles directly (instead of std::uniform_real_distribution, whose
// output is implementation-defined), so a seed pins the whole run.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  // Mixes a stream id into a seed so independent consumers (init, split,
  // per-epoch shuffles, per-video generators) get decorrelated engines.
  static uint64_t derive(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in [0,n); rejection sampling keeps the draw unbiased.
  size_t index(size_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % uint64_t(n);
    uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return size_t(x % uint64_t(n));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace vqa
