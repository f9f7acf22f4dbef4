#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace spls {

// SplitMix64 step, used only to expand a master seed into sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives the seed for (master seed, stream id). Streams with distinct ids are
// independent for practical purposes; the mapping is fixed and documented so
// that draws for one stream do not move when unrelated streams grow.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= (stream + 1) * 0x9e3779b97f4a7c15ull;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x632be59bd9b4e019ull + (a << 6) + (a >> 2));
}

// Seedable random stream. Scalar transforms (uniform, normal, index) are
// implemented here instead of <random> distributions so that sequences depend
// only on the mt19937_64 bit stream, not on standard-library internals.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

  // uniform double in [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; the paired draw is cached
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // unbiased uniform integer in [0, n), n >= 1
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace spls
