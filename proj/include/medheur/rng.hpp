#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace medheur {

// SplitMix64 step (Vigna). Used for seed expansion and stream derivation,
// never as the sampling engine itself.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (seed, a, b). Replicated
// experiments seed each replicate with derive_stream(seed, block, replicate)
// so that parallel workers never share a stream and results do not depend
// on the worker count.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b = 0) {
  std::uint64_t s = seed;
  std::uint64_t z = splitmix64(s);
  s = z ^ (a * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL);
  z = splitmix64(s);
  s = z ^ (b * 0xCA5A826395121157ULL + 0x9E3779B97F4A7C15ULL);
  return splitmix64(s);
}

// Deterministic scalar RNG: mt19937_64 with an explicit Box-Muller
// transform. std::normal_distribution is implementation-defined, so the
// Gaussian path is spelled out here to keep streams reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace medheur
