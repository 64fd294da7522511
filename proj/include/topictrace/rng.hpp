#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace topictrace {

// Seed of sub-stream `stream` under `seed`: the SplitMix64 output function
// applied to seed + (stream + 1) * 0x9E3779B97F4A7C15. Training uses one
// sub-stream per document; ensembles use one per sample index.
constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// The standard pins std::mt19937_64's output sequence but not the standard
// distributions, so the conversions to doubles and indices live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}; n > 0.
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  // Index drawn with probability proportional to weights[i]; weights are
  // non-negative with a positive sum.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      if (u < acc) return i;
      last_positive = i;
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace topictrace
