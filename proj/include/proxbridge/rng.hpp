#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace proxbridge {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for replicate r at sample size n; stable under any
// execution order of the replicate loop.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t n, std::uint64_t r) {
  return splitmix64(splitmix64(splitmix64(seed) ^ n) ^ (r + 0x632be59bd9b4e019ULL));
}

// mt19937_64 with explicit transforms. std::*_distribution output is
// implementation-defined; these transforms are not.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  // index into a cumulative-probability table (inverse CDF)
  std::size_t categorical(const std::vector<double>& cumulative) {
    const double u = uniform();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (u < cumulative[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace proxbridge
