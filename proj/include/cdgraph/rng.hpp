#pragma once

#include <cstdint>
#include <random>

namespace cdgraph {

// splitmix64 finalizer, used to derive independent seed streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index + 1));
}

// Deterministic generator. mt19937_64 is fully specified by the standard and
// doubles are produced by explicit bit manipulation, so streams reproduce
// bit-exactly across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return state_(); }

  // uniform in [0,1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // uniform integer in [0,n), rejection sampled to avoid modulo bias
  std::size_t next_below(std::size_t n) {
    const std::uint64_t nn = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % nn;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % nn);
  }

  // uniform integer in [lo,hi] inclusive
  int next_int(int lo, int hi) {
    return lo + static_cast<int>(next_below(static_cast<std::size_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 state_;
};

}  // namespace cdgraph
