#pragma once

#include <cstdint>

namespace padiclab {

// Counter-based deterministic generator. Every draw is a pure function of
// (seed, stream, counter), so parallel workers can pull disjoint streams
// without sharing state and replays are exact.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), counter_(0) {}

  std::uint64_t next_u64() { return mix(seed_, stream_, counter_++); }

  // Unbiased draw in [0, n) via 128-bit multiply rejection.
  std::uint64_t next_below(std::uint64_t n) {
    for (;;) {
      std::uint64_t x = next_u64();
      unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
      std::uint64_t lo = static_cast<std::uint64_t>(m);
      if (lo >= n) return static_cast<std::uint64_t>(m >> 64);
      std::uint64_t t = (0 - n) % n;
      if (lo >= t) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t counter) {
    std::uint64_t z = seed;
    z ^= 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = splitmix(z);
    z ^= 0xbf58476d1ce4e5b9ULL * (counter + 1);
    return splitmix(z);
  }

 private:
  static std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
};

}  // namespace padiclab
