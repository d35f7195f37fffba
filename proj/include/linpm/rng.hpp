#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace linpm {

// Stateless counter-based generator.  Every draw is a pure function of
// (seed, run, stream, counter), so results are bit-identical regardless of
// evaluation order or threading — runs inside a sweep can execute concurrently
// and still reproduce exactly.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t run, std::uint64_t stream)
      : key_(mix(mix(mix(0x9e3779b97f4a7c15ULL ^ seed) + run) + stream)) {}

  // Uniform double in [0, 1) for the given counter.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box–Muller; consumes two words per draw.
  double gaussian(std::uint64_t counter) const {
    const double u1 = static_cast<double>((word(2 * counter) >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t word(std::uint64_t counter) const { return mix(key_ + counter * 0x9e3779b97f4a7c15ULL); }

 private:
  // splitmix64 finalizer: full avalanche, so consecutive counters decorrelate.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

// Stream identifiers so independent random uses of the same (seed, run) never collide.
enum class RngStream : std::uint64_t {
  kActionSampling = 1,
  kEnvironmentNoise = 2,
  kInstanceSelection = 3,
  kLossSampling = 4,
};

inline CounterRng make_rng(std::uint64_t seed, std::uint64_t run, RngStream stream) {
  return CounterRng(seed, run, static_cast<std::uint64_t>(stream));
}

}  // namespace linpm
