#pragma once

#include <cstdint>
#include <random>

namespace treemix {

/// SplitMix64 finalizer; used only to derive well-separated seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent random stream identified by (seed, index, domain). Paths
/// drawn in parallel each own a stream, so results do not depend on the
/// worker count. Different domains never collide for the same seed.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0)
      : engine_(mix64(mix64(seed ^ mix64(domain)) ^ index)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace treemix
