#pragma once

#include <cmath>
#include <cstdint>

namespace mpe {

// ---------------------------------------------------------------------------
// Keyed counter RNG. Every noise source in the project is a substream derived
// from (master seed, unit, stage, purpose), so two simulations that share a
// seed consume identical noise values stream-by-stream regardless of what the
// other streams are used for. This is what makes the +eps/-eps common random
// numbers contract structural instead of replay-based.
// ---------------------------------------------------------------------------

constexpr std::uint64_t kGolden64 = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += kGolden64;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ b);
}

class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, std::uint64_t unit, std::uint64_t stage,
              std::uint64_t purpose)
      : state_(mix64(mix64(mix64(mix64(seed) ^ unit) ^ stage) ^ purpose)) {}

  std::uint64_t next_u64() {
    state_ += kGolden64;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform on the open interval (0,1); safe as a log/Bernoulli input.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes exactly two uniforms per draw so
  // stream positions stay aligned across runs.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double pm1() { return uniform01() < 0.5 ? -1.0 : 1.0; }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace mpe
