#pragma once

#include <cmath>
#include <cstdint>

namespace fuzzypov {

// 64-bit finalizer (Murmur3 variant). Used to derive independent seed
// streams from (master seed, stream tag, index) so replicates are
// schedule-invariant.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index) {
  return mix64(derive_seed(seed, stream) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

// Stream tags keep unrelated consumers of the same master seed apart.
namespace seed_stream {
inline constexpr std::uint64_t kPopulation = 1;
inline constexpr std::uint64_t kSampleDraw = 2;
inline constexpr std::uint64_t kBootstrap = 3;
inline constexpr std::uint64_t kZbmFit = 4;
inline constexpr std::uint64_t kSpecResolve = 5;
inline constexpr std::uint64_t kReplicateMse = 6;
inline constexpr std::uint64_t kZbmSampleRefit = 7;
}  // namespace seed_stream

// SplitMix64 generator. Self-contained so streams are reproducible across
// platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Lemire's multiply-then-reject, unbiased.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double next_normal() {
    const double u1 = next_double_open();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace fuzzypov
