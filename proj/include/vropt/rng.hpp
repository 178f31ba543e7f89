#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace vropt {

/// 64-bit FNV-1a over raw bytes. Used for stream labels, batch ids and
/// config hashes; stable across platforms.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// SplitMix64 output function.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic counter-based generator: SplitMix64 with a per-stream odd
/// increment (the SplittableRandom construction). The same seed yields the
/// same stream on every platform and run. Child streams derived via
/// `child(label)` use an increment hashed from the label, so they advance
/// through a different cycle than the parent and never replay its output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : state_(seed), gamma_(kGoldenGamma), seed_(seed) {}

  std::uint64_t next_u64() {
    state_ += gamma_;
    return mix64(state_);
  }

  /// Uniform double in [0, 1): 53 high bits of one draw.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

  /// Child stream for (seed, label). Depends on the constructor seed only,
  /// not on how much the parent has been consumed.
  Rng child(std::string_view label) const { return child_from(fnv1a64(label)); }

  /// Child stream for (seed, numeric label), e.g. per-epoch streams.
  Rng child(std::uint64_t label) const {
    return child_from(mix64(label + 0x632be59bd9b4e019ull));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

  Rng(std::uint64_t state, std::uint64_t gamma, std::uint64_t seed)
      : state_(state), gamma_(gamma), seed_(seed) {}

  Rng child_from(std::uint64_t h) const {
    std::uint64_t st = mix64(seed_ ^ h);
    std::uint64_t ga = mix64(h + kGoldenGamma) | 1ull;
    return Rng(st, ga, st);
  }

  std::uint64_t state_;
  std::uint64_t gamma_;
  std::uint64_t seed_;
};

/// `count` samples from N(0, std^2), rejection-resampled into [-2 std, 2 std].
inline std::vector<double> trunc_normal_init(std::int64_t count, double std_dev,
                                             Rng& rng) {
  if (count < 1) throw std::invalid_argument("trunc_normal_init: count must be >= 1");
  if (!(std_dev > 0.0))
    throw std::invalid_argument("trunc_normal_init: std must be > 0");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& v : out) {
    double z;
    do {
      z = rng.normal();
    } while (std::fabs(z) > 2.0);
    v = z * std_dev;
  }
  return out;
}

}  // namespace vropt
