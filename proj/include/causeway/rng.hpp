#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace causeway {

/// FNV-1a 64-bit hash; used for content digests and RNG stream derivation.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Deterministic RNG with identical streams on every platform (splitmix64
/// core; no std::uniform_* — their draw sequences are implementation
/// defined). Streams for independent tasks are derived with Rng::derive.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); rejection sampling, unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t lim = ~std::uint64_t{0} - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= lim);
    return x % n;
  }

  /// Standard normal (Box-Muller; consumes two draws, no cached state).
  double next_normal() {
    double u1 = next_unit();
    double u2 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Child stream keyed by (parent seed, tag): order-independent derivation.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag ^ 0x6a09e667f3bcc909ull));
  }
  static std::uint64_t derive(std::uint64_t seed, std::string_view tag) {
    return derive(seed, fnv1a64(tag));
  }

 private:
  std::uint64_t state_;
};

/// One stateless uniform draw keyed by (seed, a, b); used for per-tweet
/// per-simulation stance draws so evaluation order cannot matter.
inline double keyed_unit(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = Rng::derive(Rng::derive(seed, a), b);
  return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
}

}  // namespace causeway
