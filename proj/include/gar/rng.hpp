#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gar {

/// Counter-based 64-bit generator (Philox 2x64, 10 rounds) with explicit
/// stream splitting: independent streams come from distinct (seed, stream)
/// keys, so replicate/bootstrap workers never share state. Normal draws use
/// Box-Muller on the generator's uniforms; the whole chain is pinned to this
/// implementation, independent of the standard library's distributions.
inline constexpr const char* kRngId = "philox2x64-10/box-muller";

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(detail::splitmix64(seed ^ detail::splitmix64(stream))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }

  /// Derives an independent stream from this generator's identity.
  Rng split(std::uint64_t stream) const {
    Rng child(0);
    child.key_ = detail::splitmix64(key_ ^ detail::splitmix64(stream));
    return child;
  }

  result_type operator()() {
    if (have_buffered_) {
      have_buffered_ = false;
      return buffered_;
    }
    std::uint64_t x0 = counter_++;
    std::uint64_t x1 = 0;
    std::uint64_t k = key_;
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 prod =
          static_cast<unsigned __int128>(0xD2B74407B1CE6E93ULL) * x0;
      const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      const std::uint64_t lo = static_cast<std::uint64_t>(prod);
      x0 = hi ^ k ^ x1;
      x1 = lo;
      k += 0x9E3779B97F4A7C15ULL;
    }
    buffered_ = x1;
    have_buffered_ = true;
    return x0;
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  bool bernoulli(double prob) { return uniform() < prob; }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t buffered_ = 0;
  bool have_buffered_ = false;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gar
