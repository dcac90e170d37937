#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace corrmatch {

using Seed = std::uint64_t;

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator. Output i of stream (seed, stream) is a fixed
/// function of (seed, stream, i), so replicate r always sees the same draws
/// no matter which thread evaluates it or in which order.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(Seed seed, std::uint64_t stream = 0)
      : key_(mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  bool bernoulli(double q) { return uniform() < q; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection.
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Number of failures before the next success of a Bernoulli(q) sequence.
  /// Returns max() when q == 0.
  std::uint64_t geometric_skip(double q) {
    if (q >= 1.0) return 0;
    if (q <= 0.0) return max();
    const double g = std::floor(std::log(uniform_open0()) / std::log1p(-q));
    if (!(g < 1.8e19)) return max();
    return static_cast<std::uint64_t>(g);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Seed for replicate `index` of an experiment with master seed `master`.
inline Seed replicate_seed(Seed master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace corrmatch
