#pragma once

#include <cstdint>

namespace mpfb {

/// Counter-based generator: the i-th draw of stream s under seed k is a pure
/// function of (k, s, i), so results never depend on evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))) {}

  std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix(key_ + 0xbf58476d1ce4e5b9ULL * (counter + 1));
  }

  /// Uniform on [0, 1).
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, double lo, double hi) const noexcept {
    return lo + (hi - lo) * uniform(counter);
  }

  /// Standard normal via Box-Muller on two consecutive counters.
  double normal(std::uint64_t counter) const noexcept;

  /// Sequential convenience: draws advance an internal counter.
  double next_uniform() noexcept { return uniform(cursor_++); }
  double next_uniform(double lo, double hi) noexcept { return uniform(cursor_++, lo, hi); }
  double next_normal() noexcept {
    const double v = normal(cursor_);
    cursor_ += 2;
    return v;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t cursor_ = 0;
};

}  // namespace mpfb
