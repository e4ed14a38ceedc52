#pragma once

#include <cstdint>

#include "onlinefwer/normal.hpp"

namespace onlinefwer {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

/// Derives an independent stream key from a base seed and a stream index.
inline std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t stream) noexcept {
  return detail::mix64(detail::mix64(seed + 0x9E3779B97F4A7C15ULL) ^ (stream + 0xD1B54A32D192ED03ULL));
}

/// Counter-based pseudo-random generator (splitmix64 output function over an
/// incrementing counter). Streams identified by (seed, stream) never share
/// state, so replications can run on any thread layout with identical draws.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : key_(derive_stream_key(seed, stream)) {}

  std::uint64_t next_u64() noexcept {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(key_ ^ counter_);
  }

  /// Uniform draw on [0, 1).
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform draw on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  /// Standard normal draw by inverse-CDF transform; the uniform argument is
  /// centered away from {0, 1} so the quantile is always finite.
  double gaussian() noexcept {
    const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    return normal_quantile(u);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace onlinefwer
