#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace projqm {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer; the core mixing primitive of the counter-based streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

/// Counter-based random stream.
///
/// Every (seed, stream, index) triple addresses an independent sub-stream,
/// so Monte-Carlo sample `index` is reproducible no matter how the sample
/// range is sharded across workers. Draws inside a sub-stream follow the
/// SplitMix64 sequence.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
      : state_(mix64(mix64(seed + kGoldenGamma * (stream + 1)) ^
                     (kGoldenGamma * (index + 1)))) {}

  explicit CounterRng(std::uint64_t seed) : CounterRng(seed, 0, 0) {}

  std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; draws come in pairs.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = next_double();
    if (u1 <= 0.0) u1 = std::numeric_limits<double>::min();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * kPi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace projqm
