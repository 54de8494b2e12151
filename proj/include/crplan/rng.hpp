#ifndef CRPLAN_RNG_HPP
#define CRPLAN_RNG_HPP

#include <cstdint>
#include <limits>
#include <cmath>

namespace crplan::rng {

// SplitMix64 finalizer: a full-avalanche 64-bit mixer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

/// Derive a substream seed from a parent seed and an index. Used to key
/// replications to (base seed, scenario, replication) and subjects to
/// (dataset seed, subject index), so results do not depend on the order
/// in which units of work are executed.
inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t key) {
  return mix64(seed + kGamma * (key + 1));
}

/// SplitMix64 stream. Counter-based: state advances by a fixed odd
/// increment and every output is the mixed counter, so streams keyed by
/// derive() are reproducible and independent of evaluation order.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  static Stream keyed(std::uint64_t seed, std::uint64_t key) {
    return Stream(derive(seed, key));
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix64(state_);
  }

  /// Uniform draw in [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Exponential draw with the given hazard rate; +infinity when rate == 0.
  double next_exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-next_uniform()) / rate;
  }

 private:
  std::uint64_t state_;
};

}  // namespace crplan::rng

#endif  // CRPLAN_RNG_HPP
