#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace zqsync {

/// SplitMix64: a Weyl counter passed through a 64-bit finalizer. The output
/// for draw i depends only on (seed, i), so streams are portable across
/// platforms and languages.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by rejection, bound >= 1.
  std::uint32_t uniform_int(std::uint32_t bound) noexcept;

  bool bernoulli(double prob) noexcept { return uniform() < prob; }

  /// Draws an index from an (unnormalized, nonnegative) weight vector.
  int categorical(std::span<const double> weights) noexcept;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Stable 64-bit FNV-1a hash, used to turn experiment names into stream ids.
std::uint64_t hash_name(std::string_view name) noexcept;

/// Per-trial seed derived from (master seed, experiment stream, trial index).
/// Independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) noexcept;

}  // namespace zqsync
