#include "zqsync/rng.hpp"

namespace zqsync {

std::uint32_t SplitMix64::uniform_int(std::uint32_t bound) noexcept {
  if (bound <= 1) return 0;
  // Accept only x below the largest multiple of bound representable.
  const std::uint64_t rem = (UINT64_MAX % bound + 1) % bound;
  const std::uint64_t limit = UINT64_MAX - rem;
  for (;;) {
    const std::uint64_t x = next();
    if (x <= limit) return static_cast<std::uint32_t>(x % bound);
  }
}

int SplitMix64::categorical(std::span<const double> weights) noexcept {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = uniform() * total;
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += weights[i];
    if (target < acc) return static_cast<int>(i);
  }
  return last_positive;
}

std::uint64_t hash_name(std::string_view name) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) noexcept {
  std::uint64_t z = SplitMix64::mix(master + SplitMix64::kGamma);
  z = SplitMix64::mix(z ^ SplitMix64::mix(stream + 2 * SplitMix64::kGamma));
  return SplitMix64::mix(z + (index + 1) * SplitMix64::kGamma);
}

}  // namespace zqsync
