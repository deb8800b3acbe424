#pragma once

#include <cstdint>

namespace bahadur_lab {

/// SplitMix64 finalizer: a bijective 64-bit avalanche hash.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. A stream is a (key, counter) value: draws are
/// mix64 of the key advanced by a Weyl increment, and child streams are keyed
/// by hashing the parent key with an identifier. Children never share state
/// with their parent, so a replicate's draws depend only on how its stream was
/// derived and never on scheduling.
class RandomStream {
 public:
  explicit constexpr RandomStream(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  /// Independent child stream for `id`; does not advance this stream.
  [[nodiscard]] constexpr RandomStream split(std::uint64_t id) const noexcept {
    RandomStream child(0);
    child.key_ = mix64(key_ ^ mix64(id + 0x632BE59BD9B4E019ULL));
    return child;
  }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on the open interval (0,1) with 53-bit resolution.
  constexpr double next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

  friend constexpr bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bahadur_lab
