#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sfgnn {

/// Counter-based random stream.
///
/// Every draw is `mix(key + counter * kGolden)` where `key` is derived from
/// `(seed, stream)` and `counter` increments per 64-bit draw. Two streams with
/// the same seed but different stream ids never share a key, so parallel
/// callers that each own a stream id draw disjoint sequences without any
/// coordination. The mixing function is the SplitMix64 finalizer, so the
/// output is identical on every platform.
///
/// Stream ids used by the library are listed in `streams` below; callers that
/// need more streams derive them with `Rng::derive`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() noexcept;

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Independent child stream keyed on this stream's key and `id`.
  Rng derive(std::uint64_t id) const noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  Rng(std::uint64_t key, std::uint64_t counter, int) noexcept : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Deterministic seed combination, used to give each tensor/sensor/epoch its
/// own seed from one user-facing seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

namespace streams {
inline constexpr std::uint64_t kSignalNoise = 1;
inline constexpr std::uint64_t kSignalImpulses = 2;
inline constexpr std::uint64_t kSplit = 3;
inline constexpr std::uint64_t kGlorot = 4;
inline constexpr std::uint64_t kDropout = 5;
inline constexpr std::uint64_t kShuffle = 6;
inline constexpr std::uint64_t kSampling = 7;
}  // namespace streams

/// Identity permutation of size n shuffled by `rng`.
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace sfgnn
