// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace nnfs {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64 stream.
///
/// The i-th output (i = 0, 1, ...) of a stream with key k is
/// mix64(k + (i + 1) * 0x9e3779b97f4a7c15), all arithmetic mod 2^64.
/// `split(tag)` derives an independent child key as
/// mix64(k ^ mix64(tag + 0x9e3779b97f4a7c15)). Any implementation following
/// these two formulas reproduces every stream bit for bit.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  constexpr std::uint64_t next() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  constexpr CounterRng split(std::uint64_t tag) const noexcept {
    return CounterRng(mix64(key_ ^ mix64(tag + kGamma)));
  }

  /// Uniform integer in [0, bound) by rejection; `bound` must be > 0.
  constexpr std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next();
      if (x >= threshold) return x % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Standard normal deviate (Box-Muller, one value per two draws).
  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Draws `count` distinct elements of `pool` uniformly without replacement
/// (partial Fisher-Yates on a copy), in draw order.
template <typename T>
std::vector<T> sample_without_replacement(std::span<const T> pool,
                                          std::size_t count,
                                          CounterRng& rng) {
  std::vector<T> work(pool.begin(), pool.end());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_below(work.size() - i);
    std::swap(work[i], work[j]);
  }
  work.resize(count);
  return work;
}

}  // namespace nnfs
