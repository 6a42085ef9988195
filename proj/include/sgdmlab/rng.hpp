#pragma once

#include <cstdint>
#include <limits>

namespace sgdmlab {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Combines a parent key with a child index into an independent child key.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t child) noexcept {
  return mix64(parent ^ mix64(child ^ 0x6a09e667f3bcc909ULL));
}

// Counter-based random stream. Every stream is addressed by a key, so any
// (trajectory, step, branch) draw can be reproduced without replaying the
// draws that came before it. Satisfies UniformRandomBitGenerator.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  explicit CounterStream(std::uint64_t key) noexcept : key_(mix64(key)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ ^ counter_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream used for the noise draw of step `step` of the trajectory keyed `seed`.
inline CounterStream step_stream(std::uint64_t seed, std::uint64_t step) noexcept {
  return CounterStream(derive_key(seed, step));
}

// Seed of trajectory `index` in an ensemble rooted at `base_seed`.
constexpr std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  return derive_key(derive_key(base_seed, 0x7472616aULL), index);
}

// Seed of Monte Carlo branch `branch` grown from a prefix keyed `prefix_seed`.
constexpr std::uint64_t branch_seed(std::uint64_t prefix_seed, std::uint64_t branch) noexcept {
  return derive_key(derive_key(prefix_seed, 0x6272616eULL), branch);
}

}  // namespace sgdmlab
