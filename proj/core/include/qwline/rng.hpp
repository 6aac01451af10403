#pragma once

#include <array>
#include <cstdint>

namespace qwline {

//! One round of the SplitMix64 generator; advances `state` and returns the
//! next output. Used here to expand small seeds into full engine state.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! xoshiro256** (Blackman & Vigna): 64-bit output, 2^256-1 period.
//! Satisfies UniformRandomBitGenerator, so it plugs into <random> if needed;
//! the simulation paths below only use raw 64-bit words and uniform01().
class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256StarStar(std::uint64_t seed = 0) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  //! Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  //! Bernoulli(p) draw consuming exactly one 64-bit word.
  bool bernoulli(double p) noexcept { return uniform01() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

//! Independent stream for one trajectory. The mapping depends only on
//! (master_seed, trajectory_index), so any trajectory can be replayed in
//! isolation and ensemble results do not depend on thread scheduling.
inline Xoshiro256StarStar trajectory_rng(std::uint64_t master_seed,
                                         std::uint64_t trajectory_index) noexcept {
  std::uint64_t seed_state = master_seed;
  std::uint64_t index_state = trajectory_index;
  const std::uint64_t lane = splitmix64(seed_state) ^ splitmix64(index_state);
  return Xoshiro256StarStar{lane};
}

}  // namespace qwline
