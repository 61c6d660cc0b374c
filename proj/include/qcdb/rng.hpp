#pragma once

#include <array>
#include <cstdint>

namespace qcdb {

/// xoshiro256** (Blackman & Vigna), state expanded from a 64-bit seed with
/// splitmix64. Output is identical on every platform for a given seed;
/// shot sampling depends on this.
class Xoshiro256 {
public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform();

private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

} // namespace qcdb
