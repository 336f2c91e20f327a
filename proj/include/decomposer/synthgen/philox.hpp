#pragma once

#include <array>
#include <cstdint>

namespace decomposer::synth {

// Philox4x32-10 counter-based generator (Random123 family). The block
// function is a keyed bijection on 128-bit counters, so a (seed, stream)
// pair names an independent sequence and any block can be computed
// directly. Known-answer vectors are checked in tests/unit/test_philox.cpp.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer on [lo, hi], unbiased by rejection.
  int uniform_int(int lo, int hi);

 private:
  Key key_{};
  std::uint64_t block_index_ = 0;
  std::uint64_t stream_ = 0;
  Counter buffer_{};
  int used_ = 4;
};

// Deterministic 64-bit combination of two values (SplitMix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace decomposer::synth
