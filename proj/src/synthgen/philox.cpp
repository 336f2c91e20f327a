#include "decomposer/synthgen/philox.hpp"

#include "decomposer/errors.hpp"

namespace decomposer::synth {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

std::uint32_t Philox4x32::next_u32() {
  if (used_ == 4) {
    buffer_ = block({static_cast<std::uint32_t>(block_index_),
                     static_cast<std::uint32_t>(block_index_ >> 32),
                     static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                    key_);
    ++block_index_;
    used_ = 0;
  }
  return buffer_[used_++];
}

std::uint64_t Philox4x32::next_u64() {
  const std::uint64_t hi = next_u32();
  return (hi << 32) | next_u32();
}

double Philox4x32::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double Philox4x32::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Philox4x32::uniform_int(int lo, int hi) {
  if (hi < lo) throw ArgumentError("uniform_int: empty range");
  const std::uint64_t span = std::uint64_t(std::int64_t(hi) - lo) + 1;
  const std::uint64_t limit = (std::uint64_t(1) << 32) - ((std::uint64_t(1) << 32) % span);
  std::uint64_t draw = next_u32();
  while (draw >= limit) draw = next_u32();
  return static_cast<int>(std::int64_t(lo) + std::int64_t(draw % span));
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix_finalize(splitmix_finalize(a + 0x9E3779B97F4A7C15ull) ^ b);
}

}  // namespace decomposer::synth
