#pragma once

// Counter-based random streams (Philox4x32-10).
//
// Every stochastic stage draws from a stream keyed by (seed, stream id), so
// results do not depend on how work is scheduled across threads. Stream ids
// carry a domain tag in the top byte to keep the stages independent.

#include <array>
#include <cstdint>
#include <limits>

namespace urbangraph {

enum class StreamDomain : std::uint8_t {
  Population = 1,
  UniformDensity = 2,
  Perturbation = 3,
  Roles = 4,
  Households = 5,
  Friendship = 6,
  Louvain = 7,
  PathSampling = 8,
  RunSplit = 9,
  Test = 200,
};

constexpr std::uint64_t stream_id(StreamDomain domain, std::uint64_t index) noexcept {
  return (static_cast<std::uint64_t>(domain) << 56) ^ (index & 0x00FFFFFFFFFFFFFFull);
}

class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (cursor_ == 2) {
      refill();
    }
    return buffer_[cursor_++];
  }

  void discard(std::uint64_t n) noexcept {
    for (std::uint64_t i = 0; i < n; ++i) {
      (*this)();
    }
  }

 private:
  using Block = std::array<std::uint32_t, 4>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Block round(const Block& ctr, std::uint32_t k0, std::uint32_t k1) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0, static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1, static_cast<std::uint32_t>(p0)};
  }

  void refill() noexcept {
    Block ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
              static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int r = 0; r < 10; ++r) {
      ctr = round(ctr, k0, k1);
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    ++counter_;
    buffer_[0] = (static_cast<std::uint64_t>(ctr[1]) << 32) | ctr[0];
    buffer_[1] = (static_cast<std::uint64_t>(ctr[3]) << 32) | ctr[2];
    cursor_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int cursor_ = 2;
};

/// Uniform double in [0, 1) with 53 random bits.
template <class Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1]; safe to take the logarithm of.
template <class Engine>
double uniform_open_closed(Engine& eng) {
  return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
template <class Engine>
std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    __extension__ using u128 = unsigned __int128;
    const u128 m = static_cast<u128>(eng()) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

/// Derives the base seed of run `index` from an experiment seed.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) noexcept {
  Philox4x32 eng(base, stream_id(StreamDomain::RunSplit, index));
  return eng();
}

}  // namespace urbangraph
