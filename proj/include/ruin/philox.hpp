#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ruin {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// One independent stream: key = seed, counter = (draw block, stream id).
/// 2^64 streams of 2^64 blocks each. Satisfies UniformRandomBitGenerator.
class Substream {
 public:
  using result_type = std::uint32_t;

  Substream(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  double normal() noexcept;
  double exponential() noexcept;

  std::uint64_t blocks_used() const noexcept { return block_; }

 private:
  void refill() noexcept;

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxCounter buf_{};
  int pos_ = 4;
};

}  // namespace ruin
