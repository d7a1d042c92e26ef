#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fuelgame {

// Philox4x32-10, key = seed, counter = (block, stream)
class Philox {
 public:
  using result_type = std::uint64_t;

  Philox(std::uint64_t seed, std::uint64_t stream) : key_{lo(seed), hi(seed)}, stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) {
      buf_ = block({lo(block_), hi(block_), lo(stream_), hi(stream_)}, key_);
      ++block_;
      pos_ = 0;
    }
    const result_type r = (std::uint64_t(buf_[2 * pos_ + 1]) << 32) | buf_[2 * pos_];
    ++pos_;
    return r;
  }

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53, m1 = 0xCD9E8D57;
    constexpr std::uint32_t w0 = 0x9E3779B9, w1 = 0xBB67AE85;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = std::uint64_t(m0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(m1) * ctr[2];
      ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
             std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
      key[0] += w0;
      key[1] += w1;
    }
    return ctr;
  }

 private:
  static std::uint32_t lo(std::uint64_t v) { return std::uint32_t(v); }
  static std::uint32_t hi(std::uint64_t v) { return std::uint32_t(v >> 32); }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 2;
};

}  // namespace fuelgame
