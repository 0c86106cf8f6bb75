#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace agflow {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace detail {

// Philox 4x32-10 round function. Counter-based: the output block is a pure
// function of (counter, key), so any draw can be regenerated without replaying
// the stream.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace detail

/// Stateless substream of the master seed: every value drawn is a pure
/// function of (master_seed, tag, sample_index, draw position). Streams with
/// distinct (tag, sample_index) use disjoint Philox counter blocks, so worker
/// scheduling can never change what a sample sees.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::string_view tag, std::uint64_t sample_index) {
    const std::uint64_t k = splitmix64(master_seed ^ splitmix64(fnv1a64(tag)));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    ctr_ = {0u, 0u, static_cast<std::uint32_t>(sample_index),
            static_cast<std::uint32_t>(sample_index >> 32)};
  }

  std::uint64_t next_u64() {
    if (have_word_) {
      have_word_ = false;
      return spare_word_;
    }
    const auto out = detail::philox4x32_10(ctr_, key_);
    if (++ctr_[0] == 0u) ++ctr_[1];  // draw counter; sample id lives in ctr_[2..3]
    spare_word_ = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    have_word_ = true;
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  }

  /// Uniform on (0, 1]; 53-bit resolution.
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller, fixed project-wide so regeneration is
  /// bit-identical everywhere.
  double next_gaussian() {
    if (have_gauss_) {
      have_gauss_ = false;
      return spare_gauss_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_gauss_ = r * std::sin(theta);
    have_gauss_ = true;
    return r * std::cos(theta);
  }

 private:
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> ctr_{};
  std::uint64_t spare_word_ = 0;
  double spare_gauss_ = 0.0;
  bool have_word_ = false;
  bool have_gauss_ = false;
};

}  // namespace agflow
