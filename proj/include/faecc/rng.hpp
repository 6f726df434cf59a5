#pragma once

// Counter-based random streams for reproducible, thread-count independent
// Monte Carlo. Every draw is a pure function of (seed, counter), so a sample
// keyed by (trial, word, bit, event) is the same whichever worker computes it.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace faecc {

// Philox4x32-10 (Salmon et al., Random123).
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Block generate(Block ctr, Key key) noexcept {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Block round(const Block& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

// Address of one draw. `lane` separates independent purposes that share the
// same (trial, word, bit, event) coordinates (e.g. write-fail vs. flip time).
struct DrawKey {
  std::uint32_t trial = 0;
  std::uint32_t word = 0;
  std::uint32_t bit = 0;  // low 24 bits used
  std::uint32_t event = 0;
  std::uint8_t lane = 0;
};

enum Lane : std::uint8_t {
  kLaneVariation = 1,
  kLaneDefect = 2,
  kLaneStuckValue = 3,
  kLaneWriteFail = 4,
  kLaneFlipTime = 5,
  kLaneReadNoise = 6,
  kLaneData = 7,
  kLaneDevice = 8,
  kLaneHistogram = 9,
  kLaneEvent = 10,
};

class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr std::array<std::uint64_t, 2> bits(const DrawKey& k) const noexcept {
    const Philox4x32::Block ctr{k.trial, k.word, (k.bit & 0x00FFFFFFu) | (std::uint32_t{k.lane} << 24),
                                k.event};
    const auto out = Philox4x32::generate(ctr, key_);
    return {(std::uint64_t{out[0]} << 32) | out[1], (std::uint64_t{out[2]} << 32) | out[3]};
  }

  // Uniform on the open interval (0, 1); `slot` picks one of the two 64-bit
  // outputs of the block.
  double uniform(const DrawKey& k, int slot = 0) const noexcept {
    return to_open_unit(bits(k)[slot & 1]);
  }

  double exponential(const DrawKey& k, double mean) const noexcept {
    return -mean * std::log(uniform(k));
  }

  // Standard normal via Box-Muller on both slots of one block.
  double normal(const DrawKey& k) const noexcept {
    const auto b = bits(k);
    const double u1 = to_open_unit(b[0]);
    const double u2 = to_open_unit(b[1]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  static constexpr double to_open_unit(std::uint64_t x) noexcept {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  Philox4x32::Key key_;
};

}  // namespace faecc
