#pragma once

// Philox4x32-10 counter-based generator and the fixed Gaussian sampler built on
// top of it. Every draw is a pure function of (key, draw index), so any slice of
// the stream can be produced without generating what comes before it.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace ropsketch {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11), bit-compatible with Random123.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr int kRounds = 10;

  static constexpr Counter apply(Counter ctr, Key key) noexcept {
    for (int r = 0; r < kRounds; ++r) {
      if (r > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = round(ctr, key);
    }
    return ctr;
  }

  static constexpr Key key_from_seed(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Standard-normal stream indexed by a 64-bit draw number.
///
/// Draws 2j and 2j+1 come from one Philox block with counter (j, 0, 0, 0): the
/// block is read as two 53-bit uniforms and mapped through Box-Muller
/// (cosine branch for the even draw, sine branch for the odd one). Changing this
/// mapping changes every golden value in the test suite.
class NormalStream {
 public:
  explicit constexpr NormalStream(std::uint64_t seed) noexcept : key_(Philox4x32::key_from_seed(seed)) {}

  /// The pair of normals sharing block `block` (draws 2*block and 2*block+1).
  [[nodiscard]] std::array<double, 2> pair(std::uint64_t block) const noexcept {
    const auto w = Philox4x32::apply(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), 0u, 0u}, key_);
    const std::uint64_t bits0 = (std::uint64_t{w[0]} << 32) | w[1];
    const std::uint64_t bits1 = (std::uint64_t{w[2]} << 32) | w[3];
    // u0 in (0, 1] keeps the logarithm finite; u1 in [0, 1).
    const double u0 = static_cast<double>((bits0 >> 11) + 1) * 0x1.0p-53;
    const double u1 = static_cast<double>(bits1 >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u0));
    const double angle = 2.0 * std::numbers::pi * u1;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  [[nodiscard]] double draw(std::uint64_t index) const noexcept { return pair(index / 2)[index % 2]; }

  /// Fills `out` with draws first, first+1, ..., first+out.size()-1.
  void fill(std::uint64_t first, std::span<double> out) const noexcept {
    std::size_t k = 0;
    std::uint64_t index = first;
    if (index % 2 == 1 && k < out.size()) {
      out[k++] = pair(index / 2)[1];
      ++index;
    }
    for (; k + 1 < out.size(); k += 2, index += 2) {
      const auto z = pair(index / 2);
      out[k] = z[0];
      out[k + 1] = z[1];
    }
    if (k < out.size()) out[k] = pair(index / 2)[0];
  }

 private:
  Philox4x32::Key key_;
};

/// SplitMix64 finalizer; used to derive independent sub-seeds (per trial, per role).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Small sequential generator for shuffles and uniform sphere draws. Every
/// consumer uses its own bounded-integer and normal mappings so results do not
/// depend on the standard library's distribution implementations.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= limit) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace ropsketch
