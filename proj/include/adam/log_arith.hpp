#pragma once

#include <bit>
#include <compare>
#include <cstdint>

namespace adam {

inline constexpr int kOperandBits = 8;
inline constexpr int kFracBits = kOperandBits - 1;  // mantissa field width
inline constexpr int kKeptFracBits = 5;             // mantissa bits kept after truncation
inline constexpr std::uint8_t kFracMask = (1u << kFracBits) - 1;
inline constexpr std::uint8_t kTruncMask =
    static_cast<std::uint8_t>(kFracMask & ~((1u << (kFracBits - kKeptFracBits)) - 1));

/// Unsigned 8-bit multiplier input.
struct Operand {
  std::uint8_t value = 0;
  constexpr auto operator<=>(const Operand&) const = default;
};

/// Unsigned 16-bit multiplier output.
struct Product {
  std::uint16_t value = 0;
  constexpr auto operator<=>(const Product&) const = default;
};

struct LodResult {
  bool is_zero = true;
  std::uint8_t k = 0;
  constexpr bool operator==(const LodResult&) const = default;
};

/// Logarithmic form of an operand: characteristic k plus an MSB-first
/// 7-bit fraction (bit 6 carries weight 1/2).
struct LogRepr {
  bool is_zero = true;
  std::uint8_t k = 0;
  std::uint8_t frac = 0;
  constexpr bool operator==(const LogRepr&) const = default;
};

/// Leading-one detector. k is the index of the most significant set bit.
constexpr LodResult lod(Operand a) {
  if (a.value == 0) return {true, 0};
  return {false, static_cast<std::uint8_t>(std::bit_width(a.value) - 1)};
}

/// Aligns the leading one with bit 7 and drops it. Undefined for a == 0.
constexpr std::uint8_t normalize(Operand a, std::uint8_t k) {
  return static_cast<std::uint8_t>((a.value << (kFracBits - k)) & kFracMask);
}

/// Keeps the kKeptFracBits most significant fraction bits.
constexpr std::uint8_t truncate(std::uint8_t frac7) {
  return static_cast<std::uint8_t>(frac7 & kTruncMask);
}

constexpr LogRepr to_log(Operand a, bool trunc) {
  const auto l = lod(a);
  if (l.is_zero) return {};
  const auto f = normalize(a, l.k);
  return {false, l.k, trunc ? truncate(f) : f};
}

/// Shift-based antilogarithm. With carry clear the result is
/// 2^ksum * (1 + f); with carry set frac_sum already holds the low bits
/// of the >= 1 fraction sum and the exponent grows by one. Bits below the
/// product LSB are dropped.
constexpr Product antilog(unsigned ksum, std::uint8_t frac_sum, bool carry) {
  const unsigned p = ksum + (carry ? 1u : 0u);
  const std::uint32_t mant = (1u << kFracBits) | (frac_sum & kFracMask);
  return {static_cast<std::uint16_t>((mant << p) >> kFracBits)};
}

constexpr Product exact_mul(Operand a, Operand b) {
  return {static_cast<std::uint16_t>(unsigned{a.value} * unsigned{b.value})};
}

/// Behavioural Mitchell multiplier. With trunc set this is the fault-free
/// AdAM datapath.
constexpr Product mitchell_mul(Operand a, Operand b, bool trunc) {
  const auto la = to_log(a, trunc);
  const auto lb = to_log(b, trunc);
  if (la.is_zero || lb.is_zero) return {0};
  const unsigned s = unsigned{la.frac} + unsigned{lb.frac};
  const bool carry = (s >> kFracBits) != 0;
  return antilog(unsigned{la.k} + lb.k, static_cast<std::uint8_t>(s & kFracMask), carry);
}

}  // namespace adam
