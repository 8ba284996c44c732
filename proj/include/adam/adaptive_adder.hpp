#pragma once

#include <concepts>
#include <cstdint>
#include <span>

namespace adam {

/// How the fraction adder spends its free LSB slices, chosen from the larger
/// characteristic of the two operands.
struct ProtectionCase {
  std::uint8_t max_k = 0;
  std::uint8_t dropped_lsbs = 0;
  std::uint8_t protected_msbs = 0;

  constexpr bool operator==(const ProtectionCase&) const = default;

  /// Sum positions whose output is never produced.
  constexpr std::uint8_t dropped_mask() const {
    return static_cast<std::uint8_t>((1u << dropped_lsbs) - 1);
  }
  /// Sum positions that go through the AND mitigation gate.
  constexpr std::uint8_t protected_mask() const {
    return static_cast<std::uint8_t>(0x7Fu & ~((1u << (7 - protected_msbs)) - 1));
  }
  /// Sum positions with a physical (fault-injectable) duplicate PFA. Only
  /// three exist; with max_k <= 3 the lower protected positions are compared
  /// against a recomputation that is constant zero for real operands.
  constexpr std::uint8_t duplicated_mask() const {
    return static_cast<std::uint8_t>(protected_mask() & 0x70u);
  }
  /// Index 0..4 for the cases {<=3, 4, 5, 6, 7}.
  constexpr int bucket() const { return max_k <= 3 ? 0 : max_k - 3; }
};

inline constexpr int kCaseBuckets = 5;
inline constexpr const char* kCaseLabels[kCaseBuckets] = {"k<=3", "k=4", "k=5", "k=6", "k=7"};

constexpr ProtectionCase select_case(std::uint8_t k1, std::uint8_t k2) {
  const std::uint8_t m = k1 > k2 ? k1 : k2;
  switch (m) {
    case 7: return {7, 2, 2};
    case 6: return {6, 1, 2};
    case 5: return {5, 0, 2};
    case 4: return {4, 0, 3};
    default: return {m, 0, 7};
  }
}

/// Fault-addressable signal groups inside the fraction and k adders.
enum class AdderUnit : std::uint8_t {
  primary_slice,    // PFA sum outputs, bit = sum position 0..6
  duplicate_slice,  // duplicate PFA sum outputs, bit = duplicated sum position
  lookahead_carry,  // carry out of slice bit (bit 6 is the carry-out)
  propagate,        // PFA propagate outputs 0..6
  generate,         // PFA generate outputs 0..6
  k_replica_0,      // k-adder replica outputs, bits 0..3
  k_replica_1,
  k_replica_2,
};

struct AdderTap {
  AdderUnit unit = AdderUnit::primary_slice;
  std::uint8_t bit_index = 0;
  constexpr bool operator==(const AdderTap&) const = default;
};

constexpr int unit_width(AdderUnit u) {
  switch (u) {
    case AdderUnit::k_replica_0:
    case AdderUnit::k_replica_1:
    case AdderUnit::k_replica_2: return 4;
    default: return 7;
  }
}

constexpr bool is_k_unit(AdderUnit u) {
  return u == AdderUnit::k_replica_0 || u == AdderUnit::k_replica_1 || u == AdderUnit::k_replica_2;
}

/// XOR masks applied to adder signals for a single evaluation.
struct AdderFlips {
  std::uint8_t propagate = 0;
  std::uint8_t generate = 0;
  std::uint8_t carry = 0;
  std::uint8_t primary_sum = 0;
  std::uint8_t duplicate_sum = 0;
};

/// Internal signals of the 7-bit carry-lookahead adder.
struct ClaSignals {
  std::uint8_t propagate = 0;
  std::uint8_t generate = 0;
  std::uint8_t carry = 0;  // bit j: carry out of slice j
  std::uint8_t sum = 0;
  bool carry_out = false;

  constexpr std::uint8_t carry_in() const { return static_cast<std::uint8_t>((carry << 1) & 0x7Fu); }
};

/// Two-level lookahead: every carry is a function of propagate/generate
/// only, so a flipped carry affects just the slice that consumes it.
ClaSignals cla_add(std::uint8_t fa, std::uint8_t fb, const AdderFlips& flips = {});

struct FractionSumResult {
  std::uint8_t sum = 0;
  bool carry = false;
  std::uint8_t detect_flags = 0;
  bool mitigated = false;
  std::uint8_t applied_faults = 0;
  std::uint8_t inapplicable_faults = 0;
};

/// Adaptive adder: primary CLA plus duplicate PFAs on the protected MSBs,
/// sharing the primary lookahead carries. Mismatching positions are zeroed.
/// Taps addressed to the k adder are ignored here.
FractionSumResult protected_add(std::uint8_t fa, std::uint8_t fb, const ProtectionCase& pc,
                                std::span<const AdderTap> faults = {});

template <std::unsigned_integral T>
constexpr T majority3(T a, T b, T c) {
  return static_cast<T>((a & b) | (a & c) | (b & c));
}

/// Triplicated 3-bit characteristic adder with a bitwise voter. Only
/// k_replica taps are consumed.
std::uint8_t k_add_tmr(std::uint8_t k1, std::uint8_t k2, std::span<const AdderTap> faults = {});

}  // namespace adam
