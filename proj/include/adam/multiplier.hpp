#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "adam/adaptive_adder.hpp"
#include "adam/log_arith.hpp"

namespace adam {

enum class MultiplierKind : std::uint8_t { exact, tmr_exact, mitchell, mitchell_trunc, adam };

inline constexpr MultiplierKind kAllKinds[] = {MultiplierKind::exact, MultiplierKind::tmr_exact,
                                               MultiplierKind::mitchell, MultiplierKind::mitchell_trunc,
                                               MultiplierKind::adam};

std::string_view to_string(MultiplierKind k);
std::optional<MultiplierKind> parse_kind(std::string_view name);

/// Fault-injectable signals of a MAC unit. Which of them exist depends on
/// the multiplier kind; see signal_catalog().
enum class Signal : std::uint8_t {
  shifted_operand_a,   // aligned 7-bit fraction of a, before truncation
  shifted_operand_b,
  frac_sum_primary,    // primary PFA sum outputs
  frac_sum_duplicate,  // duplicate PFA sum outputs (positions 4..6)
  lookahead_carry,     // carry out of each fraction slice, bit 6 = carry-out
  k_sum,               // single characteristic adder output
  k_sum_replica_0,     // voted characteristic adder replica outputs
  k_sum_replica_1,
  k_sum_replica_2,
  antilog_out,         // approximate product wires
  product_out,         // exact product wires
  replica_out_0,       // TMR replica products, i.e. voter inputs
  replica_out_1,
  replica_out_2,
  accumulator,         // MAC accumulator register
};

std::string_view to_string(Signal s);

struct SignalSpec {
  Signal signal;
  std::uint8_t first_bit;
  std::uint8_t width;
  bool shared;  // corrupts both copies of a duplicated computation
};

/// Per-MAC-unit fault-site catalog, in enumeration order.
std::span<const SignalSpec> signal_catalog(MultiplierKind kind);

/// Number of (signal, bit) sites in one MAC unit.
std::size_t unit_site_count(MultiplierKind kind, bool include_accumulator = true);

struct SignalFlip {
  Signal signal = Signal::product_out;
  std::uint8_t bit = 0;
  constexpr bool operator==(const SignalFlip&) const = default;
};

struct MultiplyOutcome {
  Product product;
  bool detected = false;
  std::optional<FractionSumResult> detail;
  std::uint8_t inapplicable = 0;
};

/// Bit-accurate multiply with transient flips applied for this evaluation
/// only. Flips on signals the kind does not have (including the
/// accumulator, which belongs to the MAC) are counted as inapplicable.
MultiplyOutcome multiply(MultiplierKind kind, Operand a, Operand b,
                         std::span<const SignalFlip> flips = {});

/// Fault-free products of one kind for all 65,536 operand pairs, built from
/// the structural path. Index is (a << 8) | b.
class ProductTable {
 public:
  explicit ProductTable(MultiplierKind kind);

  std::uint16_t operator()(std::uint8_t a, std::uint8_t b) const {
    return table_[(std::size_t{a} << 8) | b];
  }
  MultiplierKind kind() const { return kind_; }

  /// Shared immutable instance per kind.
  static const ProductTable& get(MultiplierKind kind);

 private:
  MultiplierKind kind_;
  std::vector<std::uint16_t> table_;
};

}  // namespace adam
