#pragma once

#include <cstdint>
#include <string>

#include "adam/multiplier.hpp"

namespace adam {

/// One fault-injectable bit inside a MAC unit of the array.
struct FaultSite {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  Signal signal = Signal::product_out;
  std::uint8_t bit = 0;
  bool shared = false;

  bool operator==(const FaultSite&) const = default;

  /// Hierarchical name, e.g. "mac[0][3]/adam/frac_sum_duplicate[5]".
  std::string path(MultiplierKind kind) const;
};

/// A single transient bit-flip at a global array cycle.
struct FaultEvent {
  FaultSite site;
  std::uint64_t cycle = 0;
  bool operator==(const FaultEvent&) const = default;
};

}  // namespace adam
