#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "adam/fault_site.hpp"
#include "adam/matrix.hpp"
#include "adam/multiplier.hpp"

namespace adam {

enum class Dataflow : std::uint8_t { output_stationary };

struct ArrayConfig {
  std::uint32_t rows = 8;
  std::uint32_t cols = 8;
  Dataflow dataflow = Dataflow::output_stationary;
  std::uint8_t accumulator_width = 32;

  /// Throws adam::Error on an empty array.
  void validate() const;
};

struct GemmDims {
  std::size_t m = 0;  // rows of A / C
  std::size_t n = 0;  // cols of B / C
  std::size_t k = 0;  // inner dimension
};

/// Output-stationary tile schedule. Tiles are visited row-major and each
/// tile occupies k consecutive cycles; MAC (r, c) of tile (ti, tj) owns
/// output element (ti * rows + r, tj * cols + c).
struct TileSchedule {
  std::size_t tiles_m = 0;
  std::size_t tiles_n = 0;
  std::size_t k = 0;

  std::uint64_t cycles() const { return std::uint64_t{tiles_m} * tiles_n * k; }
  std::uint64_t cycle_of(std::size_t ti, std::size_t tj, std::size_t step) const {
    return (std::uint64_t{ti} * tiles_n + tj) * k + step;
  }
  struct Slot {
    std::size_t ti, tj, step;
  };
  Slot decode(std::uint64_t cycle) const {
    const std::uint64_t tile = cycle / k;
    return {static_cast<std::size_t>(tile / tiles_n), static_cast<std::size_t>(tile % tiles_n),
            static_cast<std::size_t>(cycle % k)};
  }
};

TileSchedule schedule(const GemmDims& dims, const ArrayConfig& cfg);

struct GemmResult {
  Matrix<std::int32_t> out;
  bool detected = false;              // an AdAM unit raised its mismatch flag
  std::uint32_t faults_applied = 0;   // events that reached an active MAC
  std::uint32_t faults_idle = 0;      // events on a MAC with no output in that tile
  std::uint32_t faults_inapplicable = 0;
};

/// Magnitude seen by the unsigned multiplier, saturated to 8 bits.
constexpr std::uint8_t operand_magnitude(std::int16_t v) {
  const int m = v < 0 ? -int{v} : int{v};
  return static_cast<std::uint8_t>(m > 255 ? 255 : m);
}

/// C = A * B on the simulated array. Operands are sign-magnitude around the
/// unsigned multiplier; |v| is saturated at 255. Events whose cycle, offset
/// by cycle_base, falls outside this GEMM are ignored.
GemmResult gemm(const Matrix<std::int16_t>& a, const Matrix<std::int16_t>& b, const ArrayConfig& cfg,
                MultiplierKind kind, std::span<const FaultEvent> events = {}, std::uint64_t cycle_base = 0);

/// The one output element a fault event lands on, recomputed with that fault.
struct ElementFault {
  std::size_t row = 0, col = 0;
  std::int32_t value = 0;
  bool detected = false;
  std::uint32_t faults_applied = 0;
  std::uint32_t faults_inapplicable = 0;
};

/// Same semantics as gemm() with a single event, but only the hit element is
/// evaluated. Empty when the event misses this GEMM or lands on an idle MAC.
std::optional<ElementFault> gemm_fault_element(const Matrix<std::int16_t>& a, const Matrix<std::int16_t>& b,
                                               const ArrayConfig& cfg, MultiplierKind kind, const FaultEvent& event,
                                               std::uint64_t cycle_base = 0);

/// INT8 entry point; -128 saturates to -127 before the multiplier.
GemmResult gemm(const Matrix<std::int8_t>& a, const Matrix<std::int8_t>& b, const ArrayConfig& cfg,
                MultiplierKind kind, std::span<const FaultEvent> events = {}, std::uint64_t cycle_base = 0);

}  // namespace adam
