#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "adam/adaptive_adder.hpp"
#include "adam/kernels.hpp"
#include "adam/multiplier.hpp"

namespace adam {

struct ErrorSummary {
  double mare_percent = 0.0;
  double max_relative_error_percent = 0.0;
  double mean_error = 0.0;  // mean of (approx - exact)
  std::uint64_t pair_count = 0;
};

/// Arithmetic error of one multiplier over the full 8x8-bit input domain.
/// Relative errors are taken over pairs with a non-zero exact product;
/// mare_incl_zero_percent also counts the 511 zero-operand pairs as
/// zero-error terms.
struct ErrorStats {
  MultiplierKind kind = MultiplierKind::exact;
  ErrorSummary overall;
  double mare_incl_zero_percent = 0.0;
  std::array<ErrorSummary, kCaseBuckets> per_case{};
  std::array<std::uint64_t, kHistogramBuckets> histogram{};
};

ErrorStats mare_exhaustive(MultiplierKind kind, Exec exec = Exec::parallel);

ErrorStats summarize(MultiplierKind kind, const SweepAccum& acc);

/// Columns: kind, mare, max_re, mean_err, case, pair_count. One "all" row
/// per kind followed by one row per protection case.
std::string error_report_csv(std::span<const ErrorStats> stats);
nlohmann::json error_report_json(std::span<const ErrorStats> stats);

}  // namespace adam
