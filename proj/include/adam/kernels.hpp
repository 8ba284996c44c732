#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference and an
// OpenMP version; both produce bit-identical results.

#include <array>
#include <cstdint>

#include "adam/adaptive_adder.hpp"
#include "adam/matrix.hpp"
#include "adam/multiplier.hpp"

namespace adam {

enum class Exec : std::uint8_t { serial, parallel };

inline constexpr int kHistogramBuckets = 16;  // 1%-wide, last bucket catches >= 15%

/// Raw sums from an exhaustive operand sweep, split by protection case.
struct SweepAccum {
  std::array<double, kCaseBuckets> rel_sum{};      // sum of |approx - exact| / exact
  std::array<double, kCaseBuckets> max_rel{};
  std::array<std::int64_t, kCaseBuckets> err_sum{};  // sum of approx - exact
  std::array<std::uint64_t, kCaseBuckets> count{};
  std::array<std::uint64_t, kHistogramBuckets> histogram{};

  void merge(const SweepAccum& o);
};

namespace kernels::serial {

void lut_gemm(const Matrix<std::int16_t>& a, const Matrix<std::int16_t>& b, const ProductTable& table,
              Matrix<std::int32_t>& out);

SweepAccum error_sweep(const ProductTable& table);

}  // namespace kernels::serial

namespace kernels::omp {

void lut_gemm(const Matrix<std::int16_t>& a, const Matrix<std::int16_t>& b, const ProductTable& table,
              Matrix<std::int32_t>& out);

SweepAccum error_sweep(const ProductTable& table);

/// Threads OpenMP will use for parallel regions.
int max_threads();
void set_threads(int n);

}  // namespace kernels::omp

/// Accumulates one signed product into a 32-bit two's-complement register.
inline std::uint32_t mac_step(std::uint32_t acc, std::int16_t a, std::int16_t b, std::uint16_t magnitude_product) {
  const bool neg = (a < 0) != (b < 0);
  return neg ? acc - magnitude_product : acc + magnitude_product;
}

/// Folds one operand pair into a sweep accumulator.
void sweep_pair(SweepAccum& acc, unsigned a, unsigned b, std::uint16_t approx);

}  // namespace adam
