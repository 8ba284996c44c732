#include <algorithm>
#include <cmath>

#include "adam/error.hpp"
#include "adam/kernels.hpp"
#include "adam/log_arith.hpp"
#include "adam/systolic.hpp"

namespace adam {

void SweepAccum::merge(const SweepAccum& o) {
  for (int c = 0; c < kCaseBuckets; ++c) {
    rel_sum[c] += o.rel_sum[c];
    max_rel[c] = std::max(max_rel[c], o.max_rel[c]);
    err_sum[c] += o.err_sum[c];
    count[c] += o.count[c];
  }
  for (int h = 0; h < kHistogramBuckets; ++h) histogram[h] += o.histogram[h];
}

void sweep_pair(SweepAccum& acc, unsigned a, unsigned b, std::uint16_t approx) {
  const unsigned exact = a * b;
  if (exact == 0) return;
  const int bucket = select_case(lod(Operand{static_cast<std::uint8_t>(a)}).k,
                                 lod(Operand{static_cast<std::uint8_t>(b)}).k)
                         .bucket();
  const long diff = long{approx} - long{exact};
  const double rel = static_cast<double>(diff < 0 ? -diff : diff) / exact;
  acc.rel_sum[bucket] += rel;
  acc.max_rel[bucket] = std::max(acc.max_rel[bucket], rel);
  acc.err_sum[bucket] += diff;
  ++acc.count[bucket];
  const int h = std::min(kHistogramBuckets - 1, static_cast<int>(std::floor(rel * 100.0)));
  ++acc.histogram[h];
}

namespace kernels::serial {

void lut_gemm(const Matrix<std::int16_t>& a, const Matrix<std::int16_t>& b, const ProductTable& table,
              Matrix<std::int32_t>& out) {
  if (a.cols() != b.rows()) throw Error("dimension_mismatch", "lut_gemm: inner dimensions differ");
  out = Matrix<std::int32_t>(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::uint32_t acc = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        const auto av = a(i, k);
        const auto bv = b(k, j);
        acc = mac_step(acc, av, bv, table(operand_magnitude(av), operand_magnitude(bv)));
      }
      out(i, j) = static_cast<std::int32_t>(acc);
    }
  }
}

SweepAccum error_sweep(const ProductTable& table) {
  // Row partials merged in row order, the same grouping the parallel sweep uses.
  SweepAccum acc;
  for (unsigned a = 0; a < 256; ++a) {
    SweepAccum row;
    for (unsigned b = 0; b < 256; ++b)
      sweep_pair(row, a, b, table(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)));
    acc.merge(row);
  }
  return acc;
}

}  // namespace kernels::serial
}  // namespace adam
