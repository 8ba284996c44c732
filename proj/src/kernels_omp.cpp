#include <omp.h>

#include <vector>

#include "adam/error.hpp"
#include "adam/kernels.hpp"
#include "adam/systolic.hpp"

namespace adam::kernels::omp {

void lut_gemm(const Matrix<std::int16_t>& a, const Matrix<std::int16_t>& b, const ProductTable& table,
              Matrix<std::int32_t>& out) {
  if (a.cols() != b.rows()) throw Error("dimension_mismatch", "lut_gemm: inner dimensions differ");
  out = Matrix<std::int32_t>(a.rows(), b.cols());
  const auto m = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t n = b.cols();
  const std::size_t kk = a.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::uint32_t acc = 0;
      for (std::size_t k = 0; k < kk; ++k) {
        const auto av = a(i, k);
        const auto bv = b(k, j);
        acc = mac_step(acc, av, bv, table(operand_magnitude(av), operand_magnitude(bv)));
      }
      out(i, j) = static_cast<std::int32_t>(acc);
    }
  }
}

SweepAccum error_sweep(const ProductTable& table) {
  std::vector<SweepAccum> rows(256);
#pragma omp parallel for schedule(static)
  for (int a = 0; a < 256; ++a)
    for (unsigned b = 0; b < 256; ++b)
      sweep_pair(rows[a], static_cast<unsigned>(a), b,
                 table(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)));
  SweepAccum acc;
  for (const auto& r : rows) acc.merge(r);
  return acc;
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace adam::kernels::omp
