// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <random>

#include "adam/kernels.hpp"
#include "adam/nn.hpp"

using namespace adam;

namespace {

Matrix<std::int16_t> random_matrix(std::size_t r, std::size_t c, unsigned seed) {
  std::mt19937 g(seed);
  std::uniform_int_distribution<int> d(-127, 127);
  Matrix<std::int16_t> m(r, c);
  for (auto& v : m.data()) v = static_cast<std::int16_t>(d(g));
  return m;
}

template <Exec E>
void BM_lut_gemm(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  const auto& t = ProductTable::get(MultiplierKind::adam);
  Matrix<std::int32_t> out;
  for (auto _ : st) {
    if constexpr (E == Exec::serial) kernels::serial::lut_gemm(a, b, t, out);
    else kernels::omp::lut_gemm(a, b, t, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <Exec E>
void BM_error_sweep(benchmark::State& st) {
  const auto& t = ProductTable::get(MultiplierKind::adam);
  for (auto _ : st) {
    auto acc = E == Exec::serial ? kernels::serial::error_sweep(t) : kernels::omp::error_sweep(t);
    benchmark::DoNotOptimize(acc);
  }
}

template <Exec E>
void BM_predict(benchmark::State& st) {
  static const auto model = nn::load_model(std::string(ADAM_DATA_DIR) + "/lenet5_int8.json");
  static const auto data = nn::load_idx(std::string(ADAM_DATA_DIR) + "/mnist-holdout-images.idx3-ubyte",
                                        std::string(ADAM_DATA_DIR) + "/mnist-holdout-labels.idx1-ubyte", 200);
  for (auto _ : st) benchmark::DoNotOptimize(nn::predict(model, data, MultiplierKind::adam, {}, E));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(data.size()));
}

}  // namespace

BENCHMARK(BM_lut_gemm<Exec::serial>)->Arg(64)->Arg(256);
BENCHMARK(BM_lut_gemm<Exec::parallel>)->Arg(64)->Arg(256);
BENCHMARK(BM_error_sweep<Exec::serial>);
BENCHMARK(BM_error_sweep<Exec::parallel>);
BENCHMARK(BM_predict<Exec::serial>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_predict<Exec::parallel>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
