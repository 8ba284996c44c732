#include "adam/systolic.hpp"

#include <algorithm>
#include <tuple>
#include <vector>

#include "adam/error.hpp"
#include "adam/kernels.hpp"

namespace adam {

void ArrayConfig::validate() const {
  if (rows == 0 || cols == 0) throw Error("invalid_config", "array rows and cols must be >= 1");
  if (accumulator_width != 32) throw Error("invalid_config", "only 32-bit accumulators are modelled");
}

TileSchedule schedule(const GemmDims& dims, const ArrayConfig& cfg) {
  cfg.validate();
  return {(dims.m + cfg.rows - 1) / cfg.rows, (dims.n + cfg.cols - 1) / cfg.cols, dims.k};
}

namespace {

struct PendingFault {
  std::size_t ti, tj, step;
  const FaultEvent* event;
};

// Replays one output element step by step with the faults that hit its MAC.
std::int32_t replay_element(const Matrix<std::int16_t>& a, const Matrix<std::int16_t>& b, std::size_t i,
                            std::size_t j, MultiplierKind kind, std::span<const PendingFault> faults, GemmResult& res) {
  const auto& table = ProductTable::get(kind);
  std::uint32_t acc = 0;
  std::size_t next = 0;
  std::vector<SignalFlip> flips;
  for (std::size_t k = 0; k < a.cols(); ++k) {
    flips.clear();
    std::uint32_t acc_flip = 0;
    while (next < faults.size() && faults[next].step == k) {
      const auto& site = faults[next].event->site;
      if (site.signal == Signal::accumulator) {
        if (site.bit < 32) {
          acc_flip ^= 1u << site.bit;
          ++res.faults_applied;
        } else {
          ++res.faults_inapplicable;
        }
      } else {
        flips.push_back({site.signal, site.bit});
      }
      ++next;
    }
    const auto av = a(i, k);
    const auto bv = b(k, j);
    const Operand ma{operand_magnitude(av)};
    const Operand mb{operand_magnitude(bv)};
    std::uint16_t p;
    if (flips.empty()) {
      p = table(ma.value, mb.value);
    } else {
      const auto mo = multiply(kind, ma, mb, flips);
      p = mo.product.value;
      res.detected |= mo.detected;
      res.faults_inapplicable += mo.inapplicable;
      res.faults_applied += static_cast<std::uint32_t>(flips.size()) - mo.inapplicable;
    }
    acc = mac_step(acc, av, bv, p) ^ acc_flip;
  }
  return static_cast<std::int32_t>(acc);
}

}  // namespace

GemmResult gemm(const Matrix<std::int16_t>& a, const Matrix<std::int16_t>& b, const ArrayConfig& cfg,
                MultiplierKind kind, std::span<const FaultEvent> events, std::uint64_t cycle_base) {
  if (a.cols() != b.rows())
    throw Error("dimension_mismatch", "gemm: A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                          " but B is " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  const auto sched = schedule({a.rows(), b.cols(), a.cols()}, cfg);

  GemmResult res;
  kernels::serial::lut_gemm(a, b, ProductTable::get(kind), res.out);

  std::vector<PendingFault> pending;
  for (const auto& e : events) {
    if (e.site.row >= cfg.rows || e.site.col >= cfg.cols)
      throw Error("invalid_fault_unit", "fault event addresses mac[" + std::to_string(e.site.row) + "][" +
                                            std::to_string(e.site.col) + "] outside the " +
                                            std::to_string(cfg.rows) + "x" + std::to_string(cfg.cols) + " array");
    if (e.cycle < cycle_base || e.cycle - cycle_base >= sched.cycles()) continue;
    const auto slot = sched.decode(e.cycle - cycle_base);
    const std::size_t i = slot.ti * cfg.rows + e.site.row;
    const std::size_t j = slot.tj * cfg.cols + e.site.col;
    if (i >= a.rows() || j >= b.cols()) {
      ++res.faults_idle;
      continue;
    }
    pending.push_back({slot.ti, slot.tj, slot.step, &e});
  }
  if (pending.empty()) return res;

  std::stable_sort(pending.begin(), pending.end(), [](const PendingFault& x, const PendingFault& y) {
    return std::tie(x.ti, x.tj, x.event->site.row, x.event->site.col, x.step) <
           std::tie(y.ti, y.tj, y.event->site.row, y.event->site.col, y.step);
  });

  std::size_t lo = 0;
  while (lo < pending.size()) {
    std::size_t hi = lo;
    const auto& f = pending[lo];
    while (hi < pending.size() && pending[hi].ti == f.ti && pending[hi].tj == f.tj &&
           pending[hi].event->site.row == f.event->site.row && pending[hi].event->site.col == f.event->site.col)
      ++hi;
    const std::size_t i = f.ti * cfg.rows + f.event->site.row;
    const std::size_t j = f.tj * cfg.cols + f.event->site.col;
    res.out(i, j) = replay_element(a, b, i, j, kind, std::span<const PendingFault>(pending).subspan(lo, hi - lo), res);
    lo = hi;
  }
  return res;
}

std::optional<ElementFault> gemm_fault_element(const Matrix<std::int16_t>& a, const Matrix<std::int16_t>& b,
                                               const ArrayConfig& cfg, MultiplierKind kind, const FaultEvent& event,
                                               std::uint64_t cycle_base) {
  if (a.cols() != b.rows()) throw Error("dimension_mismatch", "gemm_fault_element: inner dimensions differ");
  if (event.site.row >= cfg.rows || event.site.col >= cfg.cols)
    throw Error("invalid_fault_unit", "fault event addresses a MAC outside the array");
  const auto sched = schedule({a.rows(), b.cols(), a.cols()}, cfg);
  if (event.cycle < cycle_base || event.cycle - cycle_base >= sched.cycles()) return std::nullopt;
  const auto slot = sched.decode(event.cycle - cycle_base);
  const std::size_t i = slot.ti * cfg.rows + event.site.row;
  const std::size_t j = slot.tj * cfg.cols + event.site.col;
  if (i >= a.rows() || j >= b.cols()) return std::nullopt;

  GemmResult res;
  const PendingFault pf{slot.ti, slot.tj, slot.step, &event};
  const auto v = replay_element(a, b, i, j, kind, std::span(&pf, 1), res);
  return ElementFault{i, j, v, res.detected, res.faults_applied, res.faults_inapplicable};
}

namespace {

Matrix<std::int16_t> widen(const Matrix<std::int8_t>& m) {
  Matrix<std::int16_t> w(m.rows(), m.cols());
  auto src = m.data();
  auto dst = w.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == -128 ? std::int16_t{-127} : std::int16_t{src[i]};
  return w;
}

}  // namespace

GemmResult gemm(const Matrix<std::int8_t>& a, const Matrix<std::int8_t>& b, const ArrayConfig& cfg,
                MultiplierKind kind, std::span<const FaultEvent> events, std::uint64_t cycle_base) {
  return gemm(widen(a), widen(b), cfg, kind, events, cycle_base);
}

}  // namespace adam
