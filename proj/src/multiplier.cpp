#include "adam/multiplier.hpp"

#include <array>

namespace adam {

std::string_view to_string(MultiplierKind k) {
  switch (k) {
    case MultiplierKind::exact: return "exact";
    case MultiplierKind::tmr_exact: return "tmr_exact";
    case MultiplierKind::mitchell: return "mitchell";
    case MultiplierKind::mitchell_trunc: return "mitchell_trunc";
    case MultiplierKind::adam: return "adam";
  }
  return "?";
}

std::optional<MultiplierKind> parse_kind(std::string_view name) {
  for (auto k : kAllKinds)
    if (to_string(k) == name) return k;
  if (name == "tmr") return MultiplierKind::tmr_exact;
  return std::nullopt;
}

std::string_view to_string(Signal s) {
  switch (s) {
    case Signal::shifted_operand_a: return "shifted_operand_a";
    case Signal::shifted_operand_b: return "shifted_operand_b";
    case Signal::frac_sum_primary: return "frac_sum_primary";
    case Signal::frac_sum_duplicate: return "frac_sum_duplicate";
    case Signal::lookahead_carry: return "lookahead_carry";
    case Signal::k_sum: return "k_sum";
    case Signal::k_sum_replica_0: return "k_sum_replica_0";
    case Signal::k_sum_replica_1: return "k_sum_replica_1";
    case Signal::k_sum_replica_2: return "k_sum_replica_2";
    case Signal::antilog_out: return "antilog_out";
    case Signal::product_out: return "product_out";
    case Signal::replica_out_0: return "replica_out_0";
    case Signal::replica_out_1: return "replica_out_1";
    case Signal::replica_out_2: return "replica_out_2";
    case Signal::accumulator: return "accumulator";
  }
  return "?";
}

namespace {

using S = Signal;

constexpr SignalSpec kExactCatalog[] = {
    {S::product_out, 0, 16, false},
    {S::accumulator, 0, 32, false},
};

constexpr SignalSpec kTmrCatalog[] = {
    {S::replica_out_0, 0, 16, false},
    {S::replica_out_1, 0, 16, false},
    {S::replica_out_2, 0, 16, false},
    {S::accumulator, 0, 32, false},
};

constexpr SignalSpec kMitchellCatalog[] = {
    {S::shifted_operand_a, 0, 7, false},
    {S::shifted_operand_b, 0, 7, false},
    {S::frac_sum_primary, 0, 7, false},
    {S::lookahead_carry, 0, 7, false},
    {S::k_sum, 0, 4, false},
    {S::antilog_out, 0, 16, false},
    {S::accumulator, 0, 32, false},
};

constexpr SignalSpec kAdamCatalog[] = {
    {S::shifted_operand_a, 0, 7, true},
    {S::shifted_operand_b, 0, 7, true},
    {S::frac_sum_primary, 0, 7, false},
    {S::frac_sum_duplicate, 4, 3, false},
    {S::lookahead_carry, 0, 7, true},
    {S::k_sum_replica_0, 0, 4, false},
    {S::k_sum_replica_1, 0, 4, false},
    {S::k_sum_replica_2, 0, 4, false},
    {S::antilog_out, 0, 16, false},
    {S::accumulator, 0, 32, false},
};

bool in_catalog(MultiplierKind kind, const SignalFlip& f) {
  for (const auto& s : signal_catalog(kind))
    if (s.signal == f.signal && f.bit >= s.first_bit && f.bit < s.first_bit + s.width) return true;
  return false;
}

struct LogFlips {
  std::uint8_t op_a = 0, op_b = 0;
  std::uint8_t k_single = 0;
  std::uint16_t out = 0;
  std::array<AdderTap, 24> taps{};
  std::size_t n_taps = 0;

  void tap(AdderUnit u, std::uint8_t bit) {
    if (n_taps < taps.size()) taps[n_taps++] = {u, bit};
  }
};

MultiplyOutcome log_multiply(MultiplierKind kind, Operand a, Operand b, const LogFlips& fl) {
  const bool trunc = kind != MultiplierKind::mitchell;
  const bool adaptive = kind == MultiplierKind::adam;
  MultiplyOutcome out;

  const auto la = lod(a);
  const auto lb = lod(b);
  std::uint8_t fa = la.is_zero ? 0 : normalize(a, la.k);
  std::uint8_t fb = lb.is_zero ? 0 : normalize(b, lb.k);
  fa = static_cast<std::uint8_t>((fa ^ fl.op_a) & kFracMask);
  fb = static_cast<std::uint8_t>((fb ^ fl.op_b) & kFracMask);
  if (trunc) {
    fa = truncate(fa);
    fb = truncate(fb);
  }

  std::span<const AdderTap> taps(fl.taps.data(), fl.n_taps);
  std::uint8_t frac_sum = 0;
  bool carry = false;
  unsigned ksum = 0;
  if (adaptive) {
    const auto res = protected_add(fa, fb, select_case(la.k, lb.k), taps);
    frac_sum = res.sum;
    carry = res.carry;
    out.detected = res.mitigated;
    out.inapplicable = res.inapplicable_faults;
    out.detail = res;
    ksum = k_add_tmr(la.k, lb.k, taps);
  } else {
    AdderFlips af;
    for (const auto& t : taps) {
      const auto bit = static_cast<std::uint8_t>(1u << t.bit_index);
      if (t.unit == AdderUnit::primary_slice) af.primary_sum ^= bit;
      if (t.unit == AdderUnit::lookahead_carry) af.carry ^= bit;
    }
    const auto sig = cla_add(fa, fb, af);
    frac_sum = sig.sum;
    carry = sig.carry_out;
    ksum = ((la.k + lb.k) ^ fl.k_single) & 0x0Fu;
  }

  // The zero flag gates the product at the last stage.
  std::uint16_t p = (la.is_zero || lb.is_zero) ? 0 : antilog(ksum, frac_sum, carry).value;
  out.product = {static_cast<std::uint16_t>(p ^ fl.out)};
  return out;
}

}  // namespace

std::span<const SignalSpec> signal_catalog(MultiplierKind kind) {
  switch (kind) {
    case MultiplierKind::exact: return kExactCatalog;
    case MultiplierKind::tmr_exact: return kTmrCatalog;
    case MultiplierKind::mitchell:
    case MultiplierKind::mitchell_trunc: return kMitchellCatalog;
    case MultiplierKind::adam: return kAdamCatalog;
  }
  return {};
}

std::size_t unit_site_count(MultiplierKind kind, bool include_accumulator) {
  std::size_t n = 0;
  for (const auto& s : signal_catalog(kind))
    if (include_accumulator || s.signal != Signal::accumulator) n += s.width;
  return n;
}

MultiplyOutcome multiply(MultiplierKind kind, Operand a, Operand b, std::span<const SignalFlip> flips) {
  std::uint8_t inapplicable = 0;
  auto usable = [&](const SignalFlip& f) {
    if (f.signal == Signal::accumulator || !in_catalog(kind, f)) {
      ++inapplicable;
      return false;
    }
    return true;
  };

  MultiplyOutcome out;
  switch (kind) {
    case MultiplierKind::exact: {
      std::uint16_t p = exact_mul(a, b).value;
      for (const auto& f : flips)
        if (usable(f)) p ^= static_cast<std::uint16_t>(1u << f.bit);
      out.product = {p};
      break;
    }
    case MultiplierKind::tmr_exact: {
      std::array<std::uint16_t, 3> r;
      r.fill(exact_mul(a, b).value);
      for (const auto& f : flips) {
        if (!usable(f)) continue;
        const int idx = static_cast<int>(f.signal) - static_cast<int>(Signal::replica_out_0);
        r[idx] ^= static_cast<std::uint16_t>(1u << f.bit);
      }
      out.product = {majority3<std::uint16_t>(r[0], r[1], r[2])};
      break;
    }
    case MultiplierKind::mitchell:
    case MultiplierKind::mitchell_trunc:
    case MultiplierKind::adam: {
      LogFlips fl;
      for (const auto& f : flips) {
        if (!usable(f)) continue;
        const auto bit = static_cast<std::uint8_t>(1u << f.bit);
        switch (f.signal) {
          case S::shifted_operand_a: fl.op_a ^= bit; break;
          case S::shifted_operand_b: fl.op_b ^= bit; break;
          case S::frac_sum_primary: fl.tap(AdderUnit::primary_slice, f.bit); break;
          case S::frac_sum_duplicate: fl.tap(AdderUnit::duplicate_slice, f.bit); break;
          case S::lookahead_carry: fl.tap(AdderUnit::lookahead_carry, f.bit); break;
          case S::k_sum: fl.k_single ^= bit; break;
          case S::k_sum_replica_0: fl.tap(AdderUnit::k_replica_0, f.bit); break;
          case S::k_sum_replica_1: fl.tap(AdderUnit::k_replica_1, f.bit); break;
          case S::k_sum_replica_2: fl.tap(AdderUnit::k_replica_2, f.bit); break;
          case S::antilog_out: fl.out ^= static_cast<std::uint16_t>(1u << f.bit); break;
          default: break;
        }
      }
      out = log_multiply(kind, a, b, fl);
      out.inapplicable = static_cast<std::uint8_t>(out.inapplicable + inapplicable);
      return out;
    }
  }
  out.inapplicable = inapplicable;
  return out;
}

ProductTable::ProductTable(MultiplierKind kind) : kind_(kind), table_(1u << 16) {
  for (unsigned a = 0; a < 256; ++a)
    for (unsigned b = 0; b < 256; ++b)
      table_[(a << 8) | b] =
          multiply(kind, Operand{static_cast<std::uint8_t>(a)}, Operand{static_cast<std::uint8_t>(b)}).product.value;
}

const ProductTable& ProductTable::get(MultiplierKind kind) {
  static const std::array<ProductTable, 5> tables = {
      ProductTable(MultiplierKind::exact), ProductTable(MultiplierKind::tmr_exact),
      ProductTable(MultiplierKind::mitchell), ProductTable(MultiplierKind::mitchell_trunc),
      ProductTable(MultiplierKind::adam)};
  return tables[static_cast<std::size_t>(kind)];
}

}  // namespace adam
