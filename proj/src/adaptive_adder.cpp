#include "adam/adaptive_adder.hpp"

namespace adam {

ClaSignals cla_add(std::uint8_t fa, std::uint8_t fb, const AdderFlips& flips) {
  ClaSignals s;
  s.propagate = static_cast<std::uint8_t>(((fa ^ fb) ^ flips.propagate) & 0x7Fu);
  s.generate = static_cast<std::uint8_t>(((fa & fb) ^ flips.generate) & 0x7Fu);

  // c_j = g_j | p_j g_{j-1} | ... | p_j..p_1 g_0, each term evaluated directly.
  std::uint8_t carry = 0;
  for (int j = 0; j < 7; ++j) {
    bool c = false;
    for (int i = j; i >= 0 && !c; --i) {
      const std::uint8_t chain = static_cast<std::uint8_t>(((1u << (j + 1)) - 1) & ~((1u << (i + 1)) - 1));
      const bool props = (s.propagate & chain) == chain;
      c = props && ((s.generate >> i) & 1u);
    }
    if (c) carry |= static_cast<std::uint8_t>(1u << j);
  }
  s.carry = static_cast<std::uint8_t>((carry ^ flips.carry) & 0x7Fu);
  s.sum = static_cast<std::uint8_t>(((s.propagate ^ s.carry_in()) ^ flips.primary_sum) & 0x7Fu);
  s.carry_out = (s.carry >> 6) & 1u;
  return s;
}

namespace {

bool fraction_tap_applicable(const AdderTap& t, const ProtectionCase& pc) {
  const std::uint8_t bit = static_cast<std::uint8_t>(1u << t.bit_index);
  switch (t.unit) {
    case AdderUnit::primary_slice:
    case AdderUnit::propagate:
    case AdderUnit::generate: return (pc.dropped_mask() & bit) == 0;
    case AdderUnit::duplicate_slice: return (pc.duplicated_mask() & bit) != 0;
    case AdderUnit::lookahead_carry:
      // The carry-out is always consumed; other carries feed slice bit+1.
      return t.bit_index == 6 || (pc.dropped_mask() & (bit << 1)) == 0;
    default: return false;
  }
}

}  // namespace

FractionSumResult protected_add(std::uint8_t fa, std::uint8_t fb, const ProtectionCase& pc,
                                std::span<const AdderTap> faults) {
  FractionSumResult r;
  AdderFlips flips;
  for (const auto& t : faults) {
    if (is_k_unit(t.unit)) continue;
    if (t.bit_index >= unit_width(t.unit) || !fraction_tap_applicable(t, pc)) {
      ++r.inapplicable_faults;
      continue;
    }
    ++r.applied_faults;
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << t.bit_index);
    switch (t.unit) {
      case AdderUnit::primary_slice: flips.primary_sum ^= bit; break;
      case AdderUnit::duplicate_slice: flips.duplicate_sum ^= bit; break;
      case AdderUnit::lookahead_carry: flips.carry ^= bit; break;
      case AdderUnit::propagate: flips.propagate ^= bit; break;
      case AdderUnit::generate: flips.generate ^= bit; break;
      default: break;
    }
  }

  const ClaSignals prim = cla_add(fa, fb, flips);

  // Duplicate PFAs recompute a^b locally and reuse the shared carry-in. With
  // max_k <= 3 the positions below the three physical duplicates are checked
  // against the same recomputation, which is zero for any real operand.
  const std::uint8_t prot = pc.protected_mask();
  const std::uint8_t dup_flips = flips.duplicate_sum & pc.duplicated_mask();
  const std::uint8_t reference = static_cast<std::uint8_t>((((fa ^ fb) ^ prim.carry_in()) ^ dup_flips) & prot);
  const std::uint8_t mismatch = static_cast<std::uint8_t>((prim.sum ^ reference) & prot);
  const std::uint8_t gated = static_cast<std::uint8_t>((prim.sum & reference) & prot);

  r.sum = static_cast<std::uint8_t>(((prim.sum & ~prot) | gated) & 0x7Fu & ~pc.dropped_mask());
  r.carry = prim.carry_out;
  r.detect_flags = mismatch;
  r.mitigated = mismatch != 0;
  return r;
}

std::uint8_t k_add_tmr(std::uint8_t k1, std::uint8_t k2, std::span<const AdderTap> faults) {
  std::uint8_t flip[3] = {0, 0, 0};
  for (const auto& t : faults) {
    if (!is_k_unit(t.unit) || t.bit_index >= 4) continue;
    flip[static_cast<int>(t.unit) - static_cast<int>(AdderUnit::k_replica_0)] ^=
        static_cast<std::uint8_t>(1u << t.bit_index);
  }
  const std::uint8_t sum = static_cast<std::uint8_t>((k1 + k2) & 0x0Fu);
  return majority3<std::uint8_t>(sum ^ flip[0], sum ^ flip[1], sum ^ flip[2]);
}

}  // namespace adam
