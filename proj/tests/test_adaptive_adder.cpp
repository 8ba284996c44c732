#include <doctest.h>

#include <vector>

#include "adam/adaptive_adder.hpp"

using namespace adam;

TEST_CASE("select_case table") {
  CHECK(select_case(7, 2) == ProtectionCase{7, 2, 2});
  CHECK(select_case(2, 6) == ProtectionCase{6, 1, 2});
  CHECK(select_case(5, 5) == ProtectionCase{5, 0, 2});
  CHECK(select_case(4, 4) == ProtectionCase{4, 0, 3});
  const auto z = select_case(0, 0);
  CHECK(z.max_k == 0);
  CHECK(z.dropped_lsbs == 0);
  CHECK(z.protected_mask() == 0x7F);
  CHECK(select_case(7, 0).protected_mask() == 0b1100000);
  CHECK(select_case(4, 1).protected_mask() == 0b1110000);
  CHECK(select_case(7, 7).dropped_mask() == 0b11);
  CHECK(select_case(3, 3).duplicated_mask() == 0b1110000);
}

TEST_CASE("cla_add examples") {
  auto r = cla_add(0b1000000, 0b0100000);
  CHECK(r.sum == 0b1100000);
  CHECK_FALSE(r.carry_out);
  r = cla_add(0b1111100, 0b1111100);
  CHECK(r.sum == 0b1111000);
  CHECK(r.carry_out);
  r = cla_add(0, 0);
  CHECK(r.sum == 0);
  CHECK_FALSE(r.carry_out);
}

TEST_CASE("cla_add is an adder") {
  for (unsigned a = 0; a < 128; ++a)
    for (unsigned b = 0; b < 128; ++b) {
      const auto r = cla_add(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
      REQUIRE(r.sum + 128u * r.carry_out == a + b);
      REQUIRE(r.propagate == ((a ^ b) & 0x7F));
      REQUIRE(r.generate == (a & b));
    }
}

TEST_CASE("a flipped lookahead carry only changes the consuming slice") {
  for (unsigned a = 0; a < 128; a += 3)
    for (unsigned b = 0; b < 128; b += 5)
      for (int j = 0; j < 6; ++j) {
        const auto base = cla_add(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
        AdderFlips f;
        f.carry = static_cast<std::uint8_t>(1u << j);
        const auto r = cla_add(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), f);
        REQUIRE((r.sum ^ base.sum) == (1u << (j + 1)));
        REQUIRE(r.carry_out == base.carry_out);
      }
}

TEST_CASE("protected_add examples") {
  const auto pc = select_case(5, 5);
  auto r = protected_add(0b1100000, 0b0100000, pc);
  CHECK(r.sum == 0);
  CHECK(r.carry);
  CHECK(r.detect_flags == 0);
  CHECK_FALSE(r.mitigated);

  const AdderTap dup6{AdderUnit::duplicate_slice, 6};
  r = protected_add(0b1100000, 0b0100000, pc, std::span(&dup6, 1));
  CHECK((r.sum & 0x40) == 0);
  CHECK(r.detect_flags == 0x40);
  CHECK(r.mitigated);

  const AdderTap prim5{AdderUnit::primary_slice, 5};
  for (std::uint8_t k = 0; k < 8; ++k) {
    r = protected_add(0, 0, select_case(k, 0), std::span(&prim5, 1));
    CHECK((r.sum & 0x20) == 0);
    CHECK(r.detect_flags == 0x20);
  }
}

TEST_CASE("protected_add is transparent without faults") {
  for (std::uint8_t k = 0; k < 8; ++k) {
    const auto pc = select_case(k, 0);
    for (unsigned a = 0; a < 128; ++a)
      for (unsigned b = 0; b < 128; ++b) {
        const auto fa = static_cast<std::uint8_t>(a & ~pc.dropped_mask());
        const auto fb = static_cast<std::uint8_t>(b & ~pc.dropped_mask());
        const auto ref = cla_add(fa, fb);
        const auto r = protected_add(fa, fb, pc);
        REQUIRE(r.sum == ref.sum);
        REQUIRE(r.carry == ref.carry_out);
        REQUIRE(r.detect_flags == 0);
      }
  }
}

TEST_CASE("mitigation contract for duplicated sum faults") {
  for (std::uint8_t k = 0; k < 8; ++k) {
    const auto pc = select_case(k, 0);
    for (unsigned a = 0; a < 128; a += 7)
      for (unsigned b = 0; b < 128; b += 3) {
        const auto fa = static_cast<std::uint8_t>(a & ~pc.dropped_mask());
        const auto fb = static_cast<std::uint8_t>(b & ~pc.dropped_mask());
        const auto ref = cla_add(fa, fb);
        for (int bit = 0; bit < 7; ++bit)
          for (auto unit : {AdderUnit::primary_slice, AdderUnit::duplicate_slice}) {
            const AdderTap t{unit, static_cast<std::uint8_t>(bit)};
            const auto r = protected_add(fa, fb, pc, std::span(&t, 1));
            // Soundness: a flag only appears when the fault was applied.
            if (r.detect_flags) REQUIRE(r.applied_faults == 1);
            REQUIRE((r.sum & r.detect_flags) == 0);
            const bool covered = (pc.protected_mask() >> bit) & 1;
            if (covered || unit == AdderUnit::duplicate_slice)
              REQUIRE((r.sum & ~r.detect_flags & 0x7F) == (ref.sum & ~r.detect_flags & ~pc.dropped_mask() & 0x7F));
            const bool exists = unit == AdderUnit::primary_slice ? !((pc.dropped_mask() >> bit) & 1)
                                                                  : ((pc.duplicated_mask() >> bit) & 1);
            REQUIRE(r.applied_faults == (exists ? 1 : 0));
            if (exists && covered) REQUIRE(r.detect_flags == (1u << bit));
          }
      }
  }
}

TEST_CASE("k_add_tmr") {
  CHECK(k_add_tmr(7, 7) == 14);
  CHECK(k_add_tmr(0, 0) == 0);
  const AdderTap t{AdderUnit::k_replica_1, 2};
  CHECK(k_add_tmr(3, 4, std::span(&t, 1)) == 7);
}

TEST_CASE("majority3") {
  CHECK(majority3<unsigned>(0b1010, 0b1010, 0b0101) == 0b1010);
  CHECK(majority3<unsigned>(0b1100, 0b1010, 0b1001) == 0b1000);
  for (unsigned x = 0; x < 16; ++x) {
    CHECK(majority3(x, x, x) == x);
    for (unsigned y = 0; y < 16; ++y) {
      CHECK(majority3(x, x, y) == x);
      CHECK(majority3(x, y, x) == x);
      CHECK(majority3(y, x, x) == x);
    }
  }
}
