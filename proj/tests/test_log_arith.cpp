#include <doctest.h>

#include <cmath>

#include "adam/log_arith.hpp"

using namespace adam;

namespace {
Operand op(unsigned v) { return Operand{static_cast<std::uint8_t>(v)}; }
}  // namespace

TEST_CASE("lod") {
  CHECK(lod(op(0b00000001)) == LodResult{false, 0});
  CHECK(lod(op(0b10000000)) == LodResult{false, 7});
  CHECK(lod(op(0)) == LodResult{true, 0});
  for (unsigned v = 1; v < 256; ++v) {
    const auto k = lod(op(v)).k;
    CHECK((1u << k) <= v);
    CHECK(v < (2u << k));
  }
}

TEST_CASE("normalize examples") {
  CHECK(normalize(op(3), 1) == 0b1000000);
  CHECK(normalize(op(128), 7) == 0);
  CHECK(normalize(op(255), 7) == 0b1111111);
}

TEST_CASE("normalize round trip over all non-zero operands") {
  for (unsigned v = 1; v < 256; ++v) {
    const auto k = lod(op(v)).k;
    CHECK(((128u + normalize(op(v), k)) >> (7 - k)) == v);
  }
}

TEST_CASE("truncate examples") {
  CHECK(truncate(0b1111111) == 0b1111100);
  CHECK(truncate(0b1010000) == 0b1010000);
  CHECK(truncate(0b0000011) == 0);
  for (unsigned f = 0; f < 128; ++f) CHECK(truncate(static_cast<std::uint8_t>(f)) % 4 == 0);
}

TEST_CASE("to_log invariants") {
  CHECK(to_log(op(0), true) == LogRepr{});
  for (unsigned v = 1; v < 256; ++v) {
    const auto l = to_log(op(v), true);
    CHECK_FALSE(l.is_zero);
    CHECK(l.frac % 4 == 0);
  }
}

TEST_CASE("antilog examples") {
  CHECK(antilog(3, 0b1100000, false).value == 14);
  CHECK(antilog(14, 0b1111000, true).value == 63488);
  CHECK(antilog(0, 0, false).value == 1);
}

TEST_CASE("exact_mul examples") {
  CHECK(exact_mul(op(255), op(255)).value == 65025);
  CHECK(exact_mul(op(0), op(77)).value == 0);
  CHECK(exact_mul(op(128), op(128)).value == 16384);
}

TEST_CASE("mitchell_mul examples") {
  CHECK(mitchell_mul(op(3), op(5), true).value == 14);
  CHECK(mitchell_mul(op(255), op(255), true).value == 63488);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      CHECK(mitchell_mul(op(1u << i), op(1u << j), true).value == (1u << (i + j)));
      CHECK(mitchell_mul(op(1u << i), op(1u << j), false).value == (1u << (i + j)));
    }
}

// Independent reference: Mitchell's formula evaluated in floating point.
TEST_CASE("mitchell_mul matches the closed-form approximation") {
  for (unsigned a = 1; a < 256; ++a)
    for (unsigned b = 1; b < 256; ++b) {
      const int ka = std::bit_width(a) - 1, kb = std::bit_width(b) - 1;
      const double fa = a / double(1u << ka) - 1.0, fb = b / double(1u << kb) - 1.0;
      const double s = fa + fb;
      const double approx = s < 1.0 ? std::ldexp(1.0 + s, ka + kb) : std::ldexp(s, ka + kb + 1);
      REQUIRE(mitchell_mul(op(a), op(b), false).value == static_cast<unsigned>(std::floor(approx)));
    }
}

TEST_CASE("underestimation, truncation monotonicity, zero absorption") {
  for (unsigned a = 0; a < 256; ++a)
    for (unsigned b = 0; b < 256; ++b) {
      const auto e = exact_mul(op(a), op(b)).value;
      const auto m = mitchell_mul(op(a), op(b), false).value;
      const auto t = mitchell_mul(op(a), op(b), true).value;
      REQUIRE(m <= e);
      REQUIRE(t <= m);
      REQUIRE((t == 0) == (a == 0 || b == 0));
      REQUIRE((m == 0) == (a == 0 || b == 0));
    }
}
