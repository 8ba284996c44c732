#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <map>
#include <set>

#include "adam/error.hpp"
#include "adam/fault_engine.hpp"

using namespace adam;

TEST_CASE("site enumeration") {
  const ArrayConfig cfg;
  CHECK(enumerate_sites(MultiplierKind::exact, cfg).size() == 64 * 48);
  CHECK(enumerate_sites(MultiplierKind::tmr_exact, cfg).size() == 64 * 80);
  CHECK(enumerate_sites(MultiplierKind::mitchell, cfg).size() == 64 * 80);
  CHECK(enumerate_sites(MultiplierKind::adam, cfg).size() == 64 * 91);
  CHECK(enumerate_sites(MultiplierKind::adam, cfg, {.include_accumulator = false}).size() == 64 * 59);

  const auto sites = enumerate_sites(MultiplierKind::adam, ArrayConfig{2, 2});
  std::set<std::string> names;
  for (const auto& s : sites) names.insert(s.path(MultiplierKind::adam));
  CHECK(names.size() == sites.size());
  CHECK(sites.front().path(MultiplierKind::adam) == "mac[0][0]/adam/shifted_operand_a[0]");
  CHECK(sites.front().shared);
  CHECK(sites.back().path(MultiplierKind::adam) == "mac[1][1]/adam/accumulator[31]");
  // MAC-major, then catalog order, then bit.
  CHECK(sites[91].row == 0);
  CHECK(sites[91].col == 1);
  const auto dup = std::find_if(sites.begin(), sites.end(),
                                [](const FaultSite& s) { return s.signal == Signal::frac_sum_duplicate; });
  REQUIRE(dup != sites.end());
  CHECK(dup->bit == 4);
  CHECK_FALSE(dup->shared);

  CHECK_THROWS_AS(enumerate_sites(MultiplierKind::exact, ArrayConfig{0, 8}), Error);
}

TEST_CASE("sample size") {
  CHECK(sample_size(std::nullopt) == 9604);
  // Finite-population correction with the exact quantile; the rounded
  // t = 1.96 figure would give one more.
  CHECK(sample_size(1'000'000) == 9513);
  CHECK(sample_size(100, 0.95, 0.5, 0.5) <= 100);
  CHECK(sample_size(10) <= 10);
  CHECK(sample_size(std::nullopt, 0.99, 0.01, 0.5) == 16588);
  CHECK_THROWS_AS(sample_size(std::nullopt, 1.0), Error);
  CHECK_THROWS_AS(sample_size(std::nullopt, 0.95, 0.0), Error);
  CHECK_THROWS_AS(sample_size(std::nullopt, 0.95, 0.01, 1.0), Error);
  CHECK_THROWS_AS(sample_size(0), Error);
}

TEST_CASE("rng bounded draws") {
  CampaignRng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.below(7);
    CHECK(x < 7);
    CHECK(x == b.below(7));
  }
  CHECK_THROWS_AS(a.below(0), Error);
  // First raw output of mt19937_64 with default seed is fixed by the standard.
  CampaignRng d(5489);
  CHECK(d.below(std::uint64_t{1} << 63) == (14514284786278117030ull % (std::uint64_t{1} << 63)));
}

TEST_CASE("events are deterministic per seed") {
  const auto sites = enumerate_sites(MultiplierKind::adam, ArrayConfig{});
  const Campaign c{.seed = 9, .n_injections = 500};
  const auto e1 = draw_events(c, sites, {0, 1000});
  const auto e2 = draw_events(c, sites, {0, 1000});
  CHECK(e1 == e2);
  const Campaign c2{.seed = 10, .n_injections = 500};
  CHECK(draw_events(c2, sites, {0, 1000}) != e1);
  for (const auto& e : e1) {
    CHECK(e.cycle < 1000);
  }
}

TEST_CASE("golden event fixture") {
  const auto sites = enumerate_sites(MultiplierKind::adam, ArrayConfig{}, {.include_accumulator = false});
  const auto ev = draw_events({.seed = 1, .n_injections = 3}, sites, {0, 10000});
  REQUIRE(ev.size() == 3);
  CHECK(ev[0].site.path(MultiplierKind::adam) == "mac[7][3]/adam/frac_sum_primary[1]");
  CHECK(ev[0].cycle == 2462);
  CHECK(ev[1].site.path(MultiplierKind::adam) == "mac[4][0]/adam/antilog_out[15]");
  CHECK(ev[1].cycle == 5246);
  CHECK(ev[2].site.path(MultiplierKind::adam) == "mac[4][6]/adam/antilog_out[11]");
  CHECK(ev[2].cycle == 6409);
}

TEST_CASE("site draws are uniform") {
  const auto sites = enumerate_sites(MultiplierKind::mitchell, ArrayConfig{2, 2});
  const std::uint64_t n = 10 * sites.size() * 10;
  const auto ev = draw_events({.seed = 3, .n_injections = n}, sites, {0, 1});
  std::map<std::string, std::uint64_t> hist;
  for (const auto& e : ev) ++hist[e.site.path(MultiplierKind::mitchell)];
  REQUIRE(hist.size() == sites.size());
  const double expected = static_cast<double>(n) / static_cast<double>(sites.size());
  double chi2 = 0;
  for (const auto& [k, v] : hist) chi2 += (static_cast<double>(v) - expected) * (static_cast<double>(v) - expected) / expected;
  const boost::math::chi_squared_distribution<double> dist(static_cast<double>(sites.size() - 1));
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

TEST_CASE("bad draw inputs") {
  const auto sites = enumerate_sites(MultiplierKind::exact, ArrayConfig{1, 1});
  CHECK_THROWS_AS(draw_events({.n_injections = 1}, sites, {5, 5}), Error);
  CHECK_THROWS_AS(draw_events({.n_injections = 1}, {}, {0, 5}), Error);
}

TEST_CASE("scope names") {
  for (auto s : {CampaignScope::single_multiply, CampaignScope::gemm, CampaignScope::dnn_inference})
    CHECK(parse_scope(to_string(s)) == s);
  CHECK_FALSE(parse_scope("rtl"));
}
