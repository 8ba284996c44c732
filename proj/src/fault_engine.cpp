#include "adam/fault_engine.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "adam/error.hpp"

namespace adam {

std::string FaultSite::path(MultiplierKind kind) const {
  std::string s = "mac[" + std::to_string(row) + "][" + std::to_string(col) + "]/";
  s += to_string(kind);
  s += '/';
  s += to_string(signal);
  s += '[' + std::to_string(bit) + ']';
  return s;
}

std::vector<FaultSite> enumerate_sites(MultiplierKind kind, const ArrayConfig& cfg, SiteOptions opts) {
  cfg.validate();
  const auto catalog = signal_catalog(kind);
  std::vector<FaultSite> sites;
  sites.reserve(std::size_t{cfg.rows} * cfg.cols * unit_site_count(kind, opts.include_accumulator));
  for (std::uint32_t r = 0; r < cfg.rows; ++r)
    for (std::uint32_t c = 0; c < cfg.cols; ++c)
      for (const auto& spec : catalog) {
        if (!opts.include_accumulator && spec.signal == Signal::accumulator) continue;
        for (std::uint8_t b = 0; b < spec.width; ++b)
          sites.push_back({r, c, spec.signal, static_cast<std::uint8_t>(spec.first_bit + b), spec.shared});
      }
  return sites;
}

std::uint64_t sample_size(std::optional<std::uint64_t> population, double confidence, double margin, double p) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error("invalid_argument", "confidence must be in (0, 1)");
  if (!(margin > 0.0 && margin < 1.0)) throw Error("invalid_argument", "margin must be in (0, 1)");
  if (!(p > 0.0 && p < 1.0)) throw Error("invalid_argument", "p must be in (0, 1)");
  if (population && *population == 0) throw Error("invalid_argument", "population must be positive");

  const boost::math::normal_distribution<double> std_normal;
  const double t = boost::math::quantile(std_normal, 1.0 - (1.0 - confidence) / 2.0);
  const double pq = t * t * p * (1.0 - p);
  if (!population) return static_cast<std::uint64_t>(std::ceil(pq / (margin * margin)));

  const double n_pop = static_cast<double>(*population);
  const double n = n_pop / (1.0 + margin * margin * (n_pop - 1.0) / pq);
  const auto out = static_cast<std::uint64_t>(std::ceil(n));
  return out > *population ? *population : out;
}

std::uint64_t CampaignRng::below(std::uint64_t n) {
  if (n == 0) throw Error("invalid_argument", "CampaignRng::below(0)");
  const std::uint64_t threshold = (std::uint64_t{0} - n) % n;  // 2^64 mod n
  std::uint64_t x;
  do {
    x = engine_();
  } while (x < threshold);
  return x % n;
}

std::string_view to_string(CampaignScope s) {
  switch (s) {
    case CampaignScope::single_multiply: return "single_multiply";
    case CampaignScope::gemm: return "gemm";
    case CampaignScope::dnn_inference: return "dnn_inference";
  }
  return "?";
}

std::optional<CampaignScope> parse_scope(std::string_view s) {
  for (auto c : {CampaignScope::single_multiply, CampaignScope::gemm, CampaignScope::dnn_inference})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::vector<FaultEvent> draw_events(const Campaign& campaign, std::span<const FaultSite> sites, CycleRange cycles) {
  if (sites.empty()) throw Error("invalid_argument", "draw_events: empty site list");
  if (cycles.end <= cycles.begin) throw Error("invalid_argument", "draw_events: empty cycle range");
  CampaignRng rng(campaign.seed);
  std::vector<FaultEvent> events;
  events.reserve(campaign.n_injections);
  for (std::uint64_t i = 0; i < campaign.n_injections; ++i) {
    const auto& site = sites[rng.below(sites.size())];
    const auto cycle = cycles.begin + rng.below(cycles.end - cycles.begin);
    events.push_back({site, cycle});
  }
  return events;
}

}  // namespace adam
