#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "adam/fault_site.hpp"
#include "adam/multiplier.hpp"
#include "adam/systolic.hpp"

namespace adam {

struct SiteOptions {
  bool include_accumulator = true;
};

/// All fault sites of an array, ordered by MAC unit (row-major), then by the
/// kind's signal catalog order, then by ascending bit.
std::vector<FaultSite> enumerate_sites(MultiplierKind kind, const ArrayConfig& cfg, SiteOptions opts = {});

/// Statistical fault-injection sample size
///   n = N / (1 + e^2 (N - 1) / (t^2 p (1 - p)))
/// rounded up, with t the two-sided standard normal quantile for the given
/// confidence. An empty population means infinite: n = t^2 p (1 - p) / e^2.
std::uint64_t sample_size(std::optional<std::uint64_t> population, double confidence = 0.95,
                          double margin = 0.01, double p = 0.5);

/// Campaign random source: std::mt19937_64 (fully specified by the C++
/// standard) with bounded draws by rejection of the low 2^64 mod n values,
/// so event lists reproduce on any conforming implementation.
class CampaignRng {
 public:
  explicit CampaignRng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

enum class CampaignScope : std::uint8_t { single_multiply, gemm, dnn_inference };

std::string_view to_string(CampaignScope s);
std::optional<CampaignScope> parse_scope(std::string_view s);

struct Campaign {
  std::uint64_t seed = 1;
  std::uint64_t n_injections = 0;
  CampaignScope scope = CampaignScope::dnn_inference;
  MultiplierKind kind = MultiplierKind::adam;
};

struct CycleRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;  // exclusive
};

/// n_injections events, each a uniform site followed by a uniform cycle.
std::vector<FaultEvent> draw_events(const Campaign& campaign, std::span<const FaultSite> sites, CycleRange cycles);

}  // namespace adam
