#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "adam/fault_engine.hpp"
#include "adam/nn.hpp"

namespace adam {

struct CampaignConfig {
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> n_injections;  // empty: use the required sample size
  bool enforce_confidence = true;
  double confidence = 0.95;
  double margin = 0.01;
  double p = 0.5;
  bool include_accumulator = false;  // accumulators are outside the multiplier under test
  CampaignScope scope = CampaignScope::dnn_inference;
  ArrayConfig array;
  GemmDims gemm_dims{16, 16, 16};  // gemm scope
  std::size_t images = 1000;       // dnn scope: leading slice of the dataset

  /// Injections to run: the configured count, or the infinite-population
  /// sample size. Throws when enforcement is on and the count is too small.
  std::uint64_t resolved_injections() const;
  std::uint64_t required_sample_size() const;
};

struct InjectionRecord {
  std::uint64_t run_id = 0;
  FaultEvent event;
  bool detected = false;
  nn::SdcRecord sdc;  // for non-DNN scopes only sdc1 is used, meaning "output differs"
  int golden_top1 = -1;
  int faulty_top1 = -1;
  std::size_t image = 0;
  bool output_changed = false;
};

struct CampaignSummary {
  MultiplierKind kind = MultiplierKind::exact;
  CampaignScope scope = CampaignScope::dnn_inference;
  std::uint64_t n_injections = 0;
  std::uint64_t required_sample_size = 0;
  std::uint64_t finite_population_sample_size = 0;
  std::size_t site_count = 0;
  std::uint64_t cycles = 0;
  std::uint64_t sdc1 = 0, sdc5 = 0, sdc10 = 0, sdc20 = 0;
  std::uint64_t detected = 0;
  std::uint64_t detected_and_sdc1 = 0;
  std::uint64_t output_changed = 0;

  double rate(std::uint64_t count) const {
    return n_injections ? 100.0 * static_cast<double>(count) / static_cast<double>(n_injections) : 0.0;
  }
  nlohmann::json to_json() const;
};

struct CampaignResult {
  CampaignSummary summary;
  std::vector<InjectionRecord> records;
};

/// One injection per run, each on image (run_id mod images). Runs are
/// independent and execute in parallel; records come back in run order.
CampaignResult run_dnn_campaign(const nn::ModelGraph& model, const nn::Dataset& data, MultiplierKind kind,
                                const CampaignConfig& cfg);

/// One fixed random GEMM of cfg.gemm_dims, one fault per run.
CampaignResult run_gemm_campaign(MultiplierKind kind, const CampaignConfig& cfg);

/// A fresh random operand pair per run on a single MAC unit.
CampaignResult run_multiply_campaign(MultiplierKind kind, const CampaignConfig& cfg);

/// CSV with columns run_id, site, cycle, detected, sdc_class, golden_top1,
/// faulty_top1. Top-1 columns are empty outside DNN campaigns.
std::string records_csv(const CampaignResult& result);

}  // namespace adam
