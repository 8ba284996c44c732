#include "adam/campaign.hpp"

#include <omp.h>

#include "adam/error.hpp"

namespace adam {

namespace {

// Operand streams are seeded apart from the event stream so the fault list
// depends only on (seed, sites, cycles).
constexpr std::uint64_t kOperandStream = 0x9E3779B97F4A7C15ull;

void tally(CampaignSummary& s, const InjectionRecord& r) {
  s.sdc1 += r.sdc.sdc1;
  s.sdc5 += r.sdc.sdc5;
  s.sdc10 += r.sdc.sdc10;
  s.sdc20 += r.sdc.sdc20;
  s.detected += r.detected;
  s.detected_and_sdc1 += r.detected && r.sdc.sdc1;
  s.output_changed += r.output_changed;
}

CampaignSummary base_summary(MultiplierKind kind, const CampaignConfig& cfg, std::size_t sites, std::uint64_t cycles) {
  CampaignSummary s;
  s.kind = kind;
  s.scope = cfg.scope;
  s.n_injections = cfg.resolved_injections();
  s.required_sample_size = cfg.required_sample_size();
  s.finite_population_sample_size =
      sample_size(std::uint64_t{sites} * cycles, cfg.confidence, cfg.margin, cfg.p);
  s.site_count = sites;
  s.cycles = cycles;
  return s;
}

std::int16_t random_int8(CampaignRng& rng) { return static_cast<std::int16_t>(static_cast<int>(rng.below(255)) - 127); }

}  // namespace

std::uint64_t CampaignConfig::required_sample_size() const {
  return sample_size(std::nullopt, confidence, margin, p);
}

std::uint64_t CampaignConfig::resolved_injections() const {
  const auto need = required_sample_size();
  if (!n_injections) return need;
  if (*n_injections == 0) throw Error("invalid_config", "n_injections must be positive");
  if (enforce_confidence && *n_injections < need)
    throw Error("invalid_config", "n_injections " + std::to_string(*n_injections) + " is below the required sample size " +
                                      std::to_string(need) + " (set enforce_confidence to false for smoke runs)");
  return *n_injections;
}

nlohmann::json CampaignSummary::to_json() const {
  return {{"kind", to_string(kind)},
          {"scope", to_string(scope)},
          {"n_injections", n_injections},
          {"required_sample_size", required_sample_size},
          {"finite_population_sample_size", finite_population_sample_size},
          {"site_count", site_count},
          {"cycles", cycles},
          {"counts", {{"SDC-1", sdc1}, {"SDC-5", sdc5}, {"SDC-10%", sdc10}, {"SDC-20%", sdc20}, {"detected", detected}}},
          {"vulnerability_percent",
           {{"SDC-1", rate(sdc1)}, {"SDC-5", rate(sdc5)}, {"SDC-10%", rate(sdc10)}, {"SDC-20%", rate(sdc20)}}},
          {"detection_coverage_percent", rate(detected)},
          {"detected_but_sdc1", detected_and_sdc1},
          {"output_changed", output_changed}};
}

CampaignResult run_dnn_campaign(const nn::ModelGraph& model, const nn::Dataset& data, MultiplierKind kind,
                                const CampaignConfig& cfg) {
  const std::size_t n_images = std::min(cfg.images, data.size());
  if (n_images == 0) throw Error("invalid_config", "campaign needs at least one image");
  const auto sites = enumerate_sites(kind, cfg.array, {cfg.include_accumulator});
  const auto sched = nn::model_schedule(model, cfg.array);
  CampaignResult res;
  res.summary = base_summary(kind, cfg, sites.size(), sched.total_cycles);
  const auto events =
      draw_events({cfg.seed, res.summary.n_injections, cfg.scope, kind}, sites, {0, sched.total_cycles});

  std::vector<nn::GoldenTrace> traces(n_images);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_images); ++i)
    traces[i] = nn::trace_inference(model, nn::quantize_input(model, data.image(i)), kind, cfg.array);

  res.records.resize(events.size());
  const auto n = static_cast<std::ptrdiff_t>(events.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& rec = res.records[i];
    rec.run_id = static_cast<std::uint64_t>(i);
    rec.event = events[i];
    rec.image = static_cast<std::size_t>(i) % n_images;
    const auto& golden = traces[rec.image].result.probabilities;
    const auto out = nn::infer_from_trace(model, traces[rec.image], kind, events[i], cfg.array);
    rec.detected = out.detected;
    rec.sdc = nn::classify_sdc(golden, out.probabilities);
    rec.sdc.run_id = rec.run_id;
    rec.sdc.detected = out.detected;
    rec.golden_top1 = static_cast<int>(nn::rank_classes(golden)[0]);
    rec.faulty_top1 = static_cast<int>(nn::rank_classes(out.probabilities)[0]);
    rec.output_changed = out.probabilities != golden;
  }
  for (const auto& r : res.records) tally(res.summary, r);
  return res;
}

CampaignResult run_gemm_campaign(MultiplierKind kind, const CampaignConfig& cfg) {
  const auto& d = cfg.gemm_dims;
  if (d.m == 0 || d.n == 0 || d.k == 0) throw Error("invalid_config", "gemm dims must be positive");
  CampaignRng operands(cfg.seed ^ kOperandStream);
  Matrix<std::int16_t> a(d.m, d.k), b(d.k, d.n);
  for (auto& v : a.data()) v = random_int8(operands);
  for (auto& v : b.data()) v = random_int8(operands);

  const auto sites = enumerate_sites(kind, cfg.array, {cfg.include_accumulator});
  const auto cycles = schedule(d, cfg.array).cycles();
  CampaignResult res;
  res.summary = base_summary(kind, cfg, sites.size(), cycles);
  const auto events = draw_events({cfg.seed, res.summary.n_injections, cfg.scope, kind}, sites, {0, cycles});
  const auto golden = gemm(a, b, cfg.array, kind).out;

  res.records.resize(events.size());
  const auto n = static_cast<std::ptrdiff_t>(events.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& rec = res.records[i];
    rec.run_id = static_cast<std::uint64_t>(i);
    rec.event = events[i];
    const auto out = gemm(a, b, cfg.array, kind, std::span(&events[i], 1));
    rec.detected = out.detected;
    rec.sdc.run_id = rec.run_id;
    rec.sdc.detected = out.detected;
    rec.sdc.sdc1 = out.out != golden;
    rec.output_changed = rec.sdc.sdc1;
  }
  for (const auto& r : res.records) tally(res.summary, r);
  return res;
}

CampaignResult run_multiply_campaign(MultiplierKind kind, const CampaignConfig& cfg) {
  const ArrayConfig unit{1, 1};
  const auto sites = enumerate_sites(kind, unit, {cfg.include_accumulator});
  CampaignResult res;
  res.summary = base_summary(kind, cfg, sites.size(), 1);
  const auto events = draw_events({cfg.seed, res.summary.n_injections, cfg.scope, kind}, sites, {0, 1});

  CampaignRng operands(cfg.seed ^ kOperandStream);
  std::vector<std::pair<std::int16_t, std::int16_t>> pairs(events.size());
  for (auto& pr : pairs) {
    pr.first = static_cast<std::int16_t>(operands.below(256));
    pr.second = static_cast<std::int16_t>(operands.below(256));
  }

  res.records.resize(events.size());
  const auto n = static_cast<std::ptrdiff_t>(events.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Matrix<std::int16_t> a(1, 1, pairs[i].first), b(1, 1, pairs[i].second);
    const auto golden = gemm(a, b, unit, kind).out;
    const auto out = gemm(a, b, unit, kind, std::span(&events[i], 1));
    auto& rec = res.records[i];
    rec.run_id = static_cast<std::uint64_t>(i);
    rec.event = events[i];
    rec.detected = out.detected;
    rec.sdc.run_id = rec.run_id;
    rec.sdc.detected = out.detected;
    rec.sdc.sdc1 = out.out != golden;
    rec.output_changed = rec.sdc.sdc1;
  }
  for (const auto& r : res.records) tally(res.summary, r);
  return res;
}

std::string records_csv(const CampaignResult& result) {
  const bool dnn = result.summary.scope == CampaignScope::dnn_inference;
  std::string out = "run_id,site,cycle,detected,sdc_class,golden_top1,faulty_top1\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.run_id);
    out += ',';
    out += r.event.site.path(result.summary.kind);
    out += ',';
    out += std::to_string(r.event.cycle);
    out += r.detected ? ",1," : ",0,";
    out += dnn ? r.sdc.label() : (r.sdc.sdc1 ? "mismatch" : "none");
    out += ',';
    if (dnn) out += std::to_string(r.golden_top1) + ',' + std::to_string(r.faulty_top1);
    else out += ',';
    out += '\n';
  }
  return out;
}

}  // namespace adam
