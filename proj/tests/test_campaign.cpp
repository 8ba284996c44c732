#include <doctest.h>

#include <filesystem>

#include "adam/campaign.hpp"
#include "adam/config.hpp"
#include "adam/error.hpp"
#include "adam/reports.hpp"

using namespace adam;
namespace fs = std::filesystem;

namespace {

const fs::path kData = ADAM_DATA_DIR;

std::string error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

CampaignConfig smoke(CampaignScope scope, std::uint64_t n) {
  CampaignConfig c;
  c.scope = scope;
  c.n_injections = n;
  c.enforce_confidence = false;
  c.images = 20;
  return c;
}

}  // namespace

TEST_CASE("injection count resolution") {
  CampaignConfig c;
  CHECK(c.resolved_injections() == 9604);
  c.n_injections = 20000;
  CHECK(c.resolved_injections() == 20000);
  c.n_injections = 1000;
  CHECK(error_code([&] { (void)c.resolved_injections(); }) == "invalid_config");
  c.enforce_confidence = false;
  CHECK(c.resolved_injections() == 1000);
  c.margin = 0.05;
  CHECK(c.required_sample_size() == 385);
}

TEST_CASE("dnn campaign is deterministic and TMR is immune") {
  const auto model = nn::load_model(kData / "lenet5_int8.json");
  const auto data =
      nn::load_idx(kData / "mnist-holdout-images.idx3-ubyte", kData / "mnist-holdout-labels.idx1-ubyte", 20);
  const auto cfg = smoke(CampaignScope::dnn_inference, 300);
  const auto a = run_dnn_campaign(model, data, MultiplierKind::adam, cfg);
  const auto b = run_dnn_campaign(model, data, MultiplierKind::adam, cfg);
  CHECK(records_csv(a) == records_csv(b));
  CHECK(a.records.size() == 300);
  CHECK(a.summary.site_count == 64 * 59);
  CHECK(a.summary.required_sample_size == 9604);
  for (const auto& r : a.records) {
    REQUIRE(r.image == r.run_id % 20);
    REQUIRE(r.golden_top1 >= 0);
  }
  const auto csv = records_csv(a);
  CHECK(csv.rfind("run_id,site,cycle,detected,sdc_class,golden_top1,faulty_top1\n", 0) == 0);

  const auto t = run_dnn_campaign(model, data, MultiplierKind::tmr_exact, cfg);
  CHECK(t.summary.sdc1 == 0);
  CHECK(t.summary.sdc5 == 0);
  CHECK(t.summary.output_changed == 0);
  CHECK(t.summary.site_count == 64 * 48);

  auto other = cfg;
  other.seed = 2;
  CHECK(records_csv(run_dnn_campaign(model, data, MultiplierKind::adam, other)) != csv);

  auto none = cfg;
  none.images = 0;
  CHECK(error_code([&] { run_dnn_campaign(model, data, MultiplierKind::adam, none); }) == "invalid_config");
}

TEST_CASE("gemm and multiply scopes") {
  const auto g = run_gemm_campaign(MultiplierKind::exact, smoke(CampaignScope::gemm, 500));
  CHECK(g.records.size() == 500);
  CHECK(g.summary.sdc1 > 0);
  const auto t = run_gemm_campaign(MultiplierKind::tmr_exact, smoke(CampaignScope::gemm, 500));
  CHECK(t.summary.sdc1 == 0);
  const auto m = run_multiply_campaign(MultiplierKind::adam, smoke(CampaignScope::single_multiply, 500));
  CHECK(m.records.size() == 500);
  CHECK(m.summary.detected > 0);
  CHECK(records_csv(m) == records_csv(run_multiply_campaign(MultiplierKind::adam, smoke(CampaignScope::single_multiply, 500))));
}

TEST_CASE("hardware constants and derived reductions") {
  CHECK(hw_constants().size() == 7);
  const auto& exact = hw_row("Exact (Wallace)");
  CHECK(exact.area_um2 == 417);
  CHECK(exact.pdp_pj == 306);
  const auto& adam = hw_row("AdAM");
  CHECK(adam.area_um2 == 152);
  CHECK(adam.pdp_pj == 186.45);
  CHECK(adam.fault_tolerant);
  CHECK(error_code([] { hw_row("Booth"); }) == "unknown_row");

  const auto t = compute_tradeoff();
  CHECK(t.area_reduction_percent == doctest::Approx(100.0 * (417.0 - 152.0) / 417.0));
  CHECK(t.pdp_reduction_percent == doctest::Approx(100.0 * (306.0 - 186.45) / 306.0));
  CHECK(t.area_matches);
  CHECK(t.pdp_matches);
  CHECK(pdp_for(MultiplierKind::tmr_exact) == 945.0);
  CHECK_FALSE(pdp_for(MultiplierKind::mitchell));
  CHECK(tradeoff_reference_points().size() == 8);
}

TEST_CASE("report headers carry the run config") {
  RunConfig run{.command = "mare", .seed = 4, .kinds = {MultiplierKind::adam}, .out_dir = "x"};
  const auto line = run.comment_line();
  CHECK(line.rfind("# {", 0) == 0);
  CHECK(line.back() == '\n');
  const auto j = nlohmann::json::parse(line.substr(2));
  CHECK(j["run_config"]["seed"] == 4);
  CHECK(j["version"] == kToolkitVersion);
  const auto h = with_header(run, {{"answer", 1}});
  CHECK(h["answer"] == 1);
  CHECK(h["run_config"]["command"] == "mare");
}

TEST_CASE("config parsing") {
  const auto c = parse_config(nlohmann::json::parse(R"({
    "seed": 5, "kinds": ["adam", "exact", "adam"], "threads": 2,
    "array": {"rows": 4, "cols": 4},
    "campaign": {"scope": "gemm", "n_injections": 10000, "gemm_dims": [3, 4, 5]},
    "model": "m.json",
    "dataset": {"images": "i", "labels": "l", "limit": 7}
  })"),
                              "/base");
  CHECK(c.seed == 5u);
  CHECK(c.kinds == std::vector{MultiplierKind::adam, MultiplierKind::exact});
  CHECK(c.threads == 2);
  CHECK(c.campaign.array.rows == 4);
  CHECK(c.campaign.scope == CampaignScope::gemm);
  CHECK(c.campaign.gemm_dims.k == 5);
  CHECK(c.model == fs::path("/base/m.json"));
  CHECK(c.dataset->limit == 7);
  CHECK(to_json(c.campaign)["resolved_injections"] == 10000);

  auto bad = [](const char* s) {
    return error_code([&] { parse_config(nlohmann::json::parse(s)); });
  };
  CHECK(bad(R"({"sede": 1})") == "invalid_config");
  CHECK(bad(R"({"kinds": ["booth"]})") == "invalid_config");
  CHECK(bad(R"({"campaign": {"margin": 0}})") == "invalid_config");
  CHECK(bad(R"({"campaign": {"scope": "rtl"}})") == "invalid_config");
  CHECK(bad(R"({"array": {"rows": 0}})") == "invalid_config");
  CHECK(bad(R"({"array": {"accumulator_width": 16}})") == "invalid_config");
  CHECK(bad(R"({"dataset": {"images": "x"}})") == "invalid_config");
  CHECK(bad(R"({"seed": -1})") == "invalid_config");

  CHECK(parse_kinds("exact,adam") == std::vector{MultiplierKind::exact, MultiplierKind::adam});
  CHECK(error_code([] { parse_kinds("exact,foo"); }) == "unknown_kind");
  CHECK(error_code([] { parse_kinds(""); }) == "unknown_kind");
}

TEST_CASE("hardware table is pinned") {
  struct Row {
    const char* name;
    double delay, power, area, mare;
    bool ft;
    double pdp;
  };
  const Row want[] = {
      {"Exact (Wallace)", 0.85, 360, 417, 0.00, false, 306}, {"DRUM(3)", 0.70, 104, 143, 12.6, false, 72.8},
      {"TOSAM(0,3)", 0.68, 144, 198, 7.7, false, 97.9},      {"DRUM(4)", 1.00, 172, 208, 6.4, false, 172},
      {"TOSAM(1,5)", 0.88, 231, 291, 4.1, false, 203.2},     {"ScaleTrim(4,8)", 1.8, 143, 216, 3.3, false, 257.4},
      {"AdAM", 1.13, 165, 152, 4.7, true, 186.45},
  };
  const auto rows = hw_constants();
  REQUIRE(rows.size() == std::size(want));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].name == want[i].name);
    CHECK(rows[i].delay_ns == want[i].delay);
    CHECK(rows[i].power_uw == want[i].power);
    CHECK(rows[i].area_um2 == want[i].area);
    CHECK(rows[i].mare_percent == want[i].mare);
    CHECK(rows[i].fault_tolerant == want[i].ft);
    CHECK(rows[i].pdp_pj == want[i].pdp);
  }
  CHECK(kScatterAdamPdp == 183.06);
  const auto j = tradeoff_report_json(compute_tradeoff(), {});
  CHECK(j["footnotes"][0].get<std::string>().find("183.06") != std::string::npos);
  const auto dat = tradeoff_dat(std::vector<MeasuredPoint>{{MultiplierKind::mitchell, 0.5}});
  CHECK(dat.find("measured fixture mitchell ? 0.500000") != std::string::npos);
}
