// adamsim: command-line driver for the multiplier toolkit.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "adam/campaign.hpp"
#include "adam/config.hpp"
#include "adam/error.hpp"
#include "adam/error_stats.hpp"
#include "adam/fault_engine.hpp"
#include "adam/kernels.hpp"
#include "adam/nn.hpp"
#include "adam/reports.hpp"

#ifndef ADAM_DATA_DIR
#define ADAM_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct UsageError : adam::Error {
  using adam::Error::Error;
};

struct Common {
  std::optional<std::uint64_t> seed;
  std::string kinds;
  std::string config;
  std::string out = "out";
  std::optional<int> threads;
};

struct Resolved {
  adam::ToolConfig cfg;
  adam::RunConfig run;
  fs::path out;
};

Resolved resolve(const Common& c, std::string command, std::vector<adam::MultiplierKind> default_kinds) {
  Resolved r;
  if (!c.config.empty()) {
    r.cfg = adam::load_config(c.config);
    r.run.config_path = c.config;
  }
  if (c.seed) r.cfg.seed = c.seed;
  if (!c.kinds.empty()) r.cfg.kinds = adam::parse_kinds(c.kinds);
  if (c.threads) r.cfg.threads = c.threads;
  if (r.cfg.kinds.empty()) r.cfg.kinds = std::move(default_kinds);
  r.cfg.campaign.seed = r.cfg.seed.value_or(1);
  if (r.cfg.threads && *r.cfg.threads < 0) throw UsageError("invalid_argument", "--threads must be >= 0");
  if (r.cfg.threads && *r.cfg.threads > 0) adam::kernels::omp::set_threads(*r.cfg.threads);

  r.run.command = std::move(command);
  r.run.seed = r.cfg.campaign.seed;
  r.run.kinds = r.cfg.kinds;
  r.run.out_dir = c.out;
  r.run.threads = r.cfg.threads.value_or(0);
  r.out = c.out;
  fs::create_directories(r.out);
  return r;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw adam::Error("io", "cannot write " + p.string());
  f << text;
  if (!f) throw adam::Error("io", "write failed for " + p.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path model_path(const adam::ToolConfig& cfg) {
  return cfg.model.value_or(fs::path(ADAM_DATA_DIR) / "lenet5_int8.json");
}

adam::DatasetPaths dataset_paths(const adam::ToolConfig& cfg) {
  if (cfg.dataset) return *cfg.dataset;
  return {fs::path(ADAM_DATA_DIR) / "mnist-holdout-images.idx3-ubyte",
          fs::path(ADAM_DATA_DIR) / "mnist-holdout-labels.idx1-ubyte", 0};
}

int cmd_mare(const Common& c) {
  auto r = resolve(c, "mare", {adam::MultiplierKind::exact, adam::MultiplierKind::adam});
  std::vector<adam::ErrorStats> stats;
  for (auto k : r.cfg.kinds) stats.push_back(adam::mare_exhaustive(k));
  write_file(r.out / "mare.csv", r.run.comment_line() + adam::mare_report_csv(stats));
  const auto report = adam::with_header(r.run, adam::mare_report_json(stats));
  write_file(r.out / "mare.json", dump(report));
  json brief = json::object();
  for (const auto& s : stats) brief[std::string(adam::to_string(s.kind))] = s.overall.mare_percent;
  std::cout << json{{"mare_percent", brief}}.dump() << "\n";
  return 0;
}

std::vector<adam::MeasuredPoint> measured_from(const std::string& summary_file) {
  std::vector<adam::MeasuredPoint> pts;
  if (summary_file.empty()) return pts;
  std::ifstream in(summary_file);
  if (!in) throw adam::Error("io", "cannot open " + summary_file);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("invalid_summary", summary_file + ": " + e.what());
  }
  if (!j.contains("summaries") || !j["summaries"].is_array())
    throw UsageError("invalid_summary", summary_file + ": expected an inject summary with a 'summaries' array");
  for (const auto& s : j["summaries"]) {
    const auto kind = adam::parse_kind(s.at("kind").get<std::string>());
    if (!kind) throw UsageError("invalid_summary", "unknown kind in summary");
    pts.push_back({*kind, s.at("vulnerability_percent").at("SDC-5").get<double>()});
  }
  return pts;
}

int cmd_tradeoff(const Common& c, const std::string& summary_file) {
  auto r = resolve(c, "tradeoff", {});
  const auto measured = measured_from(summary_file);
  r.run.settings["summary"] = summary_file.empty() ? json(nullptr) : json(summary_file);
  const auto t = adam::compute_tradeoff();
  write_file(r.out / "tradeoff.json", dump(adam::with_header(r.run, adam::tradeoff_report_json(t, measured))));
  write_file(r.out / "tradeoff.dat", r.run.comment_line() + adam::tradeoff_dat(measured));
  std::cout << json{{"area_reduction_percent", t.area_reduction_percent},
                    {"pdp_reduction_percent", t.pdp_reduction_percent},
                    {"area_matches", t.area_matches},
                    {"pdp_matches", t.pdp_matches}}
                   .dump()
            << "\n";
  return t.area_matches && t.pdp_matches ? 0 : 1;
}

int cmd_inject(const Common& c) {
  auto r = resolve(c, "inject", {std::begin(adam::kAllKinds), std::end(adam::kAllKinds)});
  auto& cc = r.cfg.campaign;
  r.run.settings["campaign"] = adam::to_json(cc);

  std::optional<adam::nn::ModelGraph> model;
  std::optional<adam::nn::Dataset> data;
  if (cc.scope == adam::CampaignScope::dnn_inference) {
    const auto mp = model_path(r.cfg);
    const auto dp = dataset_paths(r.cfg);
    model = adam::nn::load_model(mp);
    data = adam::nn::load_idx(dp.images, dp.labels, dp.limit);
    r.run.settings["model"] = mp.string();
    r.run.settings["dataset"] = {{"images", dp.images.string()}, {"labels", dp.labels.string()}, {"limit", dp.limit}};
  }

  std::vector<adam::CampaignSummary> summaries;
  for (auto k : r.cfg.kinds) {
    adam::CampaignResult res;
    switch (cc.scope) {
      case adam::CampaignScope::dnn_inference: res = adam::run_dnn_campaign(*model, *data, k, cc); break;
      case adam::CampaignScope::gemm: res = adam::run_gemm_campaign(k, cc); break;
      case adam::CampaignScope::single_multiply: res = adam::run_multiply_campaign(k, cc); break;
    }
    write_file(r.out / ("records_" + std::string(adam::to_string(k)) + ".csv"),
               r.run.comment_line() + adam::records_csv(res));
    summaries.push_back(res.summary);
  }

  json arr = json::array();
  std::vector<adam::MeasuredPoint> pts;
  for (const auto& s : summaries) {
    arr.push_back(s.to_json());
    pts.push_back({s.kind, s.rate(s.sdc5)});
  }
  write_file(r.out / "summary.json", dump(adam::with_header(r.run, {{"summaries", arr}})));
  write_file(r.out / "vulnerability.dat", r.run.comment_line() + adam::vulnerability_dat(summaries));
  if (cc.scope == adam::CampaignScope::dnn_inference)
    write_file(r.out / "tradeoff.dat", r.run.comment_line() + adam::tradeoff_dat(pts));

  json brief = json::object();
  for (const auto& s : summaries) brief[std::string(adam::to_string(s.kind))] = s.to_json()["vulnerability_percent"];
  std::cout << json{{"vulnerability_percent", brief}}.dump() << "\n";
  return 0;
}

int cmd_sample_size(std::optional<std::uint64_t> population, double confidence, double margin, double p) {
  std::uint64_t n = 0;
  try {
    n = adam::sample_size(population, confidence, margin, p);
  } catch (const adam::Error& e) {
    throw UsageError(e.code(), e.what());
  }
  std::cout << json{{"population", population ? json(*population) : json("infinite")},
                    {"confidence", confidence},
                    {"margin", margin},
                    {"p", p},
                    {"n", n}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_gemm(const Common& c, const std::vector<std::size_t>& dims, std::uint64_t faults) {
  auto r = resolve(c, "gemm", {std::begin(adam::kAllKinds), std::end(adam::kAllKinds)});
  if (dims.size() != 3 || dims[0] == 0 || dims[1] == 0 || dims[2] == 0)
    throw UsageError("invalid_argument", "--dims expects three positive integers m,n,k");
  const adam::GemmDims d{dims[0], dims[1], dims[2]};
  const auto& array = r.cfg.campaign.array;
  r.run.settings = {{"dims", dims}, {"faults", faults}, {"array", {{"rows", array.rows}, {"cols", array.cols}}}};

  adam::CampaignRng rng(r.run.seed);
  adam::Matrix<std::int8_t> a(d.m, d.k), b(d.k, d.n);
  for (auto& v : a.data()) v = static_cast<std::int8_t>(static_cast<int>(rng.below(256)) - 128);
  for (auto& v : b.data()) v = static_cast<std::int8_t>(static_cast<int>(rng.below(256)) - 128);
  const auto cycles = adam::schedule(d, array).cycles();
  const auto exact = adam::gemm(a, b, array, adam::MultiplierKind::exact).out;

  json arr = json::array();
  for (auto k : r.cfg.kinds) {
    std::vector<adam::FaultEvent> events;
    if (faults) {
      const auto sites = adam::enumerate_sites(k, array, {r.cfg.campaign.include_accumulator});
      events = adam::draw_events({r.run.seed, faults, adam::CampaignScope::gemm, k}, sites, {0, cycles});
    }
    const auto res = adam::gemm(a, b, array, k, events);
    std::string csv = r.run.comment_line() + "row,col,value,exact\n";
    std::int64_t max_abs = 0;
    double rel_sum = 0;
    std::size_t rel_n = 0;
    for (std::size_t i = 0; i < d.m; ++i)
      for (std::size_t j = 0; j < d.n; ++j) {
        const std::int32_t v = res.out(i, j);
        const std::int32_t e = exact(i, j);
        csv += std::to_string(i) + ',' + std::to_string(j) + ',' + std::to_string(v) + ',' + std::to_string(e) + '\n';
        max_abs = std::max<std::int64_t>(max_abs, std::abs(std::int64_t{v} - e));
        if (e != 0) {
          rel_sum += std::abs(static_cast<double>(v) - e) / std::abs(static_cast<double>(e));
          ++rel_n;
        }
      }
    write_file(r.out / ("gemm_" + std::string(adam::to_string(k)) + ".csv"), csv);
    arr.push_back({{"kind", std::string(adam::to_string(k))},
                   {"cycles", cycles},
                   {"max_abs_error", max_abs},
                   {"mean_relative_error_percent", rel_n ? 100.0 * rel_sum / static_cast<double>(rel_n) : 0.0},
                   {"detected", res.detected},
                   {"faults_applied", res.faults_applied},
                   {"faults_idle", res.faults_idle},
                   {"faults_inapplicable", res.faults_inapplicable}});
  }
  const json body{{"results", arr}};
  write_file(r.out / "gemm.json", dump(adam::with_header(r.run, body)));
  std::cout << body.dump() << "\n";
  return 0;
}

int cmd_dnn_eval(const Common& c) {
  auto r = resolve(c, "dnn-eval", {adam::MultiplierKind::exact, adam::MultiplierKind::adam});
  const auto mp = model_path(r.cfg);
  const auto dp = dataset_paths(r.cfg);
  const auto model = adam::nn::load_model(mp);
  const auto data = adam::nn::load_idx(dp.images, dp.labels, dp.limit);
  const auto& array = r.cfg.campaign.array;
  r.run.settings = {{"model", mp.string()},
                    {"dataset", {{"images", dp.images.string()}, {"labels", dp.labels.string()}, {"limit", dp.limit}}},
                    {"array", {{"rows", array.rows}, {"cols", array.cols}}}};

  std::vector<std::vector<std::uint8_t>> preds;
  json arr = json::array();
  for (auto k : r.cfg.kinds) {
    preds.push_back(adam::nn::predict(model, data, k, array));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) correct += preds.back()[i] == data.labels[i];
    arr.push_back({{"kind", std::string(adam::to_string(k))},
                   {"images", data.size()},
                   {"correct", correct},
                   {"accuracy_percent", 100.0 * static_cast<double>(correct) / static_cast<double>(data.size())}});
  }
  std::string csv = r.run.comment_line() + "image,label";
  for (auto k : r.cfg.kinds) csv += ",pred_" + std::string(adam::to_string(k));
  csv += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    csv += std::to_string(i) + ',' + std::to_string(data.labels[i]);
    for (const auto& p : preds) csv += ',' + std::to_string(p[i]);
    csv += '\n';
  }
  write_file(r.out / "predictions.csv", csv);
  const json body{{"model", model.name}, {"results", arr}};
  write_file(r.out / "dnn_eval.json", dump(adam::with_header(r.run, body)));
  std::cout << body.dump() << "\n";
  return 0;
}

void report_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AdAM multiplier toolkit"};
  app.set_version_flag("--version", std::string(adam::kToolkitVersion));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool kinds = true) {
    sub->add_option("--seed", common.seed, "campaign / operand seed");
    if (kinds) sub->add_option("--kinds", common.kinds, "comma-separated: exact,tmr_exact,mitchell,mitchell_trunc,adam");
    sub->add_option("--config", common.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
    sub->add_option("--threads", common.threads, "OpenMP threads (0 = runtime default)");
  };

  auto* mare = app.add_subcommand("mare", "exhaustive error statistics over all 8-bit pairs");
  add_common(mare);

  std::string summary_file;
  auto* tradeoff = app.add_subcommand("tradeoff", "area / PDP reductions and PDP-vs-vulnerability data");
  add_common(tradeoff, false);
  tradeoff->add_option("--summary", summary_file, "summary.json from an inject run");

  auto* inject = app.add_subcommand("inject", "fault-injection campaign");
  add_common(inject);

  std::optional<std::uint64_t> population;
  double confidence = 0.95, margin = 0.01, p = 0.5;
  auto* ss = app.add_subcommand("sample-size", "statistical fault-injection sample size");
  ss->add_option("--population", population, "population size (omit for infinite)");
  ss->add_option("--confidence", confidence)->capture_default_str();
  ss->add_option("--margin", margin)->capture_default_str();
  ss->add_option("--p", p)->capture_default_str();

  std::vector<std::size_t> dims{16, 16, 16};
  std::uint64_t faults = 0;
  auto* gemm = app.add_subcommand("gemm", "random INT8 GEMM on the simulated array");
  add_common(gemm);
  gemm->add_option("--dims", dims, "m,n,k")->delimiter(',')->expected(3);
  gemm->add_option("--faults", faults, "single-bit faults injected into the one run")->capture_default_str();

  auto* dnn = app.add_subcommand("dnn-eval", "fault-free accuracy of the INT8 model");
  add_common(dnn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    if (*mare) return cmd_mare(common);
    if (*tradeoff) return cmd_tradeoff(common, summary_file);
    if (*inject) return cmd_inject(common);
    if (*ss) return cmd_sample_size(population, confidence, margin, p);
    if (*gemm) return cmd_gemm(common, dims, faults);
    if (*dnn) return cmd_dnn_eval(common);
  } catch (const UsageError& e) {
    report_error(e.code(), e.what());
    return 2;
  } catch (const adam::Error& e) {
    report_error(e.code(), e.what());
    return e.code() == "invalid_config" || e.code() == "unknown_kind" ? 2 : 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 0;
}
