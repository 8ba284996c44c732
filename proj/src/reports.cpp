#include "adam/reports.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "adam/error.hpp"

namespace adam {

namespace {

constexpr std::array kRows{
    HwConstants{"Exact (Wallace)", 0.85, 360, 417, 0.00, false, 306, MultiplierKind::exact},
    HwConstants{"DRUM(3)", 0.70, 104, 143, 12.6, false, 72.8, std::nullopt},
    HwConstants{"TOSAM(0,3)", 0.68, 144, 198, 7.7, false, 97.9, std::nullopt},
    HwConstants{"DRUM(4)", 1.00, 172, 208, 6.4, false, 172, std::nullopt},
    HwConstants{"TOSAM(1,5)", 0.88, 231, 291, 4.1, false, 203.2, std::nullopt},
    HwConstants{"ScaleTrim(4,8)", 1.8, 143, 216, 3.3, false, 257.4, std::nullopt},
    HwConstants{"AdAM", 1.13, 165, 152, 4.7, true, 186.45, MultiplierKind::adam},
};

constexpr std::array kPoints{
    TradeoffPoint{"AlexNet", "Unp-Exact", 306, 29.1},   TradeoffPoint{"AlexNet", "Unp-AxM", 257.4, 36.5},
    TradeoffPoint{"AlexNet", "Pro-TMR", 945, 0},        TradeoffPoint{"AlexNet", "Pro-AdAM", kScatterAdamPdp, 0.4},
    TradeoffPoint{"VGG-16", "Unp-Exact", 306, 40},      TradeoffPoint{"VGG-16", "Unp-AxM", 257.4, 47},
    TradeoffPoint{"VGG-16", "Pro-TMR", 945, 0},         TradeoffPoint{"VGG-16", "Pro-AdAM", kScatterAdamPdp, 25},
};

constexpr double kTmrPdp = 945;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

const char* kFootnote =
    "PDP of the proposed design: the table lists 186.45 pJ, the scatter plot 183.06 pJ. "
    "The reduction claim is computed from the table value.";

}  // namespace

std::span<const HwConstants> hw_constants() { return kRows; }

const HwConstants& hw_row(std::string_view name) {
  for (const auto& r : kRows)
    if (r.name == name) return r;
  throw Error("unknown_row", "no hardware constants for '" + std::string(name) + "'");
}

std::span<const TradeoffPoint> tradeoff_reference_points() { return kPoints; }

std::optional<double> pdp_for(MultiplierKind kind) {
  if (kind == MultiplierKind::tmr_exact) return kTmrPdp;
  for (const auto& r : kRows)
    if (r.simulated == kind) return r.pdp_pj;
  return std::nullopt;
}

std::optional<double> area_for(MultiplierKind kind) {
  for (const auto& r : kRows)
    if (r.simulated == kind) return r.area_um2;
  return std::nullopt;
}

Tradeoff compute_tradeoff() {
  const auto& exact = hw_row("Exact (Wallace)");
  const auto& adam = hw_row("AdAM");
  Tradeoff t{};
  t.area_reduction_percent = 100.0 * (1.0 - adam.area_um2 / exact.area_um2);
  t.pdp_reduction_percent = 100.0 * (1.0 - adam.pdp_pj / exact.pdp_pj);
  t.area_matches = std::abs(t.area_reduction_percent - kClaimedAreaReduction) <= kClaimTolerance;
  t.pdp_matches = std::abs(t.pdp_reduction_percent - kClaimedPdpReduction) <= kClaimTolerance;
  return t;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json ks = nlohmann::json::array();
  for (auto k : kinds) ks.push_back(to_string(k));
  return {{"command", command},
          {"seed", seed},
          {"kinds", ks},
          {"out_dir", out_dir},
          {"threads", threads},
          {"config_path", config_path ? nlohmann::json(*config_path) : nlohmann::json(nullptr)},
          {"settings", settings}};
}

std::string RunConfig::comment_line() const {
  nlohmann::json j{{"toolkit", "adamsim"}, {"version", kToolkitVersion}, {"run_config", to_json()}};
  return "# " + j.dump() + "\n";
}

nlohmann::json with_header(const RunConfig& run, nlohmann::json body) {
  nlohmann::json j{{"toolkit", "adamsim"}, {"version", kToolkitVersion}, {"run_config", run.to_json()}};
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

nlohmann::json mare_report_json(std::span<const ErrorStats> stats) {
  nlohmann::json computed = error_report_json(stats);
  for (auto& row : computed) {
    const auto kind = parse_kind(row["kind"].get<std::string>());
    for (const auto& r : kRows)
      if (kind && r.simulated == *kind) {
        row["table_row"] = r.name;
        row["table_mare_percent"] = r.mare_percent;
        row["delta_pp"] = row["mare_percent"].get<double>() - r.mare_percent;
      }
  }
  nlohmann::json ref = nlohmann::json::array();
  for (const auto& r : kRows)
    ref.push_back({{"row", r.name},
                   {"mare_percent", r.mare_percent},
                   {"simulated", r.simulated ? nlohmann::json(to_string(*r.simulated)) : nlohmann::json(nullptr)},
                   {"note", r.simulated ? "constant, also simulated" : "constant, not simulated"}});
  return {{"computed", computed}, {"reference", ref}};
}

std::string mare_report_csv(std::span<const ErrorStats> stats) {
  std::string out = "row,source,mare,max_re,mean_err,case,pair_count,table_mare,note\n";
  for (const auto& st : stats) {
    std::string table;
    for (const auto& r : kRows)
      if (r.simulated == st.kind) table = fmt_short(r.mare_percent);
    auto row = [&](const ErrorSummary& s, std::string_view label) {
      out += std::string(to_string(st.kind)) + ",simulated," + fmt(s.mare_percent) + ',' +
             fmt(s.max_relative_error_percent) + ',' + fmt(s.mean_error) + ',' + std::string(label) + ',' +
             std::to_string(s.pair_count) + ',' + (label == "all" ? table : std::string{}) + ",\n";
    };
    row(st.overall, "all");
    for (int c = kCaseBuckets - 1; c >= 0; --c) row(st.per_case[c], kCaseLabels[c]);
  }
  for (const auto& r : kRows) {
    out += '"' + std::string(r.name) + "\",constant," + fmt_short(r.mare_percent) + ",,,all,,";
    out += fmt_short(r.mare_percent);
    out += r.simulated ? ",constant; also simulated\n" : ",constant; not simulated\n";
  }
  return out;
}

nlohmann::json tradeoff_report_json(const Tradeoff& t, std::span<const MeasuredPoint> measured) {
  nlohmann::json ref = nlohmann::json::array();
  for (const auto& p : kPoints)
    ref.push_back({{"network", p.network},
                   {"variant", p.variant},
                   {"pdp_pj", p.pdp_pj},
                   {"vulnerability_percent", p.vulnerability_percent}});
  nlohmann::json meas = nlohmann::json::array();
  for (const auto& m : measured) {
    const auto pdp = pdp_for(m.kind);
    meas.push_back({{"kind", to_string(m.kind)},
                    {"pdp_pj", pdp ? nlohmann::json(*pdp) : nlohmann::json(nullptr)},
                    {"sdc5_vulnerability_percent", m.vulnerability_percent}});
  }
  return {{"area_reduction_percent", t.area_reduction_percent},
          {"area_reduction_claim", kClaimedAreaReduction},
          {"area_matches", t.area_matches},
          {"pdp_reduction_percent", t.pdp_reduction_percent},
          {"pdp_reduction_claim", kClaimedPdpReduction},
          {"pdp_matches", t.pdp_matches},
          {"tolerance_pp", kClaimTolerance},
          {"reference_points", ref},
          {"measured_points", meas},
          {"footnotes", nlohmann::json::array({kFootnote})}};
}

std::string tradeoff_dat(std::span<const MeasuredPoint> measured) {
  std::string out = "# source network variant pdp_pj vulnerability_percent\n";
  out += std::string("# ") + kFootnote + "\n";
  for (const auto& p : kPoints)
    out += "reference " + std::string(p.network) + ' ' + std::string(p.variant) + ' ' + fmt_short(p.pdp_pj) + ' ' +
           fmt_short(p.vulnerability_percent) + '\n';
  for (const auto& m : measured) {
    const auto pdp = pdp_for(m.kind);
    out += "measured fixture " + std::string(to_string(m.kind)) + ' ' + (pdp ? fmt_short(*pdp) : "?") + ' ' +
           fmt(m.vulnerability_percent) + '\n';
  }
  return out;
}

std::string vulnerability_dat(std::span<const CampaignSummary> summaries) {
  std::string out = "# kind area_um2 sdc1 sdc5 sdc10 sdc20 detection_coverage\n";
  for (const auto& s : summaries) {
    const auto area = area_for(s.kind);
    out += std::string(to_string(s.kind)) + ' ' + (area ? fmt_short(*area) : "?") + ' ' + fmt(s.rate(s.sdc1)) + ' ' +
           fmt(s.rate(s.sdc5)) + ' ' + fmt(s.rate(s.sdc10)) + ' ' + fmt(s.rate(s.sdc20)) + ' ' +
           fmt(s.rate(s.detected)) + '\n';
  }
  return out;
}

}  // namespace adam
