#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adam/campaign.hpp"
#include "adam/error_stats.hpp"
#include "adam/multiplier.hpp"

namespace adam {

inline constexpr std::string_view kToolkitVersion = "0.3.0";

/// Published synthesis figures for one 8-bit multiplier design. These are
/// reference constants; only the rows with a `simulated` kind are modelled.
struct HwConstants {
  std::string_view name;
  double delay_ns;
  double power_uw;
  double area_um2;
  double mare_percent;
  bool fault_tolerant;
  double pdp_pj;
  std::optional<MultiplierKind> simulated;
};

std::span<const HwConstants> hw_constants();
/// Throws adam::Error("unknown_row") for a name that is not in the table.
const HwConstants& hw_row(std::string_view name);

/// One published point of the PDP-vs-vulnerability scatter (SDC-5).
struct TradeoffPoint {
  std::string_view network;
  std::string_view variant;
  double pdp_pj;
  double vulnerability_percent;
};

std::span<const TradeoffPoint> tradeoff_reference_points();

inline constexpr double kClaimedAreaReduction = 63.54;
inline constexpr double kClaimedPdpReduction = 39.06;
inline constexpr double kClaimTolerance = 0.02;
/// The scatter plot places the proposed design at this PDP; the table row
/// (186.45) is the one the headline reduction is derived from.
inline constexpr double kScatterAdamPdp = 183.06;

struct Tradeoff {
  double area_reduction_percent;
  double pdp_reduction_percent;
  bool area_matches;
  bool pdp_matches;
};

/// Area and PDP reduction of the proposed row against the exact row.
Tradeoff compute_tradeoff();

/// Command parameters carried into every report.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::vector<MultiplierKind> kinds;
  std::string out_dir;
  int threads = 0;
  std::optional<std::string> config_path;
  nlohmann::json settings = nlohmann::json::object();

  nlohmann::json to_json() const;
  /// Single "# {...}" line for the top of CSV and .dat files.
  std::string comment_line() const;
};

/// Report envelope: {"toolkit", "version", "run_config", ...body}.
nlohmann::json with_header(const RunConfig& run, nlohmann::json body);

nlohmann::json mare_report_json(std::span<const ErrorStats> stats);
/// Computed rows as in error_report_csv, then the reference table rows.
std::string mare_report_csv(std::span<const ErrorStats> stats);

/// Measured SDC-5 vulnerability per kind, joined to the table PDP figures.
struct MeasuredPoint {
  MultiplierKind kind;
  double vulnerability_percent;
};

nlohmann::json tradeoff_report_json(const Tradeoff& t, std::span<const MeasuredPoint> measured);
/// gnuplot data: "# source network variant pdp_pj vulnerability".
std::string tradeoff_dat(std::span<const MeasuredPoint> measured);
/// gnuplot data for area-vs-vulnerability bars, one row per campaign summary
/// with the four SDC criteria as columns. Unknown areas are written as "?".
std::string vulnerability_dat(std::span<const CampaignSummary> summaries);

/// PDP constant matching a simulated kind, if the table has one.
std::optional<double> pdp_for(MultiplierKind kind);
std::optional<double> area_for(MultiplierKind kind);

}  // namespace adam
