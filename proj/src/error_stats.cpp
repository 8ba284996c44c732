#include "adam/error_stats.hpp"

#include <algorithm>
#include <cstdio>

namespace adam {

namespace {

ErrorSummary summary_of(double rel_sum, double max_rel, std::int64_t err_sum, std::uint64_t count) {
  ErrorSummary s;
  s.pair_count = count;
  if (count == 0) return s;
  s.mare_percent = 100.0 * rel_sum / static_cast<double>(count);
  s.max_relative_error_percent = 100.0 * max_rel;
  s.mean_error = static_cast<double>(err_sum) / static_cast<double>(count);
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

ErrorStats summarize(MultiplierKind kind, const SweepAccum& acc) {
  ErrorStats st;
  st.kind = kind;
  double rel = 0.0, max_rel = 0.0;
  std::int64_t err = 0;
  std::uint64_t n = 0;
  for (int c = 0; c < kCaseBuckets; ++c) {
    st.per_case[c] = summary_of(acc.rel_sum[c], acc.max_rel[c], acc.err_sum[c], acc.count[c]);
    rel += acc.rel_sum[c];
    max_rel = std::max(max_rel, acc.max_rel[c]);
    err += acc.err_sum[c];
    n += acc.count[c];
  }
  st.overall = summary_of(rel, max_rel, err, n);
  st.mare_incl_zero_percent = 100.0 * rel / 65536.0;
  st.histogram = acc.histogram;
  return st;
}

ErrorStats mare_exhaustive(MultiplierKind kind, Exec exec) {
  const auto& table = ProductTable::get(kind);
  const auto acc = exec == Exec::serial ? kernels::serial::error_sweep(table) : kernels::omp::error_sweep(table);
  return summarize(kind, acc);
}

std::string error_report_csv(std::span<const ErrorStats> stats) {
  std::string out = "kind,mare,max_re,mean_err,case,pair_count\n";
  auto row = [&](const ErrorStats& st, const ErrorSummary& s, const char* label) {
    out += std::string(to_string(st.kind)) + ',' + fmt(s.mare_percent) + ',' + fmt(s.max_relative_error_percent) +
           ',' + fmt(s.mean_error) + ',' + label + ',' + std::to_string(s.pair_count) + '\n';
  };
  for (const auto& st : stats) {
    row(st, st.overall, "all");
    for (int c = kCaseBuckets - 1; c >= 0; --c) row(st, st.per_case[c], kCaseLabels[c]);
  }
  return out;
}

nlohmann::json error_report_json(std::span<const ErrorStats> stats) {
  auto js = [](const ErrorSummary& s) {
    return nlohmann::json{{"mare_percent", s.mare_percent},
                          {"max_relative_error_percent", s.max_relative_error_percent},
                          {"mean_error", s.mean_error},
                          {"pair_count", s.pair_count}};
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& st : stats) {
    nlohmann::json j = js(st.overall);
    j["kind"] = to_string(st.kind);
    j["mare_incl_zero_percent"] = st.mare_incl_zero_percent;
    nlohmann::json cases = nlohmann::json::object();
    for (int c = 0; c < kCaseBuckets; ++c) cases[kCaseLabels[c]] = js(st.per_case[c]);
    j["per_case"] = cases;
    j["histogram_percent_buckets"] = st.histogram;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace adam
