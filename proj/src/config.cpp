#include "adam/config.hpp"

#include <fstream>
#include <set>

#include "adam/error.hpp"

namespace adam {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& msg) {
  throw Error("invalid_config", key + ": " + msg);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) bad(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == k;
    if (!ok) bad(where.empty() ? k : where + "." + k, "unknown key");
  }
}

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    bad(key, "wrong type");
  }
}

std::uint64_t get_uint(const json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    bad(key, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

double get_prob(const json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "expected a number");
  const double v = j.get<double>();
  if (!(v > 0.0 && v < 1.0)) bad(key, "must lie strictly between 0 and 1");
  return v;
}

std::filesystem::path resolve(const json& j, const std::string& key, const std::filesystem::path& base) {
  if (!j.is_string()) bad(key, "expected a path string");
  std::filesystem::path p = j.get<std::string>();
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

std::vector<MultiplierKind> parse_kinds(std::string_view list) {
  std::vector<MultiplierKind> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const auto name = list.substr(0, comma);
    if (!name.empty()) {
      const auto k = parse_kind(name);
      if (!k) throw Error("unknown_kind", "unknown multiplier kind '" + std::string(name) + "'");
      if (std::find(out.begin(), out.end(), *k) == out.end()) out.push_back(*k);
    }
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw Error("unknown_kind", "empty kind list");
  return out;
}

ToolConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  only_keys(j, "", {"seed", "kinds", "threads", "array", "campaign", "model", "dataset"});
  ToolConfig c;
  if (j.contains("seed")) c.seed = get_uint(j["seed"], "seed");
  if (j.contains("kinds")) {
    const auto& ks = j["kinds"];
    if (!ks.is_array() || ks.empty()) bad("kinds", "expected a non-empty array of kind names");
    for (const auto& k : ks) {
      const auto kind = parse_kind(get<std::string>(k, "kinds"));
      if (!kind) bad("kinds", "unknown multiplier kind '" + k.get<std::string>() + "'");
      if (std::find(c.kinds.begin(), c.kinds.end(), *kind) == c.kinds.end()) c.kinds.push_back(*kind);
    }
  }
  if (j.contains("threads")) {
    const auto v = get_uint(j["threads"], "threads");
    c.threads = static_cast<int>(v);
  }
  auto& cc = c.campaign;
  if (j.contains("array")) {
    const auto& a = j["array"];
    only_keys(a, "array", {"rows", "cols", "dataflow", "accumulator_width"});
    if (a.contains("rows")) cc.array.rows = static_cast<std::uint32_t>(get_uint(a["rows"], "array.rows"));
    if (a.contains("cols")) cc.array.cols = static_cast<std::uint32_t>(get_uint(a["cols"], "array.cols"));
    if (a.contains("dataflow") && get<std::string>(a["dataflow"], "array.dataflow") != "output_stationary")
      bad("array.dataflow", "only output_stationary is supported");
    if (a.contains("accumulator_width") && get_uint(a["accumulator_width"], "array.accumulator_width") != 32)
      bad("array.accumulator_width", "only 32 is supported");
    if (cc.array.rows == 0 || cc.array.cols == 0) bad("array", "rows and cols must be positive");
  }
  if (j.contains("campaign")) {
    const auto& k = j["campaign"];
    only_keys(k, "campaign",
              {"scope", "n_injections", "enforce_confidence", "confidence", "margin", "p", "include_accumulator",
               "images", "gemm_dims"});
    if (k.contains("scope")) {
      const auto s = parse_scope(get<std::string>(k["scope"], "campaign.scope"));
      if (!s) bad("campaign.scope", "expected single_multiply, gemm or dnn_inference");
      cc.scope = *s;
    }
    if (k.contains("n_injections")) {
      cc.n_injections = get_uint(k["n_injections"], "campaign.n_injections");
      if (*cc.n_injections == 0) bad("campaign.n_injections", "must be positive");
    }
    if (k.contains("enforce_confidence"))
      cc.enforce_confidence = get<bool>(k["enforce_confidence"], "campaign.enforce_confidence");
    if (k.contains("confidence")) cc.confidence = get_prob(k["confidence"], "campaign.confidence");
    if (k.contains("margin")) cc.margin = get_prob(k["margin"], "campaign.margin");
    if (k.contains("p")) cc.p = get_prob(k["p"], "campaign.p");
    if (k.contains("include_accumulator"))
      cc.include_accumulator = get<bool>(k["include_accumulator"], "campaign.include_accumulator");
    if (k.contains("images")) {
      cc.images = get_uint(k["images"], "campaign.images");
      if (cc.images == 0) bad("campaign.images", "must be positive");
    }
    if (k.contains("gemm_dims")) {
      const auto& d = k["gemm_dims"];
      if (!d.is_array() || d.size() != 3) bad("campaign.gemm_dims", "expected [m, n, k]");
      cc.gemm_dims = {get_uint(d[0], "campaign.gemm_dims"), get_uint(d[1], "campaign.gemm_dims"),
                      get_uint(d[2], "campaign.gemm_dims")};
      if (cc.gemm_dims.m == 0 || cc.gemm_dims.n == 0 || cc.gemm_dims.k == 0)
        bad("campaign.gemm_dims", "dimensions must be positive");
    }
  }
  if (j.contains("model")) c.model = resolve(j["model"], "model", base_dir);
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    only_keys(d, "dataset", {"images", "labels", "limit"});
    if (!d.contains("images") || !d.contains("labels")) bad("dataset", "needs both images and labels");
    DatasetPaths p;
    p.images = resolve(d["images"], "dataset.images", base_dir);
    p.labels = resolve(d["labels"], "dataset.labels", base_dir);
    if (d.contains("limit")) p.limit = get_uint(d["limit"], "dataset.limit");
    c.dataset = p;
  }
  return c;
}

ToolConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("io", "cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("invalid_config", file.string() + ": " + e.what());
  }
  return parse_config(j, file.parent_path());
}

json to_json(const CampaignConfig& c) {
  return {{"scope", to_string(c.scope)},
          {"n_injections", c.n_injections ? json(*c.n_injections) : json(nullptr)},
          {"resolved_injections", c.resolved_injections()},
          {"enforce_confidence", c.enforce_confidence},
          {"confidence", c.confidence},
          {"margin", c.margin},
          {"p", c.p},
          {"include_accumulator", c.include_accumulator},
          {"images", c.images},
          {"gemm_dims", {c.gemm_dims.m, c.gemm_dims.n, c.gemm_dims.k}},
          {"array", {{"rows", c.array.rows}, {"cols", c.array.cols}, {"dataflow", "output_stationary"},
                     {"accumulator_width", c.array.accumulator_width}}}};
}

}  // namespace adam
