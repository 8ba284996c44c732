#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "adam/campaign.hpp"
#include "adam/multiplier.hpp"

namespace adam {

struct DatasetPaths {
  std::filesystem::path images;
  std::filesystem::path labels;
  std::size_t limit = 0;  // 0 keeps every image
};

/// Experiment configuration file. Every key is optional; unknown keys are
/// rejected. Relative paths resolve against the file's directory.
struct ToolConfig {
  std::optional<std::uint64_t> seed;
  std::vector<MultiplierKind> kinds;
  std::optional<int> threads;
  CampaignConfig campaign;
  std::optional<std::filesystem::path> model;
  std::optional<DatasetPaths> dataset;
};

/// Throws adam::Error("invalid_config") naming the offending key.
ToolConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ToolConfig load_config(const std::filesystem::path& file);

/// Comma-separated kind list; throws adam::Error("unknown_kind").
std::vector<MultiplierKind> parse_kinds(std::string_view list);

nlohmann::json to_json(const CampaignConfig& c);

}  // namespace adam
