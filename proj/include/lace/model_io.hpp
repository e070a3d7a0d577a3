#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "lace/model.hpp"

namespace lace {

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON document. `config`, when not null, is embedded verbatim
/// under "config" so the producing run can be reproduced.
nlohmann::json model_to_json(const LaceModel& model, const nlohmann::json& config = nullptr);

/// Validates structure and values; throws ConfigError naming the offending
/// field (e.g. "clusters[3].gamma_l").
LaceModel model_from_json(const nlohmann::json& doc);

/// Deterministic text form; doubles use the shortest exact representation.
std::string dump_model(const LaceModel& model, const nlohmann::json& config = nullptr);

void save_model(const std::filesystem::path& path, const LaceModel& model, const nlohmann::json& config = nullptr);
LaceModel load_model(const std::filesystem::path& path);

}  // namespace lace
