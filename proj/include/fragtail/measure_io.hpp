#pragma once

#include "fragtail/measures.hpp"

#include <json.hpp>

#include <string>

namespace fragtail {

/// {"family": ..., "params": {...}, "scale": r}; atomic params are
/// {"atoms": [{"parts": [...], "weight": w}, ...]}.
DislocationSpec measure_from_json(const nlohmann::json& doc);
DislocationSpec load_measure_file(const std::string& path);
nlohmann::json measure_to_json(const DislocationSpec& spec);

} // namespace fragtail
