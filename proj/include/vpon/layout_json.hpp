#pragma once

#include <string>

#include <json.hpp>

#include "vpon/layout.hpp"

namespace vpon {

nlohmann::json layout_to_json(const Layout& layout);

/// Rebuilds a layout (including derived tables) from its JSON form. Throws
/// ConfigError on missing or malformed fields.
Layout layout_from_json(const nlohmann::json& j);

void save_layout(const Layout& layout, const std::string& path);
Layout load_layout(const std::string& path);

}  // namespace vpon
