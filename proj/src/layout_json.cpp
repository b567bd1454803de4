#include "vpon/layout_json.hpp"

#include <fstream>

#include "json_util.hpp"
#include "vpon/errors.hpp"
#include "vpon/traffic_model.hpp"

namespace vpon {

using nlohmann::json;

json layout_to_json(const Layout& layout) {
  json j;
  j["area"] = {{"width", layout.area.width}, {"height", layout.area.height}};
  j["detour"] = layout.detour;
  j["macros"] = json::array();
  for (const auto& mc : layout.macros)
    j["macros"].push_back({{"id", mc.id}, {"x", mc.pos.x}, {"y", mc.pos.y}});
  j["smalls"] = json::array();
  for (const auto& ru : layout.smalls) {
    j["smalls"].push_back({{"id", ru.id},
                           {"x", ru.position.x},
                           {"y", ru.position.y},
                           {"split", split_name(ru.split)},
                           {"m", ru.m},
                           {"tree", ru.tree_id},
                           {"gamma", ru.gamma},
                           {"nu", ru.nu}});
  }
  return j;
}

Layout layout_from_json(const json& j) {
  using detail::as_double;
  using detail::as_int;
  using detail::as_string;
  using detail::check_keys;
  using detail::require;

  check_keys(j, "layout", {"area", "detour", "macros", "smalls"});
  const json& area_j = require(j, "layout", "area");
  check_keys(area_j, "layout.area", {"width", "height"});
  Rect area;
  area.width = as_double(require(area_j, "layout.area", "width"), "layout.area.width");
  area.height = as_double(require(area_j, "layout.area", "height"), "layout.area.height");
  double detour = j.contains("detour") ? as_double(j.at("detour"), "layout.detour") : 1.4;

  const json& macros_j = require(j, "layout", "macros");
  if (!macros_j.is_array()) throw ConfigError("config: layout.macros must be an array");
  std::vector<MacroSite> macros;
  for (std::size_t i = 0; i < macros_j.size(); ++i) {
    std::string path = "layout.macros[" + std::to_string(i) + "]";
    const json& mj = macros_j.at(i);
    check_keys(mj, path, {"id", "x", "y"});
    MacroSite mc;
    mc.id = as_int(require(mj, path, "id"), path + ".id");
    mc.pos.x = as_double(require(mj, path, "x"), path + ".x");
    mc.pos.y = as_double(require(mj, path, "y"), path + ".y");
    macros.push_back(mc);
  }

  const json& smalls_j = require(j, "layout", "smalls");
  if (!smalls_j.is_array()) throw ConfigError("config: layout.smalls must be an array");
  std::vector<RuProfile> smalls;
  for (std::size_t i = 0; i < smalls_j.size(); ++i) {
    std::string path = "layout.smalls[" + std::to_string(i) + "]";
    const json& sj = smalls_j.at(i);
    check_keys(sj, path, {"id", "x", "y", "split", "m", "tree", "gamma", "nu"});
    RuProfile ru;
    ru.id = as_int(require(sj, path, "id"), path + ".id");
    ru.position.x = as_double(require(sj, path, "x"), path + ".x");
    ru.position.y = as_double(require(sj, path, "y"), path + ".y");
    ru.split = split_from_name(as_string(require(sj, path, "split"), path + ".split"));
    ru.m = as_int(require(sj, path, "m"), path + ".m");
    ru.tree_id = sj.contains("tree") ? as_int(sj.at("tree"), path + ".tree") : -1;
    // Traffic knobs are ours, not part of the fixed geometry schema; default to
    // full occupancy pressure (gamma = m) when absent.
    ru.gamma = sj.contains("gamma") ? as_double(sj.at("gamma"), path + ".gamma")
                                    : static_cast<double>(ru.m);
    ru.nu = sj.contains("nu") ? as_double(sj.at("nu"), path + ".nu") : 1.0;
    smalls.push_back(ru);
  }

  return make_layout(area, std::move(macros), std::move(smalls), detour);
}

void save_layout(const Layout& layout, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << layout_to_json(layout).dump(2) << "\n";
}

Layout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open layout file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("layout file " + path + ": " + e.what());
  }
  return layout_from_json(j);
}

}  // namespace vpon
