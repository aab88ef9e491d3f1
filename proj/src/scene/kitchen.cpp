#include "tru/kitchen.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tru/error.hpp"

#ifndef TRU_DATA_DIR
#define TRU_DATA_DIR "data"
#endif

namespace tru {

const std::vector<std::string>& kitchen_ids() {
  static const std::vector<std::string> ids = {"one_wall", "one_wall_island", "l_shaped", "l_shaped_island",
                                               "galley"};
  return ids;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("TRU_DATA_DIR"); env && *env) return env;
  return TRU_DATA_DIR;
}

Kitchen parse_kitchen(std::string_view json_text) {
  try {
    auto doc = nlohmann::json::parse(json_text);
    Kitchen kitchen;
    kitchen.id = doc.at("id").get<std::string>();
    kitchen.name = doc.value("name", kitchen.id);
    std::vector<AreaSpec> areas;
    for (const auto& entry : doc.at("areas")) {
      AreaSpec spec;
      spec.id = entry.at("name").get<std::string>();
      spec.kind = parse_area_kind(entry.at("kind").get<std::string>());
      spec.initially_open = entry.at("open").get<bool>();
      const auto& pos = entry.at("position");
      spec.position = Position{pos.at(0).get<double>(), pos.at(1).get<double>()};
      areas.push_back(std::move(spec));
    }
    kitchen.catalog = std::make_shared<const AreaCatalog>(std::move(areas));
    return kitchen;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("kitchen config: ") + e.what());
  }
}

Kitchen load_kitchen(std::string_view id, const std::filesystem::path& data_dir) {
  static std::mutex mutex;
  static std::map<std::string, Kitchen> cache;
  const auto path = data_dir / "kitchens" / (std::string(id) + ".json");
  std::lock_guard lock(mutex);
  if (auto it = cache.find(path.string()); it != cache.end()) return it->second;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUnknownKitchen, "unknown kitchen '" + std::string(id) + "' (" + path.string() + ")");
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto kitchen = parse_kitchen(buffer.str());
  if (kitchen.id != id) {
    throw Error(ErrorCode::kSchemaError, "kitchen file " + path.string() + " declares id '" + kitchen.id + "'");
  }
  cache.emplace(path.string(), kitchen);
  return kitchen;
}

SceneGraph empty_scene(const Kitchen& kitchen) { return SceneGraph(kitchen.catalog); }

}  // namespace tru
