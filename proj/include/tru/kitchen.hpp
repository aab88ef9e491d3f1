#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tru/scene_graph.hpp"

namespace tru {

struct Kitchen {
  std::string id;    // e.g. "one_wall"
  std::string name;  // e.g. "One Wall"
  std::shared_ptr<const AreaCatalog> catalog;
};

/// Ids of the five shipped layouts, in a fixed order.
const std::vector<std::string>& kitchen_ids();

/// Directory holding kitchens/, prompts/ and tasks/. Honors TRU_DATA_DIR,
/// then falls back to the path baked in at build time.
std::filesystem::path default_data_dir();

/// Parses a kitchen config document. Throws Error(kSchemaError).
Kitchen parse_kitchen(std::string_view json_text);

/// Loads data_dir/kitchens/<id>.json once per process and caches it so that
/// every scene built on one layout shares the same catalog.
/// Throws Error(kUnknownKitchen).
Kitchen load_kitchen(std::string_view id, const std::filesystem::path& data_dir = default_data_dir());

/// Scene with the kitchen's initial open flags and no objects.
SceneGraph empty_scene(const Kitchen& kitchen);

}  // namespace tru
