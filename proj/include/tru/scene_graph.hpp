#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tru/reward.hpp"

namespace tru {

enum class AreaKind {
  kFurnitureInnerSpace,
  kCabinet,
  kDrawer,
  kSurface,
  kShelf,
  kHumanHand,
  kRobotHand,
};

std::string_view to_string(AreaKind kind);
AreaKind parse_area_kind(std::string_view text);

/// Surfaces, shelves and both hands can never be closed.
bool is_always_open(AreaKind kind);

struct Position {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Position&) const = default;
};

struct AreaSpec {
  std::string id;
  AreaKind kind = AreaKind::kSurface;
  bool initially_open = true;
  Position position;

  bool operator==(const AreaSpec&) const = default;
};

/// The fixed part of a kitchen: area names, kinds and positions. Shared
/// read-only between every scene graph built on the same layout.
class AreaCatalog {
 public:
  static constexpr std::string_view kRobotHandId = "robot";

  /// Appends the robot-hand area when the list does not declare one. Throws
  /// Error(kInvalidGraph) on duplicate names or a closed always-open area.
  explicit AreaCatalog(std::vector<AreaSpec> areas);

  std::size_t size() const { return areas_.size(); }
  const AreaSpec& operator[](std::size_t index) const { return areas_[index]; }
  const std::vector<AreaSpec>& areas() const { return areas_; }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws Error(kUnknownArea).
  std::size_t index_of(std::string_view id) const;
  std::size_t robot_hand() const { return robot_hand_; }

  bool operator==(const AreaCatalog& other) const { return areas_ == other.areas_; }

 private:
  std::vector<AreaSpec> areas_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t robot_hand_ = 0;
};

struct ObjectNode {
  std::string id;
  std::size_t parent = 0;  // index into the catalog

  bool operator==(const ObjectNode&) const = default;
};

/// Symbolic world model: areas with open flags, objects with one containing
/// area each, the area the robot stands in front of, and the robot hand.
/// Held objects are the ones whose parent is the robot-hand area.
class SceneGraph {
 public:
  explicit SceneGraph(std::shared_ptr<const AreaCatalog> catalog);

  const AreaCatalog& catalog() const { return *catalog_; }
  const std::shared_ptr<const AreaCatalog>& catalog_ptr() const { return catalog_; }

  std::size_t area_count() const { return catalog_->size(); }
  const std::string& area_id(std::size_t index) const { return (*catalog_)[index].id; }
  bool has_area(std::string_view id) const { return catalog_->find(id).has_value(); }
  bool is_open(std::size_t index) const { return open_[index] != 0; }
  bool is_open(std::string_view area) const { return is_open(catalog_->index_of(area)); }

  /// Sorted by object id.
  const std::vector<ObjectNode>& objects() const { return objects_; }
  const ObjectNode* find_object(std::string_view id) const;
  bool has_object(std::string_view id) const { return find_object(id) != nullptr; }
  /// Throws Error(kUnknownObject).
  const std::string& parent_of(std::string_view object) const;

  std::size_t robot_at_index() const { return robot_at_; }
  const std::string& robot_at() const { return area_id(robot_at_); }
  std::optional<std::string> held_object() const;
  /// Area the held object was picked from; empty when nothing is held or the
  /// object started the episode in hand.
  std::optional<std::string> held_origin() const;
  std::optional<std::size_t> held_origin_index() const { return held_origin_; }

  // Construction helpers; each returns a modified copy.
  SceneGraph with_object(std::string_view object, std::string_view area) const;
  SceneGraph with_robot_at(std::string_view area) const;
  SceneGraph with_open(std::string_view area, bool open) const;

  bool operator==(const SceneGraph& other) const;

  friend SceneGraph visible(const SceneGraph& g);
  friend SceneGraph set_area_open(const SceneGraph& g, std::string_view area);
  friend SceneGraph move_object(const SceneGraph& g, std::string_view object, std::string_view dest);

 private:
  ObjectNode* find_mutable(std::string_view id);

  std::shared_ptr<const AreaCatalog> catalog_;
  std::vector<unsigned char> open_;
  std::vector<ObjectNode> objects_;
  std::size_t robot_at_ = 0;
  std::optional<std::size_t> held_origin_;
};

/// Copy of g without objects inside closed areas.
SceneGraph visible(const SceneGraph& g);

/// Throws Error(kUnknownArea) or Error(kAlreadyOpen).
SceneGraph set_area_open(const SceneGraph& g, std::string_view area);

/// Reparents object under dest. Moving into the robot hand records the source
/// area as the held origin. Throws Error(kUnknownObject) / Error(kUnknownArea).
SceneGraph move_object(const SceneGraph& g, std::string_view object, std::string_view dest);

/// round(nav_scale * distance) clamped to [0, nav_max].
double move_cost(const SceneGraph& g, std::string_view from, std::string_view to, const RewardConfig& cfg);
double move_cost(const AreaCatalog& catalog, std::size_t from, std::size_t to, const RewardConfig& cfg);

/// Throws Error(kInvalidGraph) describing the first violated invariant.
void validate(const SceneGraph& g);

/// Sorted, line-oriented text form used by golden tests and belief dumps.
std::string to_canonical_string(const SceneGraph& g);

}  // namespace tru
