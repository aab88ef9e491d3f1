#include "tru/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tru/error.hpp"

namespace tru {

namespace {

struct KindName {
  AreaKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {AreaKind::kFurnitureInnerSpace, "furniture-inner-space"},
    {AreaKind::kCabinet, "cabinet"},
    {AreaKind::kDrawer, "drawer"},
    {AreaKind::kSurface, "surface"},
    {AreaKind::kShelf, "shelf"},
    {AreaKind::kHumanHand, "human-hand"},
    {AreaKind::kRobotHand, "robot-hand"},
};

}  // namespace

std::string_view to_string(AreaKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

AreaKind parse_area_kind(std::string_view text) {
  for (const auto& entry : kKindNames) {
    if (entry.name == text) return entry.kind;
  }
  throw Error(ErrorCode::kSchemaError, "unknown area kind '" + std::string(text) + "'");
}

bool is_always_open(AreaKind kind) {
  switch (kind) {
    case AreaKind::kSurface:
    case AreaKind::kShelf:
    case AreaKind::kHumanHand:
    case AreaKind::kRobotHand:
      return true;
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// AreaCatalog

AreaCatalog::AreaCatalog(std::vector<AreaSpec> areas) : areas_(std::move(areas)) {
  bool has_hand = std::any_of(areas_.begin(), areas_.end(),
                              [](const AreaSpec& a) { return a.kind == AreaKind::kRobotHand; });
  if (!has_hand) {
    areas_.push_back(AreaSpec{std::string(kRobotHandId), AreaKind::kRobotHand, true, {}});
  }
  int hands = 0;
  for (std::size_t i = 0; i < areas_.size(); ++i) {
    const auto& a = areas_[i];
    if (a.id.empty()) throw Error(ErrorCode::kInvalidGraph, "area with empty id");
    if (!index_.emplace(a.id, i).second) {
      throw Error(ErrorCode::kInvalidGraph, "duplicate area id '" + a.id + "'");
    }
    if (is_always_open(a.kind) && !a.initially_open) {
      throw Error(ErrorCode::kInvalidGraph, "area '" + a.id + "' of kind " +
                                                std::string(to_string(a.kind)) + " cannot be closed");
    }
    if (a.kind == AreaKind::kRobotHand) {
      robot_hand_ = i;
      ++hands;
    }
  }
  if (hands != 1) throw Error(ErrorCode::kInvalidGraph, "exactly one robot-hand area is required");
}

std::optional<std::size_t> AreaCatalog::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t AreaCatalog::index_of(std::string_view id) const {
  auto found = find(id);
  if (!found) throw Error(ErrorCode::kUnknownArea, "unknown area '" + std::string(id) + "'");
  return *found;
}

// ---------------------------------------------------------------------------
// SceneGraph

SceneGraph::SceneGraph(std::shared_ptr<const AreaCatalog> catalog) : catalog_(std::move(catalog)) {
  if (!catalog_) throw Error(ErrorCode::kInvalidGraph, "scene graph needs an area catalog");
  open_.resize(catalog_->size());
  for (std::size_t i = 0; i < catalog_->size(); ++i) open_[i] = (*catalog_)[i].initially_open ? 1 : 0;
  // Stand in front of the first area that is not a hand.
  for (std::size_t i = 0; i < catalog_->size(); ++i) {
    auto kind = (*catalog_)[i].kind;
    if (kind != AreaKind::kRobotHand && kind != AreaKind::kHumanHand) {
      robot_at_ = i;
      break;
    }
  }
}

const ObjectNode* SceneGraph::find_object(std::string_view id) const {
  auto it = std::lower_bound(objects_.begin(), objects_.end(), id,
                             [](const ObjectNode& o, std::string_view key) { return o.id < key; });
  if (it == objects_.end() || it->id != id) return nullptr;
  return &*it;
}

ObjectNode* SceneGraph::find_mutable(std::string_view id) {
  return const_cast<ObjectNode*>(static_cast<const SceneGraph*>(this)->find_object(id));
}

const std::string& SceneGraph::parent_of(std::string_view object) const {
  const auto* node = find_object(object);
  if (!node) throw Error(ErrorCode::kUnknownObject, "unknown object '" + std::string(object) + "'");
  return area_id(node->parent);
}

std::optional<std::string> SceneGraph::held_object() const {
  const auto hand = catalog_->robot_hand();
  for (const auto& o : objects_) {
    if (o.parent == hand) return o.id;
  }
  return std::nullopt;
}

std::optional<std::string> SceneGraph::held_origin() const {
  if (!held_origin_) return std::nullopt;
  return area_id(*held_origin_);
}

SceneGraph SceneGraph::with_object(std::string_view object, std::string_view area) const {
  if (object.empty()) throw Error(ErrorCode::kUnknownObject, "object id must not be empty");
  const auto parent = catalog_->index_of(area);
  if (find_object(object)) {
    throw Error(ErrorCode::kDuplicateObject, "object '" + std::string(object) + "' already exists");
  }
  if (catalog_->find(object)) {
    throw Error(ErrorCode::kDuplicateObject, "object '" + std::string(object) + "' collides with an area name");
  }
  SceneGraph out = *this;
  auto it = std::lower_bound(out.objects_.begin(), out.objects_.end(), object,
                             [](const ObjectNode& o, std::string_view key) { return o.id < key; });
  out.objects_.insert(it, ObjectNode{std::string(object), parent});
  return out;
}

SceneGraph SceneGraph::with_robot_at(std::string_view area) const {
  const auto index = catalog_->index_of(area);
  if ((*catalog_)[index].kind == AreaKind::kRobotHand) {
    throw Error(ErrorCode::kInvalidGraph, "the robot cannot stand at its own hand");
  }
  SceneGraph out = *this;
  out.robot_at_ = index;
  return out;
}

SceneGraph SceneGraph::with_open(std::string_view area, bool open) const {
  const auto index = catalog_->index_of(area);
  if (!open && is_always_open((*catalog_)[index].kind)) {
    throw Error(ErrorCode::kInvalidGraph, "area '" + std::string(area) + "' cannot be closed");
  }
  SceneGraph out = *this;
  out.open_[index] = open ? 1 : 0;
  return out;
}

bool SceneGraph::operator==(const SceneGraph& other) const {
  if (catalog_ != other.catalog_ && !(*catalog_ == *other.catalog_)) return false;
  return robot_at_ == other.robot_at_ && held_origin_ == other.held_origin_ && open_ == other.open_ &&
         objects_ == other.objects_;
}

SceneGraph visible(const SceneGraph& g) {
  SceneGraph out = g;
  std::erase_if(out.objects_, [&](const ObjectNode& o) { return !g.is_open(o.parent); });
  return out;
}

SceneGraph set_area_open(const SceneGraph& g, std::string_view area) {
  const auto index = g.catalog_->index_of(area);
  if (g.is_open(index)) throw Error(ErrorCode::kAlreadyOpen, "area '" + std::string(area) + "' is already open");
  SceneGraph out = g;
  out.open_[index] = 1;
  return out;
}

SceneGraph move_object(const SceneGraph& g, std::string_view object, std::string_view dest) {
  if (!g.find_object(object)) {
    throw Error(ErrorCode::kUnknownObject, "unknown object '" + std::string(object) + "'");
  }
  const auto target = g.catalog_->index_of(dest);
  const auto hand = g.catalog_->robot_hand();
  SceneGraph out = g;
  auto* node = out.find_mutable(object);
  const auto source = node->parent;
  if (target == hand && source != hand) {
    // Only one object fits in the hand.
    for (const auto& o : out.objects_) {
      if (o.parent == hand) {
        throw Error(ErrorCode::kInvalidGraph, "robot hand already holds '" + o.id + "'");
      }
    }
    out.held_origin_ = source;
  } else if (source == hand && target != hand) {
    out.held_origin_.reset();
  }
  node->parent = target;
  return out;
}

double move_cost(const AreaCatalog& catalog, std::size_t from, std::size_t to, const RewardConfig& cfg) {
  if (from == to) return 0.0;
  const auto& a = catalog[from].position;
  const auto& b = catalog[to].position;
  const double distance = std::hypot(a.x - b.x, a.y - b.y);
  return std::clamp(std::round(cfg.nav_scale * distance), 0.0, cfg.nav_max);
}

double move_cost(const SceneGraph& g, std::string_view from, std::string_view to, const RewardConfig& cfg) {
  const auto& catalog = g.catalog();
  return move_cost(catalog, catalog.index_of(from), catalog.index_of(to), cfg);
}

void validate(const SceneGraph& g) {
  const auto& catalog = g.catalog();
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidGraph, what); };
  if (g.robot_at_index() >= catalog.size()) fail("robot_at is not an area");
  if (catalog[g.robot_at_index()].kind == AreaKind::kRobotHand) fail("robot_at names the robot hand");
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (is_always_open(catalog[i].kind) && !g.is_open(i)) fail("always-open area '" + catalog[i].id + "' is closed");
  }
  int held = 0;
  const auto& objects = g.objects();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].parent >= catalog.size()) fail("object '" + objects[i].id + "' has no valid parent");
    if (objects[i].parent == catalog.robot_hand()) ++held;
    if (i > 0 && !(objects[i - 1].id < objects[i].id)) fail("object list not strictly sorted");
  }
  if (held > 1) fail("robot holds more than one object");
  if (held == 0 && g.held_origin_index()) fail("held origin recorded while the hand is empty");
}

std::string to_canonical_string(const SceneGraph& g) {
  std::vector<std::size_t> order(g.area_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return g.area_id(a) < g.area_id(b); });
  std::ostringstream out;
  out << "areas:\n";
  for (auto i : order) {
    out << "  " << g.area_id(i) << ' ' << to_string(g.catalog()[i].kind) << ' '
        << (g.is_open(i) ? "open" : "closed") << '\n';
  }
  out << "objects:\n";
  for (const auto& o : g.objects()) out << "  " << o.id << " @ " << g.area_id(o.parent) << '\n';
  out << "robot_at: " << g.robot_at() << '\n';
  out << "held: " << g.held_object().value_or("-") << '\n';
  out << "held_origin: " << g.held_origin().value_or("-") << '\n';
  return out.str();
}

}  // namespace tru
