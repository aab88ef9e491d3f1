#include "tru/detail/compact_model.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

#include "tru/error.hpp"

namespace tru::detail {

Id Domain::object_id(std::string_view name) const {
  auto it = std::lower_bound(objects.begin(), objects.end(), name);
  if (it == objects.end() || *it != name) return kNone;
  return static_cast<Id>(it - objects.begin());
}

bool action_less(const Domain& d, const CAction& a, const CAction& b) {
  if (a.type != b.type) return a.type < b.type;
  const int ra = a.area == kNone ? -1 : d.area_rank[a.area];
  const int rb = b.area == kNone ? -1 : d.area_rank[b.area];
  if (ra != rb) return ra < rb;
  return a.object < b.object;  // object ids follow name order
}

Domain build_domain(std::span<const SceneGraph* const> graphs, const RewardConfig& rewards) {
  if (graphs.empty()) throw Error(ErrorCode::kEmptyBelief, "no states to plan over");
  Domain d;
  d.catalog = graphs.front()->catalog_ptr();
  d.rewards = rewards;
  const auto& catalog = *d.catalog;
  if (catalog.size() > kMaxAreas) throw Error(ErrorCode::kInvalidGraph, "too many areas for the planner");
  std::set<std::string> names;
  for (const auto* g : graphs) {
    if (!(g->catalog() == catalog)) throw Error(ErrorCode::kInvalidGraph, "particles use different kitchens");
    for (const auto& o : g->objects()) names.insert(o.id);
  }
  if (names.size() > static_cast<std::size_t>(INT16_MAX)) throw Error(ErrorCode::kInvalidGraph, "too many objects");
  d.objects.assign(names.begin(), names.end());

  const auto n = catalog.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return catalog[a].id < catalog[b].id; });
  d.area_rank.resize(n);
  for (std::size_t r = 0; r < n; ++r) d.area_rank[order[r]] = static_cast<int>(r);
  d.travel.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d.travel[i * n + j] = tru::move_cost(catalog, i, j, rewards);
  }
  d.robot_hand = static_cast<Id>(catalog.robot_hand());
  return d;
}

CState compile(const Domain& d, const SceneGraph& g) {
  CState s;
  for (std::size_t i = 0; i < g.area_count(); ++i) s.open[i] = g.is_open(i);
  s.parent.assign(d.objects.size(), kNone);
  for (const auto& o : g.objects()) {
    const Id id = d.object_id(o.id);
    if (id == kNone) throw Error(ErrorCode::kUnknownObject, "object '" + o.id + "' missing from planning domain");
    s.parent[id] = static_cast<Id>(o.parent);
    if (o.parent == static_cast<std::size_t>(d.robot_hand)) s.held = id;
  }
  s.robot_at = static_cast<Id>(g.robot_at_index());
  if (auto origin = g.held_origin_index()) s.held_origin = static_cast<Id>(*origin);
  return s;
}

CGoal compile(const Domain& d, const PlacementGoal& goal) {
  if (goal.size() > 32) throw Error(ErrorCode::kInvalidGraph, "goal has too many pairs for the planner");
  CGoal out;
  for (const auto& p : goal.pairs()) {
    const auto target = d.catalog->find(p.target);
    out.pairs.push_back(CPair{d.object_id(p.object), target ? static_cast<Id>(*target) : kNone});
  }
  return out;
}

CAction compile(const Domain& d, const Action& a) {
  CAction out{a.type, kNone, kNone};
  if (a.type == ActionType::kNull) return out;
  if (auto area = d.catalog->find(a.area)) out.area = static_cast<Id>(*area);
  if (a.type == ActionType::kPick) out.object = d.object_id(a.object);
  return out;
}

Action to_action(const Domain& d, const CAction& a) {
  switch (a.type) {
    case ActionType::kOpen: return Action::open((*d.catalog)[a.area].id);
    case ActionType::kPick: return Action::pick((*d.catalog)[a.area].id, d.objects[a.object]);
    case ActionType::kPlace: return Action::place((*d.catalog)[a.area].id);
    case ActionType::kNull: return Action::null();
  }
  return Action::null();
}

bool pair_satisfied(const CState& s, const CPair& p) {
  return p.object != kNone && p.target != kNone && s.parent[p.object] == p.target;
}

bool goal_complete(const CState& s, const CGoal& goal) {
  return std::all_of(goal.pairs.begin(), goal.pairs.end(), [&](const CPair& p) { return pair_satisfied(s, p); });
}

std::uint32_t satisfied_mask(const CState& s, const CGoal& goal) {
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < goal.pairs.size() && i < 32; ++i) {
    if (pair_satisfied(s, goal.pairs[i])) mask |= 1u << i;
  }
  return mask;
}

bool feasible(const Domain& d, const CState& s, const CAction& a) {
  if (a.type == ActionType::kNull) return true;
  if (a.area == kNone) return false;
  switch (a.type) {
    case ActionType::kOpen:
      return !s.open[a.area];
    case ActionType::kPick:
      return a.area != d.robot_hand && s.open[a.area] && s.held == kNone && a.object != kNone &&
             s.parent[a.object] == a.area;
    case ActionType::kPlace:
      return a.area != d.robot_hand && s.open[a.area] && s.held != kNone;
    case ActionType::kNull:
      return true;
  }
  return false;
}

StepOutcome step(const Domain& d, CState& s, const CGoal& goal, std::uint32_t& rewarded, const CAction& a) {
  const auto& cfg = d.rewards;
  if (a.type == ActionType::kNull) return {};
  if (!feasible(d, s, a)) return StepOutcome{-cfg.infeasible_cost, false, false};
  const std::uint32_t before = satisfied_mask(s, goal);
  StepOutcome out;
  out.reward = -(d.move_cost(s.robot_at, a.area) + cfg.manipulation_cost);
  s.robot_at = a.area;
  switch (a.type) {
    case ActionType::kOpen:
      s.open[a.area] = true;
      return out;
    case ActionType::kPick:
      s.parent[a.object] = d.robot_hand;
      s.held = a.object;
      s.held_origin = a.area;
      break;
    case ActionType::kPlace:
      s.parent[s.held] = a.area;
      s.held = kNone;
      s.held_origin = kNone;
      break;
    case ActionType::kNull:
      break;
  }
  const std::uint32_t after = satisfied_mask(s, goal);
  const std::uint32_t fresh = after & ~before & ~rewarded;
  out.reward += cfg.subgoal_reward * std::popcount(fresh);
  rewarded |= fresh;
  const std::uint32_t all = goal.pairs.size() >= 32 ? ~0u : (1u << goal.pairs.size()) - 1u;
  if (!goal.pairs.empty() && after == all && before != all) {
    out.completed = true;
    out.reward += cfg.completion_reward;
  }
  return out;
}

bool same_observation(const CState& a, const CState& b) {
  if (a.robot_at != b.robot_at || a.held != b.held || a.held_origin != b.held_origin || a.open != b.open) {
    return false;
  }
  const std::size_t n = a.parent.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Id pa = a.parent[i];
    const Id pb = b.parent[i];
    const Id va = (pa != kNone && a.open[pa]) ? pa : kNone;
    const Id vb = (pb != kNone && b.open[pb]) ? pb : kNone;
    if (va != vb) return false;
  }
  return true;
}

CAction rollout_action(const CState& s, std::span<const CPair> unreached) {
  if (unreached.empty()) return {};
  for (const auto& goal : unreached) {
    if (goal.target == kNone || goal.object == kNone || s.parent[goal.object] == kNone) continue;
    const Id parent_of_goal = s.parent[goal.object];
    if (parent_of_goal == goal.target) continue;
    if (s.held == goal.object) {
      if (!s.open[goal.target]) return CAction{ActionType::kOpen, goal.target, kNone};
      return CAction{ActionType::kPlace, goal.target, kNone};
    }
    if (s.held != kNone) {
      // Put the other object back where it came from.
      const Id origin = s.held_origin;
      if (origin == kNone) return {};
      if (!s.open[origin]) return CAction{ActionType::kOpen, origin, kNone};
      return CAction{ActionType::kPlace, origin, kNone};
    }
    if (!s.open[parent_of_goal]) return CAction{ActionType::kOpen, parent_of_goal, kNone};
    return CAction{ActionType::kPick, parent_of_goal, goal.object};
  }
  return {};
}

std::vector<CPair> unreached_pairs(const CState& s, const CGoal& goal) {
  std::vector<CPair> out;
  for (const auto& p : goal.pairs) {
    if (!pair_satisfied(s, p)) out.push_back(p);
  }
  return out;
}

}  // namespace tru::detail
