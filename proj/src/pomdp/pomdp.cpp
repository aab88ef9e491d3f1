#include "tru/pomdp.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "tru/error.hpp"

namespace tru {

PlacementGoal::PlacementGoal(std::vector<GoalPair> pairs) : pairs_(std::move(pairs)) {}

std::optional<std::string> PlacementGoal::target_of(std::string_view object) const {
  for (const auto& p : pairs_) {
    if (p.object == object) return p.target;
  }
  return std::nullopt;
}

std::vector<GoalPair> PlacementGoal::canonical() const {
  auto sorted = pairs_;
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

std::weak_ordering PlacementGoal::operator<=>(const PlacementGoal& other) const {
  const auto a = canonical();
  const auto b = other.canonical();
  return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
}

bool is_well_formed(const PlacementGoal& goal) {
  if (goal.empty() || goal.size() > PlacementGoal::kMaxPairs) return false;
  std::set<std::string> seen;
  for (const auto& p : goal.pairs()) {
    if (p.object.empty() || p.target.empty() || !seen.insert(p.object).second) return false;
  }
  return true;
}

std::string to_string(const PlacementGoal& goal) {
  std::string out;
  for (const auto& p : goal.pairs()) {
    if (!out.empty()) out += ", ";
    out += p.object + " in " + p.target;
  }
  return out;
}

void validate(const State& s) {
  validate(s.graph);
  for (const auto& p : s.goal.pairs()) {
    if (!s.graph.has_object(p.object)) {
      throw Error(ErrorCode::kInvalidGraph, "goal object '" + p.object + "' is not in the state's graph");
    }
  }
}

std::string to_string(const Action& a) {
  switch (a.type) {
    case ActionType::kOpen: return "Open(" + a.area + ")";
    case ActionType::kPick: return "Pick(" + a.area + ", " + a.object + ")";
    case ActionType::kPlace: return "Place(" + a.area + ")";
    case ActionType::kNull: return "Null";
  }
  return "Null";
}

Action parse_action(std::string_view text) {
  auto fail = [&]() -> Action { throw Error(ErrorCode::kSchemaError, "cannot parse action '" + std::string(text) + "'"); };
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return std::string(s);
  };
  text = std::string_view(text.data(), text.size());
  if (trim(text) == "Null") return Action::null();
  const auto open_paren = text.find('(');
  if (open_paren == std::string_view::npos || text.back() != ')') return fail();
  const auto name = trim(text.substr(0, open_paren));
  const auto args = text.substr(open_paren + 1, text.size() - open_paren - 2);
  if (name == "Open") return Action::open(trim(args));
  if (name == "Place") return Action::place(trim(args));
  if (name == "Pick") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) return fail();
    return Action::pick(trim(args.substr(0, comma)), trim(args.substr(comma + 1)));
  }
  return fail();
}

bool is_feasible(const SceneGraph& g, const Action& a) {
  if (a.type == ActionType::kNull) return true;
  const auto area = g.catalog().find(a.area);
  if (!area) return false;
  const bool is_hand = g.catalog()[*area].kind == AreaKind::kRobotHand;
  switch (a.type) {
    case ActionType::kOpen:
      return !g.is_open(*area);
    case ActionType::kPick: {
      if (is_hand || !g.is_open(*area) || g.held_object()) return false;
      const auto* object = g.find_object(a.object);
      return object && object->parent == *area;
    }
    case ActionType::kPlace:
      return !is_hand && g.is_open(*area) && g.held_object().has_value();
    case ActionType::kNull:
      return true;
  }
  return false;
}

bool is_feasible(const State& s, const Action& a) { return is_feasible(s.graph, a); }

GraphStep apply_action(const SceneGraph& g, const Action& a, const RewardConfig& cfg) {
  if (a.type == ActionType::kNull) return GraphStep{g, true, 0.0, 0.0};
  if (!is_feasible(g, a)) return GraphStep{g, false, 0.0, 0.0};
  GraphStep step{g, true, move_cost(g, g.robot_at(), a.area, cfg), cfg.manipulation_cost};
  step.graph = step.graph.with_robot_at(a.area);
  switch (a.type) {
    case ActionType::kOpen:
      step.graph = set_area_open(step.graph, a.area);
      break;
    case ActionType::kPick:
      step.graph = move_object(step.graph, a.object, AreaCatalog::kRobotHandId);
      break;
    case ActionType::kPlace:
      step.graph = move_object(step.graph, *g.held_object(), a.area);
      break;
    case ActionType::kNull:
      break;
  }
  return step;
}

bool pair_satisfied(const SceneGraph& g, const GoalPair& pair) {
  const auto* node = g.find_object(pair.object);
  return node && g.area_id(node->parent) == pair.target;
}

bool goal_satisfied(const SceneGraph& g, const PlacementGoal& goal) {
  return std::all_of(goal.pairs().begin(), goal.pairs().end(),
                     [&](const GoalPair& p) { return pair_satisfied(g, p); });
}

StepResult transition(const State& s, const Action& a, const RewardConfig& cfg,
                      std::span<const GoalPair> already_rewarded) {
  auto step = apply_action(s.graph, a, cfg);
  StepResult result{State{std::move(step.graph), s.goal}, 0.0, step.feasible, step.move_cost, {}, false};
  if (!step.feasible) {
    result.reward = -cfg.infeasible_cost;
    return result;
  }
  if (a.type == ActionType::kNull) return result;
  result.reward = -(step.move_cost + step.manipulation_cost);
  for (const auto& pair : s.goal.pairs()) {
    const bool before = pair_satisfied(s.graph, pair);
    const bool after = pair_satisfied(result.next_state.graph, pair);
    const bool rewarded =
        std::find(already_rewarded.begin(), already_rewarded.end(), pair) != already_rewarded.end();
    if (after && !before && !rewarded) {
      result.newly_satisfied.push_back(pair);
      result.reward += cfg.subgoal_reward;
    }
  }
  if (!s.goal.empty() && goal_satisfied(result.next_state.graph, s.goal) && !goal_satisfied(s.graph, s.goal)) {
    result.completed = true;
    result.reward += cfg.completion_reward;
  }
  return result;
}

Observation observe(const SceneGraph& g) { return Observation{visible(g)}; }
Observation observe(const State& s) { return observe(s.graph); }

double observation_likelihood(const State& s_next, const Observation& z) {
  return visible(s_next.graph) == z.graph ? 1.0 : 0.0;
}

}  // namespace tru
