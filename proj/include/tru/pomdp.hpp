#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tru/reward.hpp"
#include "tru/scene_graph.hpp"

namespace tru {

/// One subgoal: `object` must end up inside `target`.
struct GoalPair {
  std::string object;
  std::string target;

  auto operator<=>(const GoalPair&) const = default;
};

/// A placement goal keeps the order its pairs were produced in (that order is
/// what prompts and rollouts see) but compares as a set.
class PlacementGoal {
 public:
  static constexpr std::size_t kMaxPairs = 8;

  PlacementGoal() = default;
  explicit PlacementGoal(std::vector<GoalPair> pairs);

  const std::vector<GoalPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  std::optional<std::string> target_of(std::string_view object) const;
  bool contains_object(std::string_view object) const { return target_of(object).has_value(); }

  /// Pairs sorted by (object, target).
  std::vector<GoalPair> canonical() const;

  bool operator==(const PlacementGoal& other) const { return canonical() == other.canonical(); }
  std::weak_ordering operator<=>(const PlacementGoal& other) const;

 private:
  std::vector<GoalPair> pairs_;
};

/// 1..kMaxPairs pairs with unique objects.
bool is_well_formed(const PlacementGoal& goal);

/// "a in X, b in Y" in stored order.
std::string to_string(const PlacementGoal& goal);

struct State {
  SceneGraph graph;
  PlacementGoal goal;

  bool operator==(const State&) const = default;
};

/// Throws Error(kInvalidGraph) if the graph is invalid or a goal object is
/// missing from it.
void validate(const State& s);

enum class ActionType { kOpen, kPick, kPlace, kNull };

/// Canonical order: Open < Pick < Place < Null, then area, then object.
struct Action {
  ActionType type = ActionType::kNull;
  std::string area;
  std::string object;

  static Action open(std::string area) { return {ActionType::kOpen, std::move(area), {}}; }
  static Action pick(std::string area, std::string object) {
    return {ActionType::kPick, std::move(area), std::move(object)};
  }
  static Action place(std::string area) { return {ActionType::kPlace, std::move(area), {}}; }
  static Action null() { return {}; }

  auto operator<=>(const Action&) const = default;
};

std::string to_string(const Action& a);
/// Inverse of to_string. Throws Error(kSchemaError).
Action parse_action(std::string_view text);

struct Observation {
  SceneGraph graph;  // already projected through visible()

  bool operator==(const Observation&) const = default;
};

/// Physical effect of an action on a graph, independent of any goal.
struct GraphStep {
  SceneGraph graph;
  bool feasible = true;
  double move_cost = 0.0;
  double manipulation_cost = 0.0;
};

struct StepResult {
  State next_state;
  double reward = 0.0;
  bool feasible = true;
  double executed_move_cost = 0.0;
  std::vector<GoalPair> newly_satisfied;  // pairs that earned the subgoal reward
  bool completed = false;                 // this step completed the goal
};

bool is_feasible(const SceneGraph& g, const Action& a);
bool is_feasible(const State& s, const Action& a);

/// Infeasible actions leave the graph untouched and report feasible = false;
/// the caller charges the penalty.
GraphStep apply_action(const SceneGraph& g, const Action& a, const RewardConfig& cfg);

bool pair_satisfied(const SceneGraph& g, const GoalPair& pair);
bool goal_satisfied(const SceneGraph& g, const PlacementGoal& goal);

/// Deterministic transition judged against s.goal. Pairs listed in
/// `already_rewarded` never earn the subgoal reward again.
StepResult transition(const State& s, const Action& a, const RewardConfig& cfg,
                      std::span<const GoalPair> already_rewarded = {});

Observation observe(const SceneGraph& g);
Observation observe(const State& s);

/// 1 when z matches the visible part of s_next, else 0.
double observation_likelihood(const State& s_next, const Observation& z);

}  // namespace tru
