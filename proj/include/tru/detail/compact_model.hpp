#pragma once

// Integer-indexed mirror of the POMDP model used inside the search tree. The
// string-keyed types in pomdp.hpp stay the reference semantics; everything
// here is checked against them by the planner tests.

#include <bitset>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tru/pomdp.hpp"

namespace tru::detail {

using Id = std::int16_t;
inline constexpr Id kNone = -1;
inline constexpr std::size_t kMaxAreas = 128;

/// Everything shared by the states of one search: the area catalog, the union
/// of object names over all particles, and precomputed travel costs.
struct Domain {
  std::shared_ptr<const AreaCatalog> catalog;
  std::vector<std::string> objects;  // sorted
  std::vector<int> area_rank;        // lexicographic rank of each area name
  std::vector<double> travel;        // area_count x area_count
  RewardConfig rewards;
  Id robot_hand = kNone;

  std::size_t area_count() const { return area_rank.size(); }
  Id object_id(std::string_view name) const;
  double move_cost(Id from, Id to) const { return travel[static_cast<std::size_t>(from) * area_count() + to]; }
};

struct CState {
  std::bitset<kMaxAreas> open;
  std::vector<Id> parent;  // per domain object; kNone when absent
  Id robot_at = kNone;
  Id held = kNone;
  Id held_origin = kNone;

  bool operator==(const CState&) const = default;
};

struct CPair {
  Id object = kNone;
  Id target = kNone;  // kNone when the target names no known area
};

struct CGoal {
  std::vector<CPair> pairs;
};

struct CAction {
  ActionType type = ActionType::kNull;
  Id area = kNone;
  Id object = kNone;

  bool operator==(const CAction&) const = default;
};

/// Canonical action order, matching Action's operator<.
bool action_less(const Domain& d, const CAction& a, const CAction& b);

/// Builds a domain over the union of objects found in `graphs`, all of which
/// must share one catalog with at most kMaxAreas areas.
Domain build_domain(std::span<const SceneGraph* const> graphs, const RewardConfig& rewards);

CState compile(const Domain& d, const SceneGraph& g);
CGoal compile(const Domain& d, const PlacementGoal& goal);
CAction compile(const Domain& d, const Action& a);
Action to_action(const Domain& d, const CAction& a);

bool pair_satisfied(const CState& s, const CPair& p);
bool goal_complete(const CState& s, const CGoal& goal);
/// Bit i set when pair i is currently satisfied.
std::uint32_t satisfied_mask(const CState& s, const CGoal& goal);

struct StepOutcome {
  double reward = 0.0;
  bool feasible = true;
  bool completed = false;
};

bool feasible(const Domain& d, const CState& s, const CAction& a);

/// Applies `a` in place. `rewarded` holds the pairs that already earned their
/// subgoal reward and is updated with newly satisfied ones.
StepOutcome step(const Domain& d, CState& s, const CGoal& goal, std::uint32_t& rewarded, const CAction& a);

/// True when both states show the same observation.
bool same_observation(const CState& a, const CState& b);

/// The rule-based rollout policy: walks `unreached` in order and returns the
/// first useful action for it.
CAction rollout_action(const CState& s, std::span<const CPair> unreached);

/// Pairs of `goal` not yet satisfied, in goal order.
std::vector<CPair> unreached_pairs(const CState& s, const CGoal& goal);

}  // namespace tru::detail
