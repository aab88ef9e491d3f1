#pragma once

#include <cstdint>
#include <vector>

#include "tru/belief.hpp"

namespace tru {

struct PlannerConfig {
  int num_scenarios = 30;
  int max_depth = 20;
  int rollout_depth = 10;
  double discount = 1.0;
  /// Wall-clock cap per call, in seconds. Leaves room under a 5 s decision
  /// for the belief update and the last trial.
  double time_budget = 4.0;
  /// Trial cap per call; 0 means unlimited. Unlike the time budget this makes
  /// the search reproducible across machines.
  int max_trials = 2000;
  std::uint64_t seed = 0;
  /// Workers used when expanding a node. 1 is the reference mode.
  int threads = 1;
  /// Fraction of the root gap a child must exceed to be explored.
  double xi = 0.95;
};

void validate(const PlannerConfig& cfg);

struct Scenario {
  std::size_t particle_index = 0;
  double weight = 0.0;
};

/// All particles with their own weights when k covers the belief, otherwise k
/// weighted draws with replacement, duplicates merged with weight count/k.
std::vector<Scenario> sample_scenarios(const ParticleBelief& b, int k, std::uint64_t seed);

/// Throws Error(kEmptyBelief).
std::vector<Action> dynamic_actions(const ParticleBelief& b);

/// Rule-based default policy. `unreached` holds (area, object) goal pairs
/// still to be achieved, in priority order.
Action rollout_policy(const State& s, const std::vector<std::pair<std::string, std::string>>& unreached);

/// Return of simulating rollout_policy from s for up to `depth` steps.
double rollout_value(const State& s, int depth, const RewardConfig& cfg, double discount);

struct ActionBounds {
  Action action;
  double lower = 0.0;
  double upper = 0.0;
};

struct PlannerStats {
  int trials = 0;
  int expansions = 0;
  std::size_t tree_nodes = 0;
  double root_lower = 0.0;
  double root_upper = 0.0;
  double wall_time = 0.0;
  bool converged = false;
  std::vector<ActionBounds> root_actions;
  /// Depth of each expanded node, in expansion order.
  std::vector<int> expansion_trace;
};

struct PlanResult {
  Action action;
  PlannerStats stats;
};

/// Belief-tree search from b. Throws Error(kEmptyBelief).
PlanResult search(const ParticleBelief& b, const PlannerConfig& cfg, const RewardConfig& rcfg);

Action plan(const ParticleBelief& b, const PlannerConfig& cfg, const RewardConfig& rcfg);

}  // namespace tru
