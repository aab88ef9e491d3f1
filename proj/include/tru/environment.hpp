#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tru/hypotheses.hpp"
#include "tru/kitchen.hpp"
#include "tru/planner.hpp"

namespace tru {

enum class Difficulty { kEasy, kMedium, kHard };

std::string to_string(Difficulty d);
/// Accepts "easy", "medium", "hard". Throws Error(kInvalidDifficulty).
Difficulty parse_difficulty(std::string_view text);

struct Placement {
  std::string area;
  std::string object;

  bool operator==(const Placement&) const = default;
};

struct TaskSpec {
  std::string kitchen;
  std::string instruction;
  std::vector<Placement> placements;
  std::string robot_name = "Fetch";
  std::string robot_location;
  std::optional<std::string> object_in_hand;
  std::vector<PlacementGoal> goal_set;
  std::optional<Difficulty> difficulty;
  std::optional<std::uint64_t> seed;
  /// Whether serialization writes the "meta" block (kitchen, difficulty,
  /// seed). Documents without one round-trip without it.
  bool emit_meta = true;
};

/// Parses a task document. When it names no kitchen, the first shipped
/// layout containing every referenced area is used. Throws
/// Error(kSchemaError) with a JSON path, Error(kUnknownArea) or
/// Error(kUnknownKitchen).
TaskSpec load_task(std::string_view json_text, const std::filesystem::path& data_dir = default_data_dir());
TaskSpec load_task_file(const std::filesystem::path& path, const std::filesystem::path& data_dir = default_data_dir());

/// Task JSON with four-space indentation and the loader's key order.
std::string serialize_task(const TaskSpec& task);

/// Re-checks every reference against the kitchen. Same errors as load_task.
void validate(const TaskSpec& task, const Kitchen& kitchen);

/// True when every object of `goal` exists in the task and every target is a
/// placeable area.
bool goal_achievable(const TaskSpec& task, const Kitchen& kitchen, const PlacementGoal& goal);

struct GenerateOptions {
  double hidden_fraction = 0.5;
  int total_objects = 20;
};

/// Seeded procedural task. Throws Error(kUnknownKitchen).
TaskSpec generate_task(std::string_view kitchen, Difficulty difficulty, std::uint64_t seed,
                       const GenerateOptions& options = {}, const std::filesystem::path& data_dir = default_data_dir());

/// Ground-truth scene at the start of the task.
SceneGraph initial_scene(const TaskSpec& task, const Kitchen& kitchen);

/// Oracle answers for MockGenerator.
MockTruth mock_truth(const TaskSpec& task);

struct EnvFeedback {
  bool done = false;
  std::vector<std::string> satisfied_objects;  // sorted
  Observation observation;
};

EnvFeedback feedback(const SceneGraph& g, const TaskSpec& task);

struct EnvStepResult {
  SceneGraph graph;
  double reward = 0.0;
  bool feasible = true;
  std::vector<GoalPair> newly_satisfied;
  EnvFeedback feedback;
};

/// Ground-truth transition. Subgoal rewards count pairs of any goal in the
/// goal set that are not in `already_rewarded`; completion pays once some
/// whole goal becomes satisfied.
EnvStepResult step(const SceneGraph& g, const Action& a, const TaskSpec& task, const RewardConfig& cfg,
                   std::span<const GoalPair> already_rewarded = {});

/// Ground-truth host that remembers which pairs were already rewarded.
class Environment {
 public:
  Environment(TaskSpec task, RewardConfig rewards, const std::filesystem::path& data_dir = default_data_dir());

  const TaskSpec& task() const { return task_; }
  const Kitchen& kitchen() const { return kitchen_; }
  const SceneGraph& state() const { return state_; }
  EnvFeedback feedback() const { return tru::feedback(state_, task_); }
  EnvStepResult step(const Action& a);

 private:
  TaskSpec task_;
  Kitchen kitchen_;
  RewardConfig rewards_;
  SceneGraph state_;
  std::vector<GoalPair> rewarded_;
};

struct EpisodeLimits {
  int step_limit = 35;
  double time_limit = 600.0;  // total agent decision time, seconds
};

/// 25/30/35 steps by difficulty; 35 when the task has none.
EpisodeLimits default_limits(const std::optional<Difficulty>& difficulty);

struct AgentConfig {
  PlannerConfig planner;
  /// Rewards the planner optimizes; the environment scores with its own.
  RewardConfig planner_rewards;
  BeliefUpdateConfig belief;
  int c1 = 3;
  int c2 = 3;
  /// Ablation: plan on the single heaviest particle only.
  bool collapse_belief = false;
  /// Consecutive Null actions after which the episode is abandoned.
  int max_idle_steps = 3;
  /// Called with the belief the planner sees at each step, plus the tree of
  /// hypotheses when one was built on that step.
  std::function<void(int step, const ParticleBelief&, const HypothesisTree*)> observer;
};

struct StepLog {
  int step = 0;
  Action action;
  double reward = 0.0;
  bool feasible = true;
  double w_bf = 1.0;
  bool supplemented = false;
  std::size_t belief_size = 0;
  std::size_t particles_generated = 0;
  PlannerStats plan;
  double decision_time = 0.0;
};

struct EpisodeMetrics {
  double cumulative_reward = 0.0;
  bool success = false;
  int steps = 0;           // step_limit on failure
  int executed_steps = 0;  // actions actually taken
  double planning_time = 0.0;
  GeneratorUsage generator_usage;
  std::string failure_reason;
  std::vector<StepLog> log;
};

/// Runs one episode of the observe, update, plan, act loop. Generator
/// failures end the episode as a failure instead of propagating.
EpisodeMetrics run_episode(const TaskSpec& task, const AgentConfig& agent, const EpisodeLimits& limits,
                           const RewardConfig& env_rewards, HypothesisGenerator& gen,
                           const std::filesystem::path& data_dir = default_data_dir());

/// Metrics as JSON text. Wall-clock fields are omitted when
/// `include_timing` is false, which makes the output reproducible.
std::string metrics_to_json(const EpisodeMetrics& m, bool include_timing = true, int indent = 2);

}  // namespace tru
