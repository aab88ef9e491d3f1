#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tru/environment.hpp"

namespace tru {

struct RunConfig {
  std::string kitchen = "one_wall";
  std::optional<std::string> task_file;
  std::optional<Difficulty> generate;  // used when no task file is given
  std::string generator = "mock";      // "mock" or "llm"
  MockProfile mock;
  LlmConfig llm;
  std::string reward_preset = std::string(kModelDefaultPreset);
  std::string planner_reward_preset = std::string(kModelDefaultPreset);
  PlannerConfig planner;
  BeliefUpdateConfig belief;
  int c1 = 3;
  int c2 = 3;
  bool collapse_belief = false;
  std::optional<int> step_limit;  // defaults by difficulty
  double time_limit = 600.0;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool dump_belief = false;
};

/// Canonical JSON of everything that affects results. The output directory is
/// left out so that relocating a run keeps its hash.
std::string config_json(const RunConfig& cfg);
/// 16 hex digits of FNV-1a over config_json.
std::string config_hash(const RunConfig& cfg);

/// Throws Error(kConfigError) and friends before any episode runs.
void validate(const RunConfig& cfg);

TaskSpec resolve_task(const RunConfig& cfg);
std::unique_ptr<HypothesisGenerator> make_generator(const RunConfig& cfg, const TaskSpec& task);
AgentConfig agent_config(const RunConfig& cfg);
EpisodeLimits episode_limits(const RunConfig& cfg, const TaskSpec& task);

struct EpisodeRun {
  TaskSpec task;
  EpisodeMetrics metrics;
};

/// Validates cfg, builds the task and generator, and runs one episode.
EpisodeRun run_once(const RunConfig& cfg);

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kTaskFailure = 1;
inline constexpr int kConfigError = 2;
}  // namespace exit_code

/// Writes config.json, metrics.json and steps.jsonl into cfg.out_dir.
int cmd_run(const RunConfig& cfg, std::ostream& log);

/// n seeded tasks per difficulty. Writes episodes.jsonl, aggregate.csv and
/// plot_data.csv into cfg.out_dir.
int cmd_bench(const RunConfig& cfg, int n, const std::vector<Difficulty>& difficulties, std::ostream& log);

/// Writes a generated task to `out` (stdout when empty).
int cmd_generate(const std::string& kitchen, Difficulty difficulty, std::uint64_t seed, const std::string& out,
                 std::ostream& log);

/// Summary of a belief dump, task file, or metrics/tree-stats file. Throws
/// Error(kUnknownArtifact).
std::string cmd_inspect(const std::filesystem::path& artifact);

/// Entry point shared by the trupomdp tool and the tests.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tru
