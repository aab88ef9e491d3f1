#include <cstdio>

#include <nlohmann/json.hpp>

#include "tru/cli.hpp"
#include "tru/error.hpp"

namespace tru {

std::string config_json(const RunConfig& cfg) {
  using ojson = nlohmann::ordered_json;
  ojson doc;
  doc["kitchen"] = cfg.kitchen;
  doc["task_file"] = cfg.task_file ? ojson(*cfg.task_file) : ojson(nullptr);
  doc["generate"] = cfg.generate ? ojson(to_string(*cfg.generate)) : ojson(nullptr);
  doc["generator"] = cfg.generator;
  if (cfg.generator == "mock") {
    doc["mock"] = {{"true_goal_weight", cfg.mock.true_goal_weight},
                   {"true_location_weight", cfg.mock.true_location_weight},
                   {"include_true_goal", cfg.mock.include_true_goal},
                   {"include_true_location", cfg.mock.include_true_location},
                   {"phantom_probability", cfg.mock.phantom_probability}};
  } else {
    doc["llm"] = {{"endpoint", cfg.llm.endpoint},
                  {"model", cfg.llm.model},
                  {"api_key_env", cfg.llm.api_key_env},
                  {"temperature", cfg.llm.temperature},
                  {"max_retries", cfg.llm.max_retries}};
  }
  doc["reward_preset"] = cfg.reward_preset;
  doc["planner_reward_preset"] = cfg.planner_reward_preset;
  doc["planner"] = {{"num_scenarios", cfg.planner.num_scenarios}, {"max_depth", cfg.planner.max_depth},
                    {"rollout_depth", cfg.planner.rollout_depth}, {"discount", cfg.planner.discount},
                    {"time_budget", cfg.planner.time_budget},     {"max_trials", cfg.planner.max_trials},
                    {"xi", cfg.planner.xi}};
  doc["epsilon"] = cfg.belief.epsilon;
  doc["c1"] = cfg.c1;
  doc["c2"] = cfg.c2;
  doc["collapse_belief"] = cfg.collapse_belief;
  doc["step_limit"] = cfg.step_limit ? ojson(*cfg.step_limit) : ojson(nullptr);
  doc["time_limit"] = cfg.time_limit;
  doc["seed"] = cfg.seed;
  return doc.dump();
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : config_json(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

void validate(const RunConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigError, what); };
  if (cfg.generator != "mock" && cfg.generator != "llm") fail("generator must be 'mock' or 'llm'");
  reward_preset(cfg.reward_preset);
  reward_preset(cfg.planner_reward_preset);
  validate(cfg.planner);
  validate(cfg.belief);
  if (cfg.c1 < 1 || cfg.c2 < 1) fail("C1 and C2 must be at least 1");
  if (cfg.step_limit && *cfg.step_limit < 1) fail("step limit must be at least 1");
  if (!(cfg.time_limit > 0.0)) fail("time limit must be positive");
  if (!cfg.task_file && !cfg.generate) fail("give either --task or --generate");
  if (cfg.task_file && cfg.generate) fail("--task and --generate are mutually exclusive");
  if (!cfg.task_file) load_kitchen(cfg.kitchen);
  if (cfg.generator == "llm") validate(cfg.llm);
}

TaskSpec resolve_task(const RunConfig& cfg) {
  if (cfg.task_file) return load_task_file(*cfg.task_file);
  return generate_task(cfg.kitchen, *cfg.generate, cfg.seed);
}

std::unique_ptr<HypothesisGenerator> make_generator(const RunConfig& cfg, const TaskSpec& task) {
  if (cfg.generator == "llm") return std::make_unique<LlmGenerator>(cfg.llm);
  return std::make_unique<MockGenerator>(mock_truth(task), cfg.seed, cfg.mock);
}

AgentConfig agent_config(const RunConfig& cfg) {
  AgentConfig a;
  a.planner = cfg.planner;
  a.planner.seed = cfg.seed;
  a.planner_rewards = reward_preset(cfg.planner_reward_preset);
  a.belief = cfg.belief;
  a.c1 = cfg.c1;
  a.c2 = cfg.c2;
  a.collapse_belief = cfg.collapse_belief;
  return a;
}

EpisodeLimits episode_limits(const RunConfig& cfg, const TaskSpec& task) {
  EpisodeLimits limits = default_limits(task.difficulty);
  if (cfg.step_limit) limits.step_limit = *cfg.step_limit;
  limits.time_limit = cfg.time_limit;
  return limits;
}

EpisodeRun run_once(const RunConfig& cfg) {
  validate(cfg);
  EpisodeRun run{resolve_task(cfg), {}};
  auto gen = make_generator(cfg, run.task);
  run.metrics = run_episode(run.task, agent_config(cfg), episode_limits(cfg, run.task),
                            reward_preset(cfg.reward_preset), *gen);
  return run;
}

}  // namespace tru
