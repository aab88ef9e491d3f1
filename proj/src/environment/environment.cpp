#include <algorithm>
#include <chrono>
#include <set>

#include "tru/environment.hpp"
#include "tru/error.hpp"

namespace tru {

namespace {

std::vector<GoalPair> union_pairs(const TaskSpec& task) {
  std::vector<GoalPair> out;
  for (const auto& g : task.goal_set) {
    for (const auto& p : g.pairs()) {
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
  }
  return out;
}

bool any_goal_done(const SceneGraph& g, const TaskSpec& task) {
  return std::any_of(task.goal_set.begin(), task.goal_set.end(),
                     [&](const PlacementGoal& p) { return !p.empty() && goal_satisfied(g, p); });
}

std::uint64_t step_seed(std::uint64_t base, int step) {
  std::uint64_t x = base + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(step + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

EnvFeedback feedback(const SceneGraph& g, const TaskSpec& task) {
  std::set<std::string> satisfied;
  for (const auto& p : union_pairs(task)) {
    if (pair_satisfied(g, p)) satisfied.insert(p.object);
  }
  return EnvFeedback{any_goal_done(g, task), {satisfied.begin(), satisfied.end()}, observe(g)};
}

EnvStepResult step(const SceneGraph& g, const Action& a, const TaskSpec& task, const RewardConfig& cfg,
                   std::span<const GoalPair> already_rewarded) {
  auto applied = apply_action(g, a, cfg);
  EnvStepResult out{applied.graph, 0.0, applied.feasible, {}, feedback(applied.graph, task)};
  if (!applied.feasible) {
    out.reward = -cfg.infeasible_cost;
  } else if (a.type != ActionType::kNull) {
    out.reward = -(applied.move_cost + applied.manipulation_cost);
    for (const auto& p : union_pairs(task)) {
      const bool rewarded = std::find(already_rewarded.begin(), already_rewarded.end(), p) != already_rewarded.end();
      if (!rewarded && !pair_satisfied(g, p) && pair_satisfied(out.graph, p)) {
        out.newly_satisfied.push_back(p);
        out.reward += cfg.subgoal_reward;
      }
    }
    if (!any_goal_done(g, task) && any_goal_done(out.graph, task)) out.reward += cfg.completion_reward;
  }
  return out;
}

Environment::Environment(TaskSpec task, RewardConfig rewards, const std::filesystem::path& data_dir)
    : task_(std::move(task)),
      kitchen_(load_kitchen(task_.kitchen, data_dir)),
      rewards_(rewards),
      state_(initial_scene(task_, kitchen_)) {
  validate(rewards_);
}

EnvStepResult Environment::step(const Action& a) {
  auto result = tru::step(state_, a, task_, rewards_, rewarded_);
  for (const auto& p : result.newly_satisfied) rewarded_.push_back(p);
  state_ = result.graph;
  return result;
}

EpisodeLimits default_limits(const std::optional<Difficulty>& difficulty) {
  if (!difficulty) return EpisodeLimits{35, 600.0};
  switch (*difficulty) {
    case Difficulty::kEasy: return EpisodeLimits{25, 600.0};
    case Difficulty::kMedium: return EpisodeLimits{30, 600.0};
    case Difficulty::kHard: return EpisodeLimits{35, 600.0};
  }
  return EpisodeLimits{};
}

EpisodeMetrics run_episode(const TaskSpec& task, const AgentConfig& agent, const EpisodeLimits& limits,
                           const RewardConfig& env_rewards, HypothesisGenerator& gen,
                           const std::filesystem::path& data_dir) {
  using clock = std::chrono::steady_clock;
  validate(agent.planner);
  validate(agent.planner_rewards);
  validate(agent.belief);
  if (limits.step_limit < 1 || !(limits.time_limit > 0.0)) throw Error(ErrorCode::kConfigError, "limits must be positive");

  Environment env(task, env_rewards, data_dir);
  const GeneratorUsage usage_start = gen.usage();
  EpisodeMetrics m;
  EnvFeedback fb = env.feedback();
  ParticleBelief belief;
  std::vector<PlacementGoal> failed_goals;
  std::string history;
  Action last_action = Action::null();
  int idle = 0;

  auto context = [&] {
    return QueryContext{task.instruction, fb.observation, failed_goals, fb.satisfied_objects, history};
  };
  auto fail = [&](std::string reason) { m.failure_reason = std::move(reason); };

  for (int t = 0; t < limits.step_limit && !fb.done; ++t) {
    StepLog log;
    log.step = t;
    const auto start = clock::now();
    std::optional<HypothesisTree> tree;
    try {
      if (t == 0) {
        auto llm = build_llm_belief(context(), gen, agent.c1, agent.c2);
        log.supplemented = true;
        log.particles_generated = llm.tree.particle_count;
        tree = std::move(llm.tree);
        belief = std::move(llm.belief);
        log.w_bf = 0.0;
      } else {
        const auto predicted = predict(belief, last_action, agent.planner_rewards);
        auto elim = eliminate(predicted, fb.observation, fb.done, failed_goals);
        for (auto& g : elim.wrong_goals) {
          if (std::find(failed_goals.begin(), failed_goals.end(), g) == failed_goals.end()) failed_goals.push_back(g);
        }
        log.w_bf = elim.w_bf;
        if (needs_supplement(elim.w_bf, agent.belief)) {
          log.supplemented = true;
          std::optional<ParticleBelief> fresh;
          try {
            auto llm = build_llm_belief(context(), gen, agent.c1, agent.c2);
            log.particles_generated = llm.tree.particle_count;
            tree = std::move(llm.tree);
            fresh = std::move(llm.belief);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kEmptyResult) throw;
            fresh = ParticleBelief{};
          }
          belief = hybrid_update(elim.survivors, elim.w_bf, fresh, agent.belief);
        } else {
          belief = hybrid_update(elim.survivors, elim.w_bf, std::nullopt, agent.belief);
        }
      }
      if (belief.empty()) {
        fail("belief is empty and no hypotheses could be generated");
        break;
      }
      if (!belief.normalized()) belief = belief.normalized_copy();
      if (agent.collapse_belief) belief = collapse_to_max(belief);
      log.belief_size = belief.size();
      if (agent.observer) agent.observer(t, belief, tree ? &*tree : nullptr);

      PlannerConfig pcfg = agent.planner;
      pcfg.seed = step_seed(agent.planner.seed, t);
      auto plan = search(belief, pcfg, agent.planner_rewards);
      log.action = plan.action;
      log.plan = std::move(plan.stats);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kGeneratorFailure || e.code() == ErrorCode::kEmptyResult) {
        fail(std::string("agent failure: ") + e.what());
        break;
      }
      throw;
    }
    log.decision_time = std::chrono::duration<double>(clock::now() - start).count();
    m.planning_time += log.decision_time;
    if (m.planning_time > limits.time_limit) {
      fail("planning time limit exceeded");
      break;
    }

    const auto result = env.step(log.action);
    log.reward = result.reward;
    log.feasible = result.feasible;
    m.cumulative_reward += result.reward;
    ++m.executed_steps;
    fb = result.feedback;
    last_action = log.action;
    history += to_string(log.action) + (result.feasible ? "\n" : " (failed)\n");
    m.log.push_back(std::move(log));

    idle = last_action.type == ActionType::kNull ? idle + 1 : 0;
    if (!fb.done && agent.max_idle_steps > 0 && idle >= agent.max_idle_steps) {
      fail("planner kept choosing Null");
      break;
    }
  }

  m.success = fb.done && m.failure_reason.empty();
  if (!m.success && m.failure_reason.empty()) m.failure_reason = "step limit reached";
  m.steps = m.success ? m.executed_steps : limits.step_limit;
  m.generator_usage = gen.usage() - usage_start;
  return m;
}

}  // namespace tru
