#include <nlohmann/json.hpp>

#include "tru/environment.hpp"

namespace tru {

std::string metrics_to_json(const EpisodeMetrics& m, bool include_timing, int indent) {
  using ojson = nlohmann::ordered_json;
  ojson doc;
  doc["success"] = m.success;
  doc["cumulative_reward"] = m.cumulative_reward;
  doc["steps"] = m.steps;
  doc["executed_steps"] = m.executed_steps;
  if (include_timing) doc["planning_time"] = m.planning_time;
  ojson usage{{"prompt_tokens", m.generator_usage.prompt_tokens},
              {"completion_tokens", m.generator_usage.completion_tokens},
              {"query_count", m.generator_usage.query_count}};
  if (include_timing) usage["wall_time"] = m.generator_usage.wall_time;
  doc["generator_usage"] = std::move(usage);
  doc["failure_reason"] = m.failure_reason;
  ojson log = ojson::array();
  for (const auto& s : m.log) {
    ojson entry{{"step", s.step},
                {"action", to_string(s.action)},
                {"reward", s.reward},
                {"feasible", s.feasible},
                {"w_bf", s.w_bf},
                {"supplemented", s.supplemented},
                {"belief_size", s.belief_size},
                {"particles_generated", s.particles_generated}};
    ojson plan{{"trials", s.plan.trials},
               {"expansions", s.plan.expansions},
               {"tree_nodes", s.plan.tree_nodes},
               {"root_lower", s.plan.root_lower},
               {"root_upper", s.plan.root_upper},
               {"converged", s.plan.converged}};
    if (include_timing) {
      plan["wall_time"] = s.plan.wall_time;
      entry["decision_time"] = s.decision_time;
    }
    entry["plan"] = std::move(plan);
    log.push_back(std::move(entry));
  }
  doc["log"] = std::move(log);
  return doc.dump(indent);
}

}  // namespace tru
