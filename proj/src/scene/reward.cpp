#include "tru/reward.hpp"

#include "tru/error.hpp"

namespace tru {

RewardConfig model_default_rewards() { return RewardConfig{}; }

RewardConfig experiment_rewards() {
  RewardConfig cfg;
  cfg.infeasible_cost = 25.0;
  cfg.subgoal_reward = 0.0;
  cfg.completion_reward = 1000.0;
  return cfg;
}

RewardConfig reward_preset(std::string_view name) {
  if (name == kModelDefaultPreset) return model_default_rewards();
  if (name == kExperimentPreset) return experiment_rewards();
  throw Error(ErrorCode::kConfigError, "unknown reward preset '" + std::string(name) + "'");
}

void validate(const RewardConfig& cfg) {
  const double fields[] = {cfg.manipulation_cost, cfg.nav_scale,      cfg.nav_max,
                           cfg.infeasible_cost,   cfg.subgoal_reward, cfg.completion_reward};
  for (double v : fields) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kConfigError, "reward config values must be non-negative");
  }
}

}  // namespace tru
