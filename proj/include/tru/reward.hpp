#pragma once

#include <string>
#include <string_view>

namespace tru {

// All values are non-negative magnitudes; signs are applied by the
// transition function.
struct RewardConfig {
  double manipulation_cost = 5.0;
  double nav_scale = 2.0;
  double nav_max = 27.0;
  double infeasible_cost = 100.0;
  double subgoal_reward = 200.0;
  double completion_reward = 200.0;

  bool operator==(const RewardConfig&) const = default;
};

inline constexpr std::string_view kModelDefaultPreset = "model-default";
inline constexpr std::string_view kExperimentPreset = "experiment";

RewardConfig model_default_rewards();
RewardConfig experiment_rewards();

/// Throws Error(kConfigError) for names other than the two reserved presets.
RewardConfig reward_preset(std::string_view name);

void validate(const RewardConfig& cfg);

}  // namespace tru
