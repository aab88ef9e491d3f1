#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tru/pomdp.hpp"

namespace tru {

struct Particle {
  State state;
  double weight = 0.0;
};

/// Weighted particle set. Particles are kept in canonical state order with
/// duplicates merged, which makes every operation order-independent.
class ParticleBelief {
 public:
  static constexpr double kPruneWeight = 1e-12;
  static constexpr double kNormTolerance = 1e-9;

  ParticleBelief() = default;
  /// Merges structurally equal states and drops weights below kPruneWeight.
  explicit ParticleBelief(std::vector<Particle> particles);

  const std::vector<Particle>& particles() const { return particles_; }
  std::size_t size() const { return particles_.size(); }
  bool empty() const { return particles_.empty(); }
  double total_weight() const;
  bool normalized() const;

  /// Copy with weights divided by total_weight(). Throws Error(kEmptyBelief).
  ParticleBelief normalized_copy() const;

 private:
  std::vector<Particle> particles_;
};

// Duplicate merging is not configurable: ParticleBelief always merges.
struct BeliefUpdateConfig {
  double epsilon = 0.7;
};

void validate(const BeliefUpdateConfig& cfg);

/// Key that orders and identifies states structurally.
std::string canonical_key(const State& s);

/// Advances every particle through the deterministic transition.
/// Throws Error(kEmptyBelief).
ParticleBelief predict(const ParticleBelief& b, const Action& a, const RewardConfig& cfg);

struct EliminationResult {
  ParticleBelief survivors;  // weights as they were, not renormalized
  double w_bf = 0.0;
  /// Goals seen fully satisfied while the task is not done. Callers append
  /// these to their failed-goal list.
  std::vector<PlacementGoal> wrong_goals;
};

EliminationResult eliminate(const ParticleBelief& b, const Observation& z, bool task_done,
                            const std::vector<PlacementGoal>& failed_goals);

/// True when the surviving mass is too small to trust on its own.
bool needs_supplement(double w_bf, const BeliefUpdateConfig& cfg);

/// Renormalizes b_bf, or merges in b_llm scaled by (1 - w_bf) when the
/// surviving weight fell under 1 - epsilon. Throws Error(kMissingSupplement)
/// or Error(kSpuriousSupplement) when b_llm's presence disagrees with the
/// threshold.
ParticleBelief hybrid_update(const ParticleBelief& b_bf, double w_bf, const std::optional<ParticleBelief>& b_llm,
                             const BeliefUpdateConfig& cfg);

/// Single most likely particle with weight 1. Ties go to the canonically
/// smallest state.
ParticleBelief collapse_to_max(const ParticleBelief& b);

/// Diagnostic text dump, particles in canonical order.
std::string dump(const ParticleBelief& b);

}  // namespace tru
