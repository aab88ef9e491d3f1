#include "tru/belief.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "tru/error.hpp"

namespace tru {

namespace {

std::string format_weight(double w) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.12f", w);
  return buffer;
}

std::vector<Particle> merge(std::vector<Particle> particles) {
  std::vector<std::pair<std::string, std::size_t>> keyed;
  keyed.reserve(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) keyed.emplace_back(canonical_key(particles[i].state), i);
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Particle> out;
  out.reserve(particles.size());
  const std::string* last = nullptr;
  for (const auto& [key, index] : keyed) {
    if (last && *last == key) {
      out.back().weight += particles[index].weight;
    } else {
      out.push_back(std::move(particles[index]));
    }
    last = &key;
  }
  std::erase_if(out, [](const Particle& p) { return !(p.weight >= ParticleBelief::kPruneWeight); });
  return out;
}

}  // namespace

ParticleBelief::ParticleBelief(std::vector<Particle> particles) : particles_(merge(std::move(particles))) {}

double ParticleBelief::total_weight() const {
  return std::accumulate(particles_.begin(), particles_.end(), 0.0,
                         [](double acc, const Particle& p) { return acc + p.weight; });
}

bool ParticleBelief::normalized() const {
  return !particles_.empty() && std::abs(total_weight() - 1.0) <= kNormTolerance;
}

ParticleBelief ParticleBelief::normalized_copy() const {
  const double total = total_weight();
  if (particles_.empty() || !(total > 0.0)) throw Error(ErrorCode::kEmptyBelief, "cannot normalize an empty belief");
  ParticleBelief out = *this;
  for (auto& p : out.particles_) p.weight /= total;
  return out;
}

void validate(const BeliefUpdateConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) {
    throw Error(ErrorCode::kConfigError, "epsilon must lie strictly between 0 and 1");
  }
}

std::string canonical_key(const State& s) {
  std::string key = to_canonical_string(s.graph);
  key += "goal:";
  for (const auto& p : s.goal.canonical()) {
    key += ' ';
    key += p.object;
    key += "->";
    key += p.target;
  }
  return key;
}

ParticleBelief predict(const ParticleBelief& b, const Action& a, const RewardConfig& cfg) {
  if (b.empty()) throw Error(ErrorCode::kEmptyBelief, "predict on an empty belief");
  if (a.type == ActionType::kNull) return b;
  std::vector<Particle> next;
  next.reserve(b.size());
  for (const auto& p : b.particles()) next.push_back(Particle{transition(p.state, a, cfg).next_state, p.weight});
  return ParticleBelief(std::move(next));
}

EliminationResult eliminate(const ParticleBelief& b, const Observation& z, bool task_done,
                            const std::vector<PlacementGoal>& failed_goals) {
  EliminationResult result;
  std::vector<Particle> kept;
  for (const auto& p : b.particles()) {
    if (observation_likelihood(p.state, z) == 0.0) continue;
    if (std::find(failed_goals.begin(), failed_goals.end(), p.state.goal) != failed_goals.end()) continue;
    if (!task_done && goal_satisfied(z.graph, p.state.goal)) {
      if (std::find(result.wrong_goals.begin(), result.wrong_goals.end(), p.state.goal) == result.wrong_goals.end()) {
        result.wrong_goals.push_back(p.state.goal);
      }
      continue;
    }
    kept.push_back(p);
  }
  result.survivors = ParticleBelief(std::move(kept));
  result.w_bf = result.survivors.total_weight();
  return result;
}

// 1 - 0.7 is 0.30000000000000004 in binary, so compare with a little slack to
// keep w_bf = 0.3 on the no-supplement side.
bool needs_supplement(double w_bf, const BeliefUpdateConfig& cfg) { return w_bf < 1.0 - cfg.epsilon - 1e-12; }

ParticleBelief hybrid_update(const ParticleBelief& b_bf, double w_bf, const std::optional<ParticleBelief>& b_llm,
                             const BeliefUpdateConfig& cfg) {
  validate(cfg);
  const bool supplement = needs_supplement(w_bf, cfg);
  if (supplement && !b_llm) {
    throw Error(ErrorCode::kMissingSupplement, "surviving weight below threshold but no supplement given");
  }
  if (!supplement && b_llm) {
    throw Error(ErrorCode::kSpuriousSupplement, "supplement given although surviving weight is above threshold");
  }
  if (!supplement) {
    std::vector<Particle> out = b_bf.particles();
    for (auto& p : out) p.weight /= w_bf;
    return ParticleBelief(std::move(out));
  }
  std::vector<Particle> out = b_bf.particles();
  const double scale = 1.0 - w_bf;
  for (const auto& p : b_llm->particles()) out.push_back(Particle{p.state, p.weight * scale});
  return ParticleBelief(std::move(out));
}

ParticleBelief collapse_to_max(const ParticleBelief& b) {
  if (b.empty()) throw Error(ErrorCode::kEmptyBelief, "collapse of an empty belief");
  const Particle* best = &b.particles().front();
  for (const auto& p : b.particles()) {
    if (p.weight > best->weight) best = &p;
  }
  return ParticleBelief({Particle{best->state, 1.0}});
}

std::string dump(const ParticleBelief& b) {
  std::ostringstream out;
  out << "# belief particles=" << b.size() << " total_weight=" << format_weight(b.total_weight()) << '\n';
  std::size_t index = 0;
  for (const auto& p : b.particles()) {
    out << "particle " << index++ << " weight=" << format_weight(p.weight) << '\n';
    out << "  goal: " << to_string(p.state.goal) << '\n';
    out << "  robot_at: " << p.state.graph.robot_at() << '\n';
    out << "  held: " << p.state.graph.held_object().value_or("-") << '\n';
    out << "  objects:";
    for (const auto& o : p.state.graph.objects()) out << ' ' << o.id << '@' << p.state.graph.area_id(o.parent);
    out << '\n';
  }
  return out.str();
}

}  // namespace tru
