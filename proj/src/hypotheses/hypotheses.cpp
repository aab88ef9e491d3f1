#include <algorithm>
#include <cmath>
#include <future>
#include <set>

#include "tru/error.hpp"
#include "tru/hypotheses.hpp"

namespace tru {

GeneratorUsage& GeneratorUsage::operator+=(const GeneratorUsage& other) {
  prompt_tokens += other.prompt_tokens;
  completion_tokens += other.completion_tokens;
  query_count += other.query_count;
  wall_time += other.wall_time;
  return *this;
}

GeneratorUsage operator-(const GeneratorUsage& a, const GeneratorUsage& b) {
  return GeneratorUsage{a.prompt_tokens - b.prompt_tokens, a.completion_tokens - b.completion_tokens,
                        a.query_count - b.query_count, a.wall_time - b.wall_time};
}

namespace {

void warn(std::vector<std::string>* warnings, std::string message) {
  if (warnings) warnings->push_back(std::move(message));
}

bool valid_confidence(double c) { return std::isfinite(c) && c > 0.0 && c <= 1.0; }

// Reason a candidate must be dropped, or empty when it is acceptable.
std::string reject_reason(const GoalCandidate& c, const SceneGraph& g, const QueryContext& ctx,
                          const std::map<std::string, std::string>& locked,
                          const std::vector<GoalCandidate>& accepted) {
  if (!valid_confidence(c.confidence)) return "confidence outside (0, 1]";
  if (!is_well_formed(c.goal)) return "malformed goal (empty, oversized or repeated object)";
  const auto& catalog = g.catalog();
  for (const auto& p : c.goal.pairs()) {
    if (catalog.find(p.object)) return "object '" + p.object + "' collides with an area name";
    const auto target = catalog.find(p.target);
    if (!target || *target == catalog.robot_hand()) return "target '" + p.target + "' is not an observed area";
    auto it = locked.find(p.object);
    if (it != locked.end() && it->second != p.target) {
      return "object '" + p.object + "' already locked to " + it->second;
    }
  }
  for (const auto& a : accepted) {
    if (a.goal == c.goal) return "duplicate combination";
  }
  for (const auto& f : ctx.failed_goals) {
    if (f == c.goal) return "known wrong goal";
  }
  return {};
}

}  // namespace

std::vector<GoalCandidate> query_goals(HypothesisGenerator& gen, const QueryContext& ctx, int c1,
                                       std::vector<std::string>* warnings) {
  if (c1 < 1) throw Error(ErrorCode::kConfigError, "C1 must be at least 1");
  const auto raw = gen.propose_goals(ctx, c1);
  std::vector<GoalCandidate> accepted;
  std::map<std::string, std::string> locked;
  for (const auto& c : raw) {
    if (static_cast<int>(accepted.size()) >= c1) break;
    const auto reason = reject_reason(c, ctx.observation.graph, ctx, locked, accepted);
    if (!reason.empty()) {
      warn(warnings, "dropped goal candidate [" + to_string(c.goal) + "]: " + reason);
      continue;
    }
    for (const auto& p : c.goal.pairs()) locked.emplace(p.object, p.target);
    accepted.push_back(c);
  }
  if (accepted.empty()) throw Error(ErrorCode::kEmptyResult, "no valid goal candidates");
  return accepted;
}

std::vector<LocationCandidate> query_location(HypothesisGenerator& gen, const QueryContext& ctx,
                                              const std::string& object, int c2,
                                              std::vector<std::string>* warnings) {
  if (c2 < 1) throw Error(ErrorCode::kConfigError, "C2 must be at least 1");
  const auto& g = ctx.observation.graph;
  if (const auto* node = g.find_object(object); node && g.is_open(node->parent)) {
    return {LocationCandidate{g.area_id(node->parent), 1.0}};
  }
  const auto raw = gen.propose_locations(ctx, object, c2);
  std::vector<LocationCandidate> out;
  for (const auto& c : raw) {
    if (static_cast<int>(out.size()) >= c2) break;
    const auto area = g.catalog().find(c.area);
    std::string reason;
    if (!valid_confidence(c.confidence)) {
      reason = "confidence outside (0, 1]";
    } else if (!area || g.is_open(*area)) {
      reason = "not a closed area";
    } else if (std::any_of(out.begin(), out.end(), [&](const auto& o) { return o.area == c.area; })) {
      reason = "duplicate area";
    }
    if (!reason.empty()) {
      warn(warnings, "dropped location " + c.area + " for " + object + ": " + reason);
      continue;
    }
    out.push_back(c);
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyResult, "no valid locations for '" + object + "'");
  double total = 0.0;
  for (const auto& c : out) total += c.confidence;
  for (auto& c : out) c.confidence /= total;
  return out;
}

LlmBelief build_llm_belief(const QueryContext& ctx, HypothesisGenerator& gen, int c1, int c2) {
  LlmBelief result;
  auto& tree = result.tree;
  tree.goals = query_goals(gen, ctx, c1, &result.warnings);
  const auto& z = ctx.observation.graph;

  std::set<std::string> hidden;
  for (const auto& c : tree.goals) {
    for (const auto& p : c.goal.pairs()) {
      const auto* node = z.find_object(p.object);
      if (!node || !z.is_open(node->parent)) hidden.insert(p.object);
    }
  }

  // Level 3: one independent query per hidden object, gathered in name order.
  std::vector<std::future<std::vector<LocationCandidate>>> pending;
  std::vector<std::vector<std::string>> query_warnings(hidden.size());
  std::size_t slot = 0;
  for (const auto& object : hidden) {
    auto* sink = &query_warnings[slot++];
    pending.push_back(std::async(std::launch::async, [&gen, &ctx, object, c2, sink] {
      try {
        return query_location(gen, ctx, object, c2, sink);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmptyResult) throw;
        sink->push_back(std::string("no location for ") + object + "; pruning goals that need it");
        return std::vector<LocationCandidate>{};
      }
    }));
  }
  slot = 0;
  for (const auto& object : hidden) {
    auto locations = pending[slot].get();
    for (auto& w : query_warnings[slot]) result.warnings.push_back(std::move(w));
    ++slot;
    if (!locations.empty()) tree.locations.emplace(object, std::move(locations));
  }

  std::vector<Particle> particles;
  for (const auto& c : tree.goals) {
    std::vector<std::string> needed;
    bool prunable = false;
    for (const auto& p : c.goal.pairs()) {
      if (!hidden.count(p.object)) continue;
      if (!tree.locations.count(p.object)) prunable = true;
      needed.push_back(p.object);
    }
    if (prunable) continue;
    std::sort(needed.begin(), needed.end());
    // Odometer over the cross product of the needed objects' locations.
    std::vector<std::size_t> digit(needed.size(), 0);
    while (true) {
      SceneGraph graph = z;
      double weight = c.confidence;
      for (std::size_t i = 0; i < needed.size(); ++i) {
        const auto& loc = tree.locations.at(needed[i])[digit[i]];
        graph = graph.has_object(needed[i]) ? move_object(graph, needed[i], loc.area)
                                            : graph.with_object(needed[i], loc.area);
        weight *= loc.confidence;
      }
      particles.push_back(Particle{State{std::move(graph), c.goal}, weight});
      std::size_t i = 0;
      for (; i < needed.size(); ++i) {
        if (++digit[i] < tree.locations.at(needed[i]).size()) break;
        digit[i] = 0;
      }
      if (i == needed.size()) break;
    }
  }
  tree.particle_count = particles.size();
  if (!particles.empty()) result.belief = ParticleBelief(std::move(particles)).normalized_copy();
  return result;
}

}  // namespace tru
