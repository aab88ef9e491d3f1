#include "oracles/expectimax.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

namespace oracle {

namespace {

std::string hexf(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

std::string key_of(const std::vector<Branch>& belief, int horizon) {
  std::vector<std::string> parts;
  for (const auto& b : belief) {
    std::string k = tru::to_canonical_string(b.state.graph) + "|" + tru::to_string(b.state.goal) + "|" + hexf(b.weight);
    auto r = b.rewarded;
    std::sort(r.begin(), r.end());
    for (const auto& p : r) k += "|" + p.object + ">" + p.target;
    parts.push_back(std::move(k));
  }
  std::sort(parts.begin(), parts.end());
  std::string out = std::to_string(horizon);
  for (const auto& p : parts) out += "\n#" + p;
  return out;
}

class Solver {
 public:
  Solver(const tru::RewardConfig& cfg, std::vector<tru::Action> actions) : cfg_(cfg), actions_(std::move(actions)) {}

  double value(const std::vector<Branch>& belief, int horizon) {
    if (horizon <= 0 || belief.empty()) return 0.0;
    const auto key = key_of(belief, horizon);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double best = q(belief, tru::Action::null(), horizon);
    for (const auto& a : actions_) {
      if (a.type == tru::ActionType::kNull) continue;
      best = std::max(best, q(belief, a, horizon));
    }
    memo_.emplace(key, best);
    return best;
  }

  double q(const std::vector<Branch>& belief, const tru::Action& a, int horizon) {
    if (a.type == tru::ActionType::kNull) return value(belief, horizon - 1);
    // An action infeasible everywhere is Null plus a penalty, so it never wins.
    const bool useful = std::any_of(belief.begin(), belief.end(),
                                    [&](const Branch& b) { return tru::is_feasible(b.state, a); });
    if (!useful) return -1e18;
    double immediate = 0.0;
    std::map<std::string, std::vector<Branch>> groups;
    for (const auto& b : belief) {
      auto step = tru::transition(b.state, a, cfg_, b.rewarded);
      immediate += b.weight * step.reward;
      if (tru::goal_satisfied(step.next_state.graph, step.next_state.goal)) continue;
      Branch next{std::move(step.next_state), b.weight, b.rewarded};
      for (const auto& p : step.newly_satisfied) next.rewarded.push_back(p);
      const auto z = tru::to_canonical_string(tru::observe(next.state).graph);
      groups[z].push_back(std::move(next));
    }
    double future = 0.0;
    for (const auto& [z, group] : groups) future += value(group, horizon - 1);
    return immediate + future;
  }

 private:
  const tru::RewardConfig& cfg_;
  std::vector<tru::Action> actions_;
  std::unordered_map<std::string, double> memo_;
};

}  // namespace

std::vector<tru::Action> all_actions(const std::vector<Branch>& belief) {
  std::set<tru::Action> out;
  out.insert(tru::Action::null());
  for (const auto& b : belief) {
    const auto& g = b.state.graph;
    for (std::size_t i = 0; i < g.area_count(); ++i) {
      if (i == g.catalog().robot_hand()) continue;
      const auto& area = g.area_id(i);
      out.insert(tru::Action::open(area));
      out.insert(tru::Action::place(area));
      for (const auto& o : g.objects()) out.insert(tru::Action::pick(area, o.id));
    }
  }
  return {out.begin(), out.end()};
}

Result expectimax(const std::vector<Branch>& belief, int horizon, const tru::RewardConfig& cfg) {
  Result r;
  const auto actions = all_actions(belief);
  Solver solver(cfg, actions);
  r.value = solver.value(belief, horizon);
  for (const auto& a : actions) r.q.push_back({a, horizon > 0 ? solver.q(belief, a, horizon) : 0.0});
  return r;
}

}  // namespace oracle
