#include "tru/planner.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <thread>

#include "tru/detail/compact_model.hpp"
#include "tru/error.hpp"

namespace tru {

using namespace detail;

namespace {

struct Sim {
  std::size_t scenario = 0;  // index into Model::goals
  double weight = 0.0;
  CState state;
  std::uint32_t rewarded = 0;
};

struct Model {
  Domain domain;
  std::vector<CGoal> goals;
  double discount = 1.0;
};

const Sim& representative(const std::vector<Sim>& group) {
  const Sim* best = &group.front();
  for (const auto& s : group) {
    if (s.weight > best->weight) best = &s;
  }
  return *best;
}

void split_by_observation(std::vector<Sim>&& sims, std::vector<std::vector<Sim>>& out) {
  const std::size_t first = out.size();
  for (auto& s : sims) {
    bool placed = false;
    for (std::size_t g = first; g < out.size(); ++g) {
      if (same_observation(out[g].front().state, s.state)) {
        out[g].push_back(std::move(s));
        placed = true;
        break;
      }
    }
    if (!placed) out.push_back({std::move(s)});
  }
}

// Runs the rollout policy jointly over a set of scenarios that share one
// observation history. Each step the action comes from the heaviest scenario
// of the group, so the simulated policy only depends on what the robot has
// seen and its return is achievable.
double group_rollout(const Model& m, std::vector<Sim> sims, int horizon) {
  double total = 0.0;
  double factor = 1.0;
  std::vector<std::vector<Sim>> groups;
  if (!sims.empty()) groups.push_back(std::move(sims));
  for (int t = 0; t < horizon && !groups.empty(); ++t) {
    std::vector<std::vector<Sim>> next;
    for (auto& group : groups) {
      const Sim& rep = representative(group);
      const auto unreached = unreached_pairs(rep.state, m.goals[rep.scenario]);
      const CAction a = rollout_action(rep.state, unreached);
      if (a.type == ActionType::kNull) continue;
      std::vector<Sim> alive;
      for (auto& s : group) {
        const auto out = step(m.domain, s.state, m.goals[s.scenario], s.rewarded, a);
        total += factor * s.weight * out.reward;
        if (!out.completed) alive.push_back(std::move(s));
      }
      split_by_observation(std::move(alive), next);
    }
    groups = std::move(next);
    factor *= m.discount;
  }
  return total;
}

// Optimistic value of one scenario with `remaining` steps left. Each goal
// pair needs its own pick and place (just the place if already in hand), and
// completing also needs one open per closed area involved; moves are free.
double scenario_upper(const Model& m, const Sim& s, int remaining) {
  if (remaining <= 0) return 0.0;
  const auto& cfg = m.domain.rewards;
  const auto& goal = m.goals[s.scenario];
  const bool charge = m.discount >= 1.0;
  double partial = 0.0;
  double reward_left = 0.0;
  int actions = 0;
  bool achievable = true;
  std::set<Id> to_open;
  for (std::size_t i = 0; i < goal.pairs.size(); ++i) {
    const auto& p = goal.pairs[i];
    if (pair_satisfied(s.state, p)) continue;
    if (p.object == kNone || p.target == kNone || s.state.parent[p.object] == kNone) {
      achievable = false;
      continue;
    }
    const bool in_hand = s.state.held == p.object;
    const int need = in_hand ? 1 : 2;
    actions += need;
    if (!s.state.open[p.target]) to_open.insert(p.target);
    if (!in_hand && !s.state.open[s.state.parent[p.object]]) to_open.insert(s.state.parent[p.object]);
    const bool paid = (s.rewarded >> i) & 1u;
    if (!paid) {
      reward_left += cfg.subgoal_reward;
      partial += std::max(0.0, cfg.subgoal_reward - (charge ? cfg.manipulation_cost * need : 0.0));
    }
  }
  actions += static_cast<int>(to_open.size());
  double complete = 0.0;
  if (achievable && actions <= remaining) {
    complete = reward_left + cfg.completion_reward - (charge ? cfg.manipulation_cost * actions : 0.0);
  }
  return std::max({0.0, partial, complete});
}

std::vector<CAction> node_actions(const Model& m, const std::vector<Sim>& sims) {
  const auto& d = m.domain;
  std::vector<CAction> out;
  std::vector<bool> closed(d.area_count(), false);
  for (const auto& s : sims) {
    for (std::size_t i = 0; i < d.area_count(); ++i) {
      if (!s.state.open[i]) closed[i] = true;
    }
    if (s.state.held != kNone) {
      for (std::size_t i = 0; i < d.area_count(); ++i) {
        if (static_cast<Id>(i) != d.robot_hand && s.state.open[i]) out.push_back({ActionType::kPlace, static_cast<Id>(i), kNone});
      }
      continue;
    }
    for (const auto& p : m.goals[s.scenario].pairs) {
      if (p.object == kNone) continue;
      const Id parent = s.state.parent[p.object];
      if (parent != kNone && parent != d.robot_hand && s.state.open[parent]) {
        out.push_back({ActionType::kPick, parent, p.object});
      }
    }
  }
  for (std::size_t i = 0; i < d.area_count(); ++i) {
    if (closed[i]) out.push_back({ActionType::kOpen, static_cast<Id>(i), kNone});
  }
  out.push_back({});
  std::sort(out.begin(), out.end(), [&](const CAction& a, const CAction& b) { return action_less(d, a, b); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct Node;

struct Edge {
  CAction action;
  double reward = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::unique_ptr<Node>> children;
};

struct Node {
  std::vector<Sim> sims;
  int depth = 0;
  double weight = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool expanded = false;
  std::vector<Edge> edges;

  double gap() const { return upper - lower; }
};

class Search {
 public:
  Search(Model model, const PlannerConfig& cfg) : m_(std::move(model)), cfg_(cfg) {}

  std::unique_ptr<Node> make_node(std::vector<Sim> sims, int depth) const {
    auto node = std::make_unique<Node>();
    node->sims = std::move(sims);
    node->depth = depth;
    for (const auto& s : node->sims) node->weight += s.weight;
    if (depth >= cfg_.max_depth || node->sims.empty()) return node;
    const int remaining = cfg_.max_depth - depth;
    node->lower = std::max(0.0, group_rollout(m_, node->sims, std::min(cfg_.rollout_depth, remaining)));
    double upper = 0.0;
    for (const auto& s : node->sims) upper += s.weight * scenario_upper(m_, s, remaining);
    node->upper = std::max(node->lower, upper);
    return node;
  }

  void fill_edge(const Node& node, Edge& edge) const {
    std::vector<Sim> alive;
    for (const auto& s : node.sims) {
      Sim next = s;
      const auto out = step(m_.domain, next.state, m_.goals[next.scenario], next.rewarded, edge.action);
      edge.reward += s.weight * out.reward;
      if (!out.completed) alive.push_back(std::move(next));
    }
    std::vector<std::vector<Sim>> groups;
    split_by_observation(std::move(alive), groups);
    double lower = 0.0;
    double upper = 0.0;
    for (auto& g : groups) {
      auto child = make_node(std::move(g), node.depth + 1);
      lower += child->lower;
      upper += child->upper;
      edge.children.push_back(std::move(child));
    }
    edge.lower = edge.reward + m_.discount * lower;
    edge.upper = edge.reward + m_.discount * upper;
  }

  void expand(Node& node) {
    const auto actions = node_actions(m_, node.sims);
    node.edges.resize(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) node.edges[i].action = actions[i];
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg_.threads), actions.size());
    if (workers <= 1) {
      for (auto& e : node.edges) fill_edge(node, e);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t i = w; i < node.edges.size(); i += workers) fill_edge(node, node.edges[i]);
        });
      }
      for (auto& t : pool) t.join();
    }
    node.expanded = true;
    for (const auto& e : node.edges) tree_nodes_ += e.children.size();
    backup(node);
  }

  // Bellman backup that keeps lower bounds monotone up and upper bounds down.
  void backup(Node& node) const {
    double best_lower = -std::numeric_limits<double>::infinity();
    double best_upper = -std::numeric_limits<double>::infinity();
    for (auto& e : node.edges) {
      double lower = 0.0;
      double upper = 0.0;
      for (const auto& c : e.children) {
        lower += c->lower;
        upper += c->upper;
      }
      e.lower = e.reward + m_.discount * lower;
      e.upper = e.reward + m_.discount * upper;
      best_lower = std::max(best_lower, e.lower);
      best_upper = std::max(best_upper, e.upper);
    }
    node.lower = std::max(node.lower, best_lower);
    node.upper = std::max(node.lower, std::min(node.upper, best_upper));
  }

  // One descent from the root. Returns false when no leaf is worth expanding.
  bool trial(Node& root, PlannerStats& stats) {
    std::vector<Node*> path{&root};
    Node* node = &root;
    while (node->expanded) {
      const Edge* best = &node->edges.front();
      for (const auto& e : node->edges) {
        if (e.upper > best->upper) best = &e;
      }
      Node* next = nullptr;
      double best_excess = 0.0;
      for (const auto& c : best->children) {
        const double excess = c->gap() - cfg_.xi * (c->weight / root.weight) * root.gap();
        if (excess > best_excess) {
          best_excess = excess;
          next = c.get();
        }
      }
      if (!next) break;
      node = next;
      path.push_back(node);
    }
    if (node->expanded || node->depth >= cfg_.max_depth || node->sims.empty()) return false;
    expand(*node);
    ++stats.expansions;
    stats.expansion_trace.push_back(node->depth);
    for (auto it = path.rbegin(); it != path.rend(); ++it) backup(**it);
    return true;
  }

  PlanResult run(std::vector<Sim> root_sims) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    PlanResult result{Action::null(), {}};
    auto& stats = result.stats;
    auto root = make_node(std::move(root_sims), 0);
    tree_nodes_ = 1;
    if (!root->sims.empty() && cfg_.max_depth > 0) {
      expand(*root);
      ++stats.expansions;
      stats.expansion_trace.push_back(0);
      backup(*root);
      while (true) {
        if (root->gap() <= kGapTolerance) {
          stats.converged = true;
          break;
        }
        if (cfg_.max_trials > 0 && stats.trials >= cfg_.max_trials) break;
        if (std::chrono::duration<double>(clock::now() - start).count() >= cfg_.time_budget) break;
        ++stats.trials;
        if (!trial(*root, stats)) break;
      }
    } else {
      stats.converged = true;
    }

    stats.tree_nodes = tree_nodes_;
    stats.root_lower = root->lower;
    stats.root_upper = root->upper;
    if (root->expanded) {
      for (const auto& e : root->edges) {
        stats.root_actions.push_back(ActionBounds{to_action(m_.domain, e.action), e.lower, e.upper});
      }
      // A winning Null leads back to the same belief, so its value comes from
      // whatever the plan does afterwards. Follow the chain to that action.
      const Node* node = root.get();
      const Edge* best = best_edge(*node);
      while (best && best->action.type == ActionType::kNull && best->children.size() == 1 &&
             best->children[0]->expanded) {
        node = best->children[0].get();
        best = best_edge(*node);
      }
      if (best) result.action = to_action(m_.domain, best->action);
    }
    stats.wall_time = std::chrono::duration<double>(clock::now() - start).count();
    return result;
  }

 private:
  // Edges are in canonical order with Null last, so Null wins only when it is
  // strictly better than every other action.
  static const Edge* best_edge(const Node& n) {
    const Edge* best = nullptr;
    for (const auto& e : n.edges) {
      if (!best || e.lower > best->lower + kTieTolerance) best = &e;
    }
    return best;
  }

  static constexpr double kGapTolerance = 1e-9;
  static constexpr double kTieTolerance = 1e-9;
  Model m_;
  const PlannerConfig& cfg_;
  std::size_t tree_nodes_ = 0;
};

void require_belief(const ParticleBelief& b) {
  if (b.empty()) throw Error(ErrorCode::kEmptyBelief, "planner called with an empty belief");
}

Model build_model(const ParticleBelief& b, const std::vector<Scenario>& scenarios, const RewardConfig& rcfg,
                  double discount) {
  std::vector<const SceneGraph*> graphs;
  for (const auto& sc : scenarios) graphs.push_back(&b.particles()[sc.particle_index].state.graph);
  Model m{build_domain(graphs, rcfg), {}, discount};
  for (const auto& sc : scenarios) m.goals.push_back(compile(m.domain, b.particles()[sc.particle_index].state.goal));
  return m;
}

std::vector<Sim> root_sims(const Model& m, const ParticleBelief& b, const std::vector<Scenario>& scenarios) {
  std::vector<Sim> sims;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    Sim s{i, scenarios[i].weight, compile(m.domain, b.particles()[scenarios[i].particle_index].state.graph), 0};
    s.rewarded = satisfied_mask(s.state, m.goals[i]);
    if (!m.goals[i].pairs.empty() && goal_complete(s.state, m.goals[i])) continue;
    sims.push_back(std::move(s));
  }
  return sims;
}

std::vector<Scenario> all_scenarios(const ParticleBelief& b) {
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < b.size(); ++i) out.push_back(Scenario{i, b.particles()[i].weight});
  return out;
}

}  // namespace

void validate(const PlannerConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigError, "planner config: " + what); };
  if (cfg.num_scenarios < 1) fail("num_scenarios must be at least 1");
  if (cfg.max_depth < 1) fail("max_depth must be at least 1");
  if (cfg.rollout_depth < 0) fail("rollout_depth must be non-negative");
  if (!(cfg.discount > 0.0 && cfg.discount <= 1.0)) fail("discount must lie in (0, 1]");
  if (!(cfg.time_budget >= 0.0)) fail("time_budget must be non-negative");
  if (cfg.max_trials < 0) fail("max_trials must be non-negative");
  if (cfg.threads < 1) fail("threads must be at least 1");
  if (!(cfg.xi >= 0.0 && cfg.xi <= 1.0)) fail("xi must lie in [0, 1]");
}

std::vector<Scenario> sample_scenarios(const ParticleBelief& b, int k, std::uint64_t seed) {
  require_belief(b);
  if (k < 1) throw Error(ErrorCode::kConfigError, "need at least one scenario");
  if (static_cast<std::size_t>(k) >= b.size()) return all_scenarios(b);
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& p : b.particles()) cumulative.push_back(total += p.weight);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, total);
  std::map<std::size_t, int> counts;
  for (int i = 0; i < k; ++i) {
    const double u = uniform(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    ++counts[static_cast<std::size_t>(it - cumulative.begin())];
  }
  std::vector<Scenario> out;
  for (const auto& [index, count] : counts) out.push_back(Scenario{index, static_cast<double>(count) / k});
  return out;
}

std::vector<Action> dynamic_actions(const ParticleBelief& b) {
  require_belief(b);
  const auto scenarios = all_scenarios(b);
  const Model m = build_model(b, scenarios, RewardConfig{}, 1.0);
  std::vector<Sim> sims;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    sims.push_back(Sim{i, scenarios[i].weight, compile(m.domain, b.particles()[i].state.graph), 0});
  }
  std::vector<Action> out;
  for (const auto& a : node_actions(m, sims)) out.push_back(to_action(m.domain, a));
  return out;
}

Action rollout_policy(const State& s, const std::vector<std::pair<std::string, std::string>>& unreached) {
  const SceneGraph* g = &s.graph;
  const Domain d = build_domain(std::span<const SceneGraph* const>(&g, 1), RewardConfig{});
  const CState cs = compile(d, s.graph);
  std::vector<CPair> pairs;
  for (const auto& [area, object] : unreached) {
    const auto target = d.catalog->find(area);
    pairs.push_back(CPair{d.object_id(object), target ? static_cast<Id>(*target) : kNone});
  }
  return to_action(d, rollout_action(cs, pairs));
}

double rollout_value(const State& s, int depth, const RewardConfig& cfg, double discount) {
  const SceneGraph* g = &s.graph;
  Model m{build_domain(std::span<const SceneGraph* const>(&g, 1), cfg), {}, discount};
  m.goals.push_back(compile(m.domain, s.goal));
  Sim sim{0, 1.0, compile(m.domain, s.graph), 0};
  sim.rewarded = satisfied_mask(sim.state, m.goals[0]);
  if (!s.goal.empty() && goal_complete(sim.state, m.goals[0])) return 0.0;
  return group_rollout(m, {std::move(sim)}, depth);
}

PlanResult search(const ParticleBelief& b, const PlannerConfig& cfg, const RewardConfig& rcfg) {
  require_belief(b);
  validate(cfg);
  validate(rcfg);
  const auto scenarios = sample_scenarios(b, cfg.num_scenarios, cfg.seed);
  Model m = build_model(b, scenarios, rcfg, cfg.discount);
  auto sims = root_sims(m, b, scenarios);
  Search search(std::move(m), cfg);
  return search.run(std::move(sims));
}

Action plan(const ParticleBelief& b, const PlannerConfig& cfg, const RewardConfig& rcfg) {
  return search(b, cfg, rcfg).action;
}

}  // namespace tru
