#include <doctest.h>

#include <random>

#include "support/micro.hpp"
#include "tru/error.hpp"
#include "tru/kitchen.hpp"
#include "tru/pomdp.hpp"

using namespace tru;

namespace {

SceneGraph one_wall() { return empty_scene(load_kitchen("one_wall")); }

}  // namespace

TEST_CASE("feasibility") {
  const auto g = one_wall().with_object("apple", "Prep_Surface");
  CHECK(is_feasible(g, Action::pick("Prep_Surface", "apple")));
  CHECK_FALSE(is_feasible(g, Action::open("Prep_Surface")));
  CHECK_FALSE(is_feasible(g, Action::place("Dishware_Cabinet")));
  CHECK(is_feasible(g, Action::null()));
  CHECK_FALSE(is_feasible(g, Action::place("Prep_Surface")));
  const auto held = move_object(g, "apple", "robot");
  CHECK_FALSE(is_feasible(held, Action::pick("Prep_Surface", "apple")));
  CHECK(is_feasible(held, Action::place("Prep_Surface")));
  // Opening with an object in hand is allowed.
  CHECK(is_feasible(held, Action::open("Cutlery_Drawer")));
}

TEST_CASE("transition examples") {
  const RewardConfig model = model_default_rewards();
  const RewardConfig exp = experiment_rewards();
  SUBCASE("open at current location costs manipulation only") {
    const State s{one_wall().with_robot_at("Cutlery_Drawer"), {}};
    const auto r = transition(s, Action::open("Cutlery_Drawer"), model);
    CHECK(r.feasible);
    CHECK(r.reward == -5.0);
    CHECK(r.next_state.graph.is_open("Cutlery_Drawer"));
  }
  SUBCASE("infeasible pick") {
    const State s{one_wall().with_object("apple", "Dishware_Cabinet"), {}};
    const auto r = transition(s, Action::pick("Dishware_Cabinet", "apple"), exp);
    CHECK_FALSE(r.feasible);
    CHECK(r.reward == -25.0);
    CHECK(r.next_state == s);
  }
  SUBCASE("completing a one-pair goal") {
    const auto k = load_kitchen("l_shaped");
    auto g = set_area_open(empty_scene(k), "Baking_Tool_Cabinet")
                 .with_object("gluten_free_flour_15", "robot")
                 .with_robot_at("Baking_Tool_Cabinet");
    const State s{g, micro::goal({{"gluten_free_flour_15", "Baking_Tool_Cabinet"}})};
    const auto r = transition(s, Action::place("Baking_Tool_Cabinet"), exp);
    CHECK(r.reward == -5.0 + 1000.0);
    CHECK(r.completed);
    const auto m = transition(s, Action::place("Baking_Tool_Cabinet"), model);
    CHECK(m.reward == -5.0 + 200.0 + 200.0);
  }
  SUBCASE("Null is free and changes nothing") {
    const State s{one_wall(), {}};
    const auto r = transition(s, Action::null(), model);
    CHECK(r.reward == 0.0);
    CHECK(r.next_state == s);
  }
  SUBCASE("already rewarded pairs pay once") {
    auto g = one_wall().with_object("cup", "robot").with_robot_at("Prep_Surface");
    const State s{g, micro::goal({{"cup", "Prep_Surface"}, {"plate", "Prep_Surface"}})};
    const std::vector<GoalPair> paid{{"cup", "Prep_Surface"}};
    CHECK(transition(s, Action::place("Prep_Surface"), model).reward == 195.0);
    CHECK(transition(s, Action::place("Prep_Surface"), model, paid).reward == -5.0);
  }
}

TEST_CASE("observe and likelihood") {
  const auto k = load_kitchen("l_shaped");
  const auto g = empty_scene(k).with_object("leftover_container_5", "Lunchbox_Thermos_Cabinet");
  const State s{g, {}};
  CHECK_FALSE(observe(s).graph.has_object("leftover_container_5"));
  CHECK(observation_likelihood(s, observe(s)) == 1.0);

  const auto held = State{empty_scene(k).with_object("cup", "robot"), {}};
  CHECK(observe(held).graph.held_object() == "cup");

  auto open_all = empty_scene(k);
  for (std::size_t i = 0; i < open_all.area_count(); ++i) {
    if (!open_all.is_open(i)) open_all = set_area_open(open_all, open_all.area_id(i));
  }
  CHECK(observe(open_all).graph == open_all);

  const auto on_table = State{empty_scene(k).with_object("cup", "Meal_Prep_Surface"), {}};
  const auto without = State{empty_scene(k), {}};
  CHECK(observation_likelihood(on_table, observe(without)) == 0.0);
  const auto hidden = State{empty_scene(k).with_object("cup", "Lunchbox_Thermos_Cabinet"), {}};
  CHECK(observation_likelihood(hidden, observe(on_table)) == 0.0);
}

TEST_CASE("goal predicates") {
  const auto k = load_kitchen("l_shaped");
  const auto g = empty_scene(k).with_object("gluten_free_flour_15", "Plastic_Container_Cabinet");
  const auto goal = micro::goal({{"gluten_free_flour_15", "Baking_Tool_Cabinet"}});
  CHECK(goal_satisfied(g, PlacementGoal{}));
  CHECK_FALSE(goal_satisfied(g, goal));
  CHECK(goal_satisfied(move_object(g, "gluten_free_flour_15", "Baking_Tool_Cabinet"), goal));
  CHECK_FALSE(goal_satisfied(g, micro::goal({{"ghost", "Baking_Tool_Cabinet"}})));
}

TEST_CASE("placement goals compare as sets and reject duplicates") {
  CHECK(micro::goal({{"a", "X"}, {"b", "Y"}}) == micro::goal({{"b", "Y"}, {"a", "X"}}));
  CHECK_FALSE(is_well_formed(PlacementGoal{}));
  CHECK_FALSE(is_well_formed(micro::goal({{"a", "X"}, {"a", "Y"}})));
  CHECK(to_string(micro::goal({{"a", "X"}, {"b", "Y"}})) == "a in X, b in Y");
}

TEST_CASE("action text round-trips and orders canonically") {
  const std::vector<Action> actions{Action::open("B"), Action::pick("A", "cup"), Action::place("A"), Action::null()};
  for (const auto& a : actions) CHECK(parse_action(to_string(a)) == a);
  CHECK(Action::open("Z") < Action::pick("A", "a"));
  CHECK(Action::pick("A", "b") < Action::place("A"));
  CHECK(Action::place("Z") < Action::null());
  CHECK_THROWS_AS(parse_action("Jump(A)"), Error);
}

TEST_CASE("transition properties over random traces") {
  const auto k = load_kitchen("one_wall_island");
  const RewardConfig cfg = model_default_rewards();
  std::mt19937_64 rng(9);
  const auto& areas = k.catalog->areas();
  SceneGraph g = empty_scene(k);
  for (int i = 0; i < 6; ++i) g = g.with_object("o" + std::to_string(i), areas[rng() % (areas.size() - 1)].id);
  State s{g, micro::goal({{"o0", areas[1].id}, {"o1", areas[2].id}})};
  std::vector<GoalPair> rewarded;
  for (int t = 0; t < 400; ++t) {
    const auto& area = areas[rng() % (areas.size() - 1)].id;
    Action a;
    switch (rng() % 4) {
      case 0: a = Action::open(area); break;
      case 1: a = Action::pick(area, "o" + std::to_string(rng() % 6)); break;
      case 2: a = Action::place(area); break;
      default: a = Action::null();
    }
    const auto r1 = transition(s, a, cfg, rewarded);
    const auto r2 = transition(s, a, cfg, rewarded);
    CHECK(r1.next_state == r2.next_state);
    CHECK(r1.reward == r2.reward);
    if (!r1.feasible) {
      CHECK(r1.next_state == s);
      CHECK(r1.reward == -cfg.infeasible_cost);
    } else if (a.type != ActionType::kNull) {
      const double earned = cfg.subgoal_reward * static_cast<double>(r1.newly_satisfied.size()) +
                            (r1.completed ? cfg.completion_reward : 0.0);
      CHECK(r1.reward + r1.executed_move_cost + cfg.manipulation_cost - earned == doctest::Approx(0.0));
    }
    for (const auto& p : r1.newly_satisfied) rewarded.push_back(p);
    s = r1.next_state;
    validate(s.graph);
    CHECK(observation_likelihood(s, observe(s)) == 1.0);
  }
}
