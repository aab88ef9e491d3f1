#include <doctest.h>

#include <functional>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support/micro.hpp"
#include "tru/environment.hpp"
#include "tru/error.hpp"

using namespace tru;

namespace {

std::string reference_task_text() {
  std::ifstream in(default_data_dir() / "tasks" / "baking_setup.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kConfigError;
}

// A goal candidate source that never mentions the real goal.
class Misleading final : public HypothesisGenerator {
 public:
  std::vector<GoalCandidate> propose_goals(const QueryContext& ctx, int) override {
    for (const auto& o : ctx.observation.graph.objects()) {
      PlacementGoal g(std::vector<GoalPair>{{o.id, "Prep_Surface"}});
      if (std::find(ctx.failed_goals.begin(), ctx.failed_goals.end(), g) == ctx.failed_goals.end() &&
          ctx.observation.graph.parent_of(o.id) != "Prep_Surface" && o.id != "cup") {
        return {{g, 1.0}};
      }
    }
    return {};
  }
  std::vector<LocationCandidate> propose_locations(const QueryContext&, const std::string&, int) override { return {}; }
  GeneratorUsage usage() const override { return {}; }
};

TaskSpec tiny_task() {
  TaskSpec t;
  t.kitchen = "one_wall";
  t.instruction = "Put the cup on the prep surface.";
  t.placements = {{"Coffee_Tea_Surface", "cup"}, {"Pantry_Shelf", "jar"}, {"Spice_Shelf", "salt"}};
  t.robot_location = "Coffee_Tea_Surface";
  t.goal_set = {micro::goal({{"cup", "Prep_Surface"}})};
  t.emit_meta = false;
  return t;
}

}  // namespace

TEST_CASE("load the reference task") {
  const auto task = load_task(reference_task_text());
  CHECK(task.placements.size() == 21);
  CHECK(task.goal_set.size() == 4);
  CHECK(task.robot_location == "Cookbook_Display_Shelf");
  CHECK(task.kitchen == "l_shaped");
  CHECK(nlohmann::json::parse(serialize_task(task)) == nlohmann::json::parse(reference_task_text()));
}

TEST_CASE("task schema errors") {
  auto doc = nlohmann::json::parse(reference_task_text());
  auto empty_goals = doc;
  empty_goals["task"]["goal_set"] = nlohmann::json::array();
  CHECK(code_of([&] { load_task(empty_goals.dump()); }) == ErrorCode::kSchemaError);
  auto garage = doc;
  garage["placement"][0]["area"] = "Garage";
  CHECK(code_of([&] { load_task(garage.dump()); }) == ErrorCode::kUnknownArea);
  auto missing = doc;
  missing["placement"][0].erase("placed_object");
  try {
    load_task(missing.dump());
    FAIL("expected schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchemaError);
    CHECK(std::string(e.what()).find("/placement/0") != std::string::npos);
  }
  CHECK(code_of([] { load_task("{ not json"); }) == ErrorCode::kSchemaError);
  CHECK(code_of([] { parse_difficulty("extreme"); }) == ErrorCode::kInvalidDifficulty);
}

TEST_CASE("generated tasks") {
  const auto a = generate_task("one_wall", Difficulty::kEasy, 7);
  CHECK(serialize_task(a) == serialize_task(generate_task("one_wall", Difficulty::kEasy, 7)));
  CHECK(serialize_task(load_task(serialize_task(a))) == serialize_task(a));
  for (const auto& kitchen_id : kitchen_ids()) {
    const auto kitchen = load_kitchen(kitchen_id);
    for (const auto d : {Difficulty::kEasy, Difficulty::kMedium, Difficulty::kHard}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto t = generate_task(kitchen_id, d, seed);
        CHECK(t.placements.size() == 20);
        CHECK(!t.goal_set.empty());
        CHECK(t.goal_set.size() <= 4);
        for (const auto& g : t.goal_set) {
          if (d == Difficulty::kEasy) CHECK(g.size() == 2);
          if (d == Difficulty::kMedium) CHECK(g.size() == 3);
          if (d == Difficulty::kHard) CHECK((g.size() >= 4 && g.size() <= 8));
          CHECK(goal_achievable(t, kitchen, g));
        }
        validate(t, kitchen);
        const auto scene = initial_scene(t, kitchen);
        validate(scene);
        CHECK_FALSE(feedback(scene, t).done);
      }
    }
  }
  CHECK(code_of([] { generate_task("garage", Difficulty::kEasy, 1); }) == ErrorCode::kUnknownKitchen);
}

TEST_CASE("environment step") {
  const auto task = load_task(reference_task_text());
  const auto kitchen = load_kitchen(task.kitchen);
  const RewardConfig exp = experiment_rewards();
  SUBCASE("completing a single-pair goal") {
    Environment env(task, exp);
    CHECK(env.step(Action::open("Plastic_Container_Cabinet")).reward < 0);
    env.step(Action::pick("Plastic_Container_Cabinet", "gluten_free_flour_15"));
    env.step(Action::open("Baking_Tool_Cabinet"));
    const auto r = env.step(Action::place("Baking_Tool_Cabinet"));
    CHECK(r.feedback.done);
    // The robot is already at the cabinet it just opened.
    CHECK(r.reward == -5.0 + 1000.0);
    CHECK(std::find(r.feedback.satisfied_objects.begin(), r.feedback.satisfied_objects.end(),
                    "gluten_free_flour_15") != r.feedback.satisfied_objects.end());
  }
  SUBCASE("Null at start") {
    Environment env(task, exp);
    const auto before = env.state();
    const auto r = env.step(Action::null());
    CHECK(r.reward == 0.0);
    CHECK_FALSE(r.feedback.done);
    CHECK(env.state() == before);
  }
  SUBCASE("picking a hidden object is infeasible") {
    Environment env(task, exp);
    const auto r = env.step(Action::pick("Plastic_Container_Cabinet", "gluten_free_flour_15"));
    CHECK_FALSE(r.feasible);
    CHECK(r.reward == -25.0);
  }
  SUBCASE("subgoal rewards count any goal of the set once") {
    Environment env(tiny_task(), model_default_rewards());
    env.step(Action::pick("Coffee_Tea_Surface", "cup"));
    CHECK(env.step(Action::place("Prep_Surface")).newly_satisfied.size() == 1);
    env.step(Action::pick("Prep_Surface", "cup"));
    CHECK(env.step(Action::place("Prep_Surface")).newly_satisfied.empty());
  }
  CHECK(initial_scene(task, kitchen).find_object("leftover_container_5"));
}

TEST_CASE("episodes") {
  AgentConfig agent;
  agent.planner.max_trials = 300;
  SUBCASE("trivial task succeeds in two steps") {
    const auto task = tiny_task();
    MockGenerator gen(mock_truth(task), 0);
    const auto m = run_episode(task, agent, {25, 600.0}, model_default_rewards(), gen);
    CHECK(m.success);
    CHECK(m.steps <= 2);
    double total = 0.0;
    for (const auto& s : m.log) total += s.reward;
    CHECK(total == doctest::Approx(m.cumulative_reward));
  }
  SUBCASE("a generator that never proposes the goal fails at the step limit") {
    const auto task = tiny_task();
    Misleading gen;
    const auto m = run_episode(task, agent, {10, 600.0}, model_default_rewards(), gen);
    CHECK_FALSE(m.success);
    CHECK(m.steps == 10);
  }
  SUBCASE("planning time limit") {
    const auto task = generate_task("one_wall", Difficulty::kHard, 1);
    MockGenerator gen(mock_truth(task), 1);
    const auto m = run_episode(task, agent, {35, 1e-6}, model_default_rewards(), gen);
    CHECK_FALSE(m.success);
    CHECK(m.steps == 35);
    CHECK(m.failure_reason.find("time") != std::string::npos);
  }
  SUBCASE("mock episodes are reproducible") {
    const auto task = generate_task("one_wall", Difficulty::kMedium, 4);
    MockGenerator g1(mock_truth(task), 4), g2(mock_truth(task), 4);
    const auto a = run_episode(task, agent, default_limits(task.difficulty), model_default_rewards(), g1);
    const auto b = run_episode(task, agent, default_limits(task.difficulty), model_default_rewards(), g2);
    CHECK(metrics_to_json(a, false) == metrics_to_json(b, false));
    CHECK(a.success);
  }
}

TEST_CASE("default limits") {
  CHECK(default_limits(Difficulty::kEasy).step_limit == 25);
  CHECK(default_limits(Difficulty::kMedium).step_limit == 30);
  CHECK(default_limits(Difficulty::kHard).step_limit == 35);
  CHECK(default_limits(Difficulty::kHard).time_limit == 600.0);
}
