#include <doctest.h>

#include <functional>

#include <random>

#include "support/micro.hpp"
#include "tru/error.hpp"
#include "tru/kitchen.hpp"
#include "tru/scene_graph.hpp"

using namespace tru;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kConfigError;
}

}  // namespace

TEST_CASE("shipped kitchens load and share their catalog") {
  REQUIRE(kitchen_ids().size() == 5);
  for (const auto& id : kitchen_ids()) {
    const auto k = load_kitchen(id);
    CHECK(k.id == id);
    CHECK(k.catalog->find("robot").has_value());
    CHECK(load_kitchen(id).catalog == k.catalog);
    validate(empty_scene(k));
  }
  CHECK(code_of([] { load_kitchen("garage"); }) == ErrorCode::kUnknownKitchen);
}

TEST_CASE("set_area_open") {
  const auto g = empty_scene(load_kitchen("one_wall"));
  CHECK_FALSE(g.is_open("Dishware_Cabinet"));
  CHECK(set_area_open(g, "Dishware_Cabinet").is_open("Dishware_Cabinet"));
  CHECK(code_of([&] { set_area_open(g, "Prep_Surface"); }) == ErrorCode::kAlreadyOpen);
  CHECK(code_of([&] { set_area_open(g, "Garage"); }) == ErrorCode::kUnknownArea);
}

TEST_CASE("move_object tracks the held object") {
  const auto k = load_kitchen("l_shaped_island");
  const auto g = empty_scene(k).with_object("apple", "Fruit_Basket_Surface");
  const auto held = move_object(g, "apple", "robot");
  CHECK(held.held_object() == "apple");
  CHECK(held.held_origin() == "Fruit_Basket_Surface");
  const auto placed = move_object(held, "apple", "Fruit_Basket_Surface");
  CHECK_FALSE(placed.held_object().has_value());
  CHECK_FALSE(placed.held_origin().has_value());
  CHECK(placed.parent_of("apple") == "Fruit_Basket_Surface");
  CHECK(code_of([&] { move_object(g, "pear", "robot"); }) == ErrorCode::kUnknownObject);
  CHECK(code_of([&] { move_object(g, "apple", "Garage"); }) == ErrorCode::kUnknownArea);
}

TEST_CASE("move_cost") {
  auto cat = micro::catalog({micro::surface("A", 0, 0), micro::surface("B", 3, 4), micro::surface("C", 30, 0)});
  const SceneGraph g(cat);
  const RewardConfig cfg;
  CHECK(move_cost(g, "A", "A", cfg) == 0.0);
  CHECK(move_cost(g, "A", "B", cfg) == 10.0);
  CHECK(move_cost(g, "B", "A", cfg) == 10.0);
  CHECK(move_cost(g, "A", "C", cfg) == 27.0);
  CHECK(code_of([&] { move_cost(g, "A", "Garage", cfg); }) == ErrorCode::kUnknownArea);
}

TEST_CASE("visible hides contents of closed areas") {
  const auto k = load_kitchen("one_wall");
  const auto g = empty_scene(k).with_object("rice_jar", "Dishware_Cabinet").with_object("cup", "Prep_Surface");
  const auto v = visible(g);
  CHECK_FALSE(v.has_object("rice_jar"));
  CHECK(v.has_object("cup"));
  CHECK(visible(v) == v);
  CHECK_FALSE(v == g);
  const auto opened = set_area_open(g, "Dishware_Cabinet");
  CHECK(visible(opened) == opened);
}

TEST_CASE("validator holds after random mutations") {
  const auto k = load_kitchen("galley");
  std::mt19937_64 rng(5);
  SceneGraph g = empty_scene(k);
  const auto& areas = k.catalog->areas();
  for (int i = 0; i < 12; ++i) {
    g = g.with_object("obj_" + std::to_string(i), areas[rng() % (areas.size() - 1)].id);
  }
  for (int step = 0; step < 500; ++step) {
    const auto& area = areas[rng() % areas.size()];
    if (rng() % 2 == 0) {
      if (area.kind != AreaKind::kRobotHand && !g.is_open(area.id)) g = set_area_open(g, area.id);
    } else {
      const auto& obj = g.objects()[rng() % g.objects().size()].id;
      const bool into_hand = area.kind == AreaKind::kRobotHand;
      if (into_hand && g.held_object()) continue;
      g = move_object(g, obj, area.id);
    }
    validate(g);
    CHECK(visible(visible(g)) == visible(g));
  }
}

TEST_CASE("validator rejects a second held object") {
  const auto k = load_kitchen("one_wall");
  const auto g = empty_scene(k).with_object("a", "robot").with_object("b", "robot");
  CHECK(code_of([&] { validate(g); }) == ErrorCode::kInvalidGraph);
}

TEST_CASE("canonical string is stable and sorted") {
  const auto k = load_kitchen("one_wall");
  const auto a = empty_scene(k).with_object("b", "Prep_Surface").with_object("a", "Pantry_Shelf");
  const auto b = empty_scene(k).with_object("a", "Pantry_Shelf").with_object("b", "Prep_Surface");
  CHECK(a == b);
  CHECK(to_canonical_string(a) == to_canonical_string(b));
}
