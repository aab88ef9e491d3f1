#include <doctest.h>

#include "support/micro.hpp"
#include "tru/belief.hpp"
#include "tru/error.hpp"

using namespace tru;

namespace {

struct Fixture {
  std::shared_ptr<const AreaCatalog> cat =
      micro::catalog({micro::surface("Table", 0), micro::cabinet("Cabinet", 1), micro::cabinet("Pantry", 2)});
  SceneGraph base = SceneGraph(cat).with_object("cup", "Table").with_robot_at("Table");
  PlacementGoal goal = micro::goal({{"rice_jar", "Table"}});
  State in_cabinet{base.with_object("rice_jar", "Cabinet"), goal};
  State in_pantry{base.with_object("rice_jar", "Pantry"), goal};
};

}  // namespace

TEST_CASE("belief merges duplicates and prunes tiny weights") {
  Fixture f;
  const ParticleBelief b({{f.in_cabinet, 0.25}, {f.in_pantry, 0.5}, {f.in_cabinet, 0.25}, {f.in_pantry, 1e-13}});
  CHECK(b.size() == 2);
  CHECK(b.total_weight() == doctest::Approx(1.0));
  CHECK(b.normalized());
  CHECK_THROWS_AS(ParticleBelief().normalized_copy(), Error);
}

TEST_CASE("predict") {
  Fixture f;
  const RewardConfig cfg;
  const ParticleBelief b({{f.in_cabinet, 0.6}, {f.in_pantry, 0.4}});
  CHECK(predict(b, Action::null(), cfg).particles().size() == 2);
  const auto nulled = predict(b, Action::null(), cfg);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(nulled.particles()[i].state == b.particles()[i].state);

  const auto opened = predict(b, Action::open("Cabinet"), cfg);
  REQUIRE(opened.size() == 2);
  CHECK_FALSE(observe(opened.particles()[0].state) == observe(opened.particles()[1].state));
  CHECK(opened.total_weight() == doctest::Approx(1.0));

  // Picking the cup makes two states that only differed by goal identical.
  const State a{f.base.with_object("rice_jar", "Cabinet"), micro::goal({{"cup", "Pantry"}})};
  const ParticleBelief same({{a, 0.5}, {State{a.graph, micro::goal({{"cup", "Pantry"}})}, 0.5}});
  CHECK(same.size() == 1);
  CHECK(same.particles()[0].weight == doctest::Approx(1.0));
  CHECK_THROWS_AS(predict(ParticleBelief{}, Action::null(), cfg), Error);
}

TEST_CASE("eliminate") {
  Fixture f;
  const RewardConfig cfg;
  const ParticleBelief b({{f.in_cabinet, 0.6}, {f.in_pantry, 0.4}});
  SUBCASE("consistent observation keeps everything") {
    const auto r = eliminate(b, observe(f.in_cabinet), false, {});
    CHECK(r.w_bf == doctest::Approx(1.0));
    CHECK(r.survivors.size() == 2);
  }
  SUBCASE("opening an empty cabinet removes the particle that hid the jar there") {
    const auto truth = transition(f.in_pantry, Action::open("Cabinet"), cfg).next_state;
    const auto r = eliminate(predict(b, Action::open("Cabinet"), cfg), observe(truth), false, {});
    REQUIRE(r.survivors.size() == 1);
    CHECK(r.w_bf == doctest::Approx(0.4));
    CHECK(r.survivors.particles()[0].weight == doctest::Approx(0.4));
  }
  SUBCASE("visibly satisfied goal while not done is wrong") {
    const State cup_goal{f.in_cabinet.graph, micro::goal({{"cup", "Table"}})};
    const ParticleBelief two({{cup_goal, 0.5}, {f.in_cabinet, 0.5}});
    const auto r = eliminate(two, observe(f.in_cabinet), false, {});
    CHECK(r.survivors.size() == 1);
    REQUIRE(r.wrong_goals.size() == 1);
    CHECK(r.wrong_goals[0] == micro::goal({{"cup", "Table"}}));
    const auto kept = eliminate(two, observe(f.in_cabinet), true, {});
    CHECK(kept.survivors.size() == 2);
  }
  SUBCASE("failed goals are removed") {
    const auto r = eliminate(b, observe(f.in_cabinet), false, {f.goal});
    CHECK(r.survivors.empty());
    CHECK(r.w_bf == 0.0);
  }
}

TEST_CASE("hybrid update examples") {
  Fixture f;
  const BeliefUpdateConfig cfg{0.7};
  const State other{f.base.with_object("rice_jar", "Cabinet"), micro::goal({{"cup", "Cabinet"}})};
  SUBCASE("renormalize only") {
    const ParticleBelief bf({{f.in_cabinet, 0.3}, {f.in_pantry, 0.3}});
    const auto out = hybrid_update(bf, 0.6, std::nullopt, cfg);
    CHECK(out.particles()[0].weight == doctest::Approx(0.5));
    CHECK(out.normalized());
  }
  SUBCASE("merge scaled supplement") {
    const ParticleBelief bf({{f.in_cabinet, 0.2}});
    const ParticleBelief llm({{f.in_pantry, 0.5}, {other, 0.5}});
    const auto out = hybrid_update(bf, 0.2, llm, cfg);
    CHECK(out.size() == 3);
    CHECK(out.normalized());
    for (const auto& p : out.particles()) {
      if (p.state == f.in_pantry) CHECK(p.weight == doctest::Approx(0.4));
      if (p.state == f.in_cabinet) CHECK(p.weight == doctest::Approx(0.2));
    }
  }
  SUBCASE("supplement overlapping a survivor is merged") {
    const ParticleBelief bf({{f.in_cabinet, 0.1}});
    const ParticleBelief llm({{f.in_cabinet, 1.0}});
    const auto out = hybrid_update(bf, 0.1, llm, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out.particles()[0].weight == doctest::Approx(1.0));
  }
  SUBCASE("nothing survived") {
    const ParticleBelief llm({{f.in_pantry, 0.25}, {other, 0.75}});
    const auto out = hybrid_update(ParticleBelief{}, 0.0, llm, cfg);
    REQUIRE(out.size() == llm.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.particles()[i].state == llm.particles()[i].state);
      CHECK(out.particles()[i].weight == llm.particles()[i].weight);
    }
  }
  SUBCASE("supplement presence must agree with the threshold") {
    const ParticleBelief bf({{f.in_cabinet, 0.2}});
    try {
      hybrid_update(bf, 0.2, std::nullopt, cfg);
      FAIL("expected missing-supplement");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMissingSupplement);
    }
    try {
      hybrid_update(bf, 0.5, ParticleBelief({{f.in_pantry, 1.0}}), cfg);
      FAIL("expected spurious-supplement");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSpuriousSupplement);
    }
  }
  CHECK_THROWS_AS(validate(BeliefUpdateConfig{1.0}), Error);
  CHECK_THROWS_AS(validate(BeliefUpdateConfig{0.0}), Error);
}

TEST_CASE("predict then eliminate keeps the truth") {
  Fixture f;
  const RewardConfig cfg;
  ParticleBelief b({{f.in_cabinet, 0.5}, {f.in_pantry, 0.5}});
  State truth = f.in_pantry;
  for (const auto& a : {Action::open("Cabinet"), Action::open("Pantry"), Action::pick("Pantry", "rice_jar")}) {
    truth = transition(truth, a, cfg).next_state;
    const auto r = eliminate(predict(b, a, cfg), observe(truth), goal_satisfied(truth.graph, truth.goal), {});
    REQUIRE(r.w_bf > 0.0);
    b = r.survivors.normalized_copy();
    bool found = false;
    for (const auto& p : b.particles()) found = found || p.state == truth;
    CHECK(found);
  }
}

TEST_CASE("collapse and dump") {
  Fixture f;
  const ParticleBelief b({{f.in_cabinet, 0.4}, {f.in_pantry, 0.6}});
  const auto c = collapse_to_max(b);
  REQUIRE(c.size() == 1);
  CHECK(c.particles()[0].state == f.in_pantry);
  CHECK(c.particles()[0].weight == 1.0);
  const auto text = dump(b);
  CHECK(text.find("# belief particles=2") == 0);
  CHECK(text == dump(ParticleBelief({{f.in_pantry, 0.6}, {f.in_cabinet, 0.4}})));
}
