#include <doctest.h>

#include <random>

#include "engine_checks.hpp"
#include "gamette/error.hpp"
#include "gamette/flowsim.hpp"
#include "oracles.hpp"

using namespace gamette;

namespace {

ScenarioConfig quiet_scenario() {
  ScenarioConfig s;
  s.disruptions.clear();
  return s;
}

}  // namespace

TEST_SUITE("flowsim") {
  TEST_CASE("allocation policies under shortage") {
    CHECK(apply_allocation(AllocationPolicy::Proportional, 30, 40, 20) == std::pair<Units, Units>{20, 10});
    CHECK(apply_allocation(AllocationPolicy::HC2First, 30, 40, 20) == std::pair<Units, Units>{10, 20});
    CHECK(apply_allocation(AllocationPolicy::HC1First, 30, 40, 20) == std::pair<Units, Units>{30, 0});
    CHECK(apply_allocation(AllocationPolicy::Auto, 30, 40, 20) == std::pair<Units, Units>{20, 10});
  }

  TEST_CASE("allocation ships demand exactly when stock covers it") {
    for (auto p : {AllocationPolicy::HC1First, AllocationPolicy::HC2First, AllocationPolicy::Proportional})
      CHECK(apply_allocation(p, 60, 40, 20) == std::pair<Units, Units>{40, 20});
    CHECK_THROWS_AS(apply_allocation(AllocationPolicy::HC1First, -1, 1, 1), Error);
  }

  TEST_CASE("allocation never overships") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<Units> q(0, 100);
    for (int i = 0; i < 5000; ++i) {
      const Units inv = q(rng), a = q(rng), b = q(rng);
      for (auto p : {AllocationPolicy::HC1First, AllocationPolicy::HC2First, AllocationPolicy::Proportional}) {
        const auto [x, y] = apply_allocation(p, inv, a, b);
        CHECK(x >= 0);
        CHECK(y >= 0);
        CHECK(x <= a);
        CHECK(y <= b);
        CHECK(x + y == std::min(inv, a + b));
      }
    }
  }

  TEST_CASE("order-up-to formula") {
    CHECK(order_up_to(120, 40, 80, 0) == 0);
    CHECK(order_up_to(120, 10, 50, 20) == 80);
    CHECK(order_up_to(120, 200, 0, 0) == 0);
  }

  TEST_CASE("capacity under disruption") {
    const auto s = disrupted_scenario();
    CHECK(s.capacity(AgentId::MN1, 27) == 65);
    CHECK(s.capacity(AgentId::MN1, 28) == 3);
    CHECK(s.capacity(AgentId::MN1, 33) == 3);
    CHECK(s.capacity(AgentId::MN1, 34) == 65);
    CHECK(s.capacity(AgentId::MN2, 30) == 65);
  }

  TEST_CASE("capacity 200 cut to 5% produces 10 in week 28") {
    ScenarioConfig s;
    s.manufacturer_capacity = 200;
    s.disruptions = {{AgentId::MN1, 28, 28, 0.05}};
    ScriptedController script;
    script.orders[26] = 400;
    script.orders[27] = 400;
    const auto ep = run_standalone(s, default_controllers(script));
    for (const auto& w : ep.network) {
      if (w.week == 28) CHECK(w.row(AgentId::MN1).snapshot.shp == 10);
      if (w.week == 29) CHECK(w.row(AgentId::MN1).snapshot.shp == 200);
    }
  }

  TEST_CASE("bookkeeping invariants hold on random scenarios and scripts") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
      const auto s = oracle::random_scenario(rng);
      auto controllers = default_controllers(oracle::random_script(s, rng));
      controllers.insert_or_assign(AgentId::WS2, oracle::random_script(s, rng));
      const auto ep = run_standalone(s, controllers);
      INFO("trial " << trial);
      CHECK(oracle::check_engine_invariants(s, ep) == "");
      CHECK(ep.record.weeks.size() == static_cast<std::size_t>(s.horizon));
    }
  }

  TEST_CASE("steady state without disruption") {
    const auto ep = run_standalone(quiet_scenario(), default_controllers());
    for (std::size_t t = 1; t < ep.network.size(); ++t) {
      for (AgentId id : kAllAgents) {
        auto a = ep.network[t].row(id);
        auto b = ep.network[0].row(id);
        a.snapshot.week = b.snapshot.week = a.ledger.week = b.ledger.week = 0;
        CHECK(a == b);
        CHECK(a.snapshot.blg == 0);
      }
    }
    const auto& ws1 = ep.network[0].row(AgentId::WS1);
    CHECK(ws1.snapshot.dem_hc1 + ws1.snapshot.dem_hc2 == 40);
    CHECK(ws1.order == 40);
  }

  TEST_CASE("disruption signature at the focal wholesaler") {
    const auto s = disrupted_scenario();
    const auto ep = run_standalone(s, default_controllers());
    auto ws1 = [&](int week) { return ep.network[week - s.first_week()].row(AgentId::WS1).snapshot; };
    bool short_week = false;
    for (int w = 30; w <= 36; ++w) short_week = short_week || ws1(w).blg > 0;
    CHECK(short_week);
    for (int w = 45; w <= 55; ++w) CHECK(ws1(w).blg == 0);
    // HC1's split order to WS1 placed in week w is WS1's dem_hc1 in week w+1.
    auto hc1_to_ws1 = [&](int week) { return ws1(week + 1).dem_hc1; };
    bool dropped = false;
    for (int w = 28; w <= 33; ++w) dropped = dropped || hc1_to_ws1(w) < hc1_to_ws1(w - 1);
    CHECK(dropped);
    CHECK(hc1_to_ws1(33) < hc1_to_ws1(32));
    CHECK(oracle::check_engine_invariants(s, ep) == "");
  }

  TEST_CASE("an order placed at week t arrives at t+2") {
    ScriptedController script;
    script.orders[21] = 50;
    const auto ep = run_standalone(quiet_scenario(), default_controllers(script));
    CHECK(ep.record.weeks[0].order == 50);
    CHECK(ep.record.weeks[1].snapshot.shp == 40);
    CHECK(ep.record.weeks[2].snapshot.shp == 50);
  }

  TEST_CASE("runs are deterministic") {
    std::mt19937_64 rng(99);
    const auto s = oracle::random_scenario(rng);
    const auto script = oracle::random_script(s, rng);
    const auto a = run_standalone(s, default_controllers(script));
    const auto b = run_standalone(s, default_controllers(script));
    CHECK(a.record == b.record);
  }

  TEST_CASE("world stage misuse is a conflict") {
    World w(quiet_scenario());
    CHECK_THROWS_AS(w.ship(), Error);
    w.begin_week();
    CHECK_THROWS_AS(w.begin_week(), Error);
    CHECK_THROWS_AS(w.finish_week(), Error);
    w.ship();
    CHECK_THROWS_AS(w.finish_week({{AgentId::WS1, -1}}), Error);
    CHECK_THROWS_AS(w.finish_week({{AgentId::HC1, 3}}), Error);
    w.finish_week();
    CHECK(w.stage() == World::Stage::BetweenWeeks);
  }

  TEST_CASE("scenario validation") {
    auto s = quiet_scenario();
    s.horizon = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = quiet_scenario();
    s.trust_smoothing = 1.0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = quiet_scenario();
    s.disruptions.push_back({AgentId::WS1, 28, 30, 0.5});
    CHECK_THROWS_AS(s.validate(), Error);
    auto controllers = default_controllers();
    controllers.insert_or_assign(AgentId::MN1, ScriptedController{});
    CHECK_THROWS_AS(run_standalone(quiet_scenario(), controllers), Error);
  }
}
