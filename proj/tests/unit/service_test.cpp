#include <doctest.h>

#include <random>
#include <thread>

#include "gamette/error.hpp"
#include "gamette/http.hpp"
#include "gamette/service.hpp"
#include "gamette/telemetry.hpp"

using namespace gamette;
using namespace gamette::service;

namespace {

ScenarioConfig quiet_scenario() {
  ScenarioConfig s;
  s.disruptions.clear();
  return s;
}

// Plays to the end: suggestion orders and proportional allocation.
PlayerView play_out(SessionManager& m, const std::string& id) {
  PlayerView v = m.view(id);
  while (v.awaiting != Awaiting::Done) {
    v = v.awaiting == Awaiting::Allocation ? m.submit_allocation(id, AllocationPolicy::Proportional)
                                           : m.submit_order(id, *v.suggestion);
  }
  return v;
}

// The same decisions through the standalone engine, cut to the weeks played.
std::string replay(const Session& s) {
  auto record = run_standalone(s.scenario(), default_controllers(s.decisions()), s.id()).record;
  record.weeks.resize(s.telemetry().weeks.size());
  return telemetry::format_episode(record);
}

void expect_kind(auto&& fn, ErrorKind kind) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("Info sessions see the manufacturer, NoInfo sessions do not") {
    SessionManager m;
    const auto info = m.create(Condition::Info);
    const auto none = m.create(Condition::NoInfo);
    CHECK(info.condition == Condition::Info);
    CHECK(info.manufacturer_inventory.has_value());
    CHECK_FALSE(none.manufacturer_inventory.has_value());

    std::string id = none.session_id;
    PlayerView v = none;
    while (v.awaiting != Awaiting::Done) {
      CHECK(http::view_json(v).find("manufacturer") == std::string::npos);
      CHECK_FALSE(v.manufacturer_inventory.has_value());
      v = v.awaiting == Awaiting::Allocation ? m.submit_allocation(id, AllocationPolicy::HC1First)
                                             : m.submit_order(id, *v.suggestion);
    }
    CHECK(http::view_json(m.view(id)).find("manufacturer") == std::string::npos);
  }

  TEST_CASE("news arrives in the announcement week only") {
    SessionManager m;
    const auto id = m.create().session_id;
    PlayerView v = m.view(id);
    int seen = 0;
    while (v.awaiting != Awaiting::Done) {
      if (v.news) {
        ++seen;
        CHECK(v.week == 28);
      }
      v = v.awaiting == Awaiting::Allocation ? m.submit_allocation(id, AllocationPolicy::Proportional)
                                             : m.submit_order(id, *v.suggestion);
    }
    CHECK(seen >= 1);
  }

  TEST_CASE("same manager seed gives the same sessions") {
    ManagerOptions o;
    o.seed = 31;
    SessionManager a(o), b(o);
    for (int i = 0; i < 5; ++i) {
      const auto va = a.create();
      const auto vb = b.create();
      CHECK(va.session_id == vb.session_id);
      CHECK(http::view_json(va) == http::view_json(vb));
    }
    o.seed = 32;
    SessionManager c(o);
    CHECK(c.create().session_id != SessionManager(ManagerOptions{}).create().session_id);
  }

  TEST_CASE("unassigned conditions come out both ways") {
    SessionManager m;
    int info = 0;
    for (int i = 0; i < 40; ++i) info += m.create().condition == Condition::Info;
    CHECK(info > 5);
    CHECK(info < 35);
  }

  TEST_CASE("allocation is only asked for under shortage") {
    SessionManager m;
    const auto id = m.create().session_id;
    auto v = m.view(id);
    CHECK(v.week == 21);
    CHECK(v.awaiting == Awaiting::Order);
    CHECK(v.suggestion.has_value());
    expect_kind([&] { m.submit_allocation(id, AllocationPolicy::HC1First); }, ErrorKind::StateConflict);

    bool asked = false;
    while (v.awaiting != Awaiting::Done) {
      if (v.awaiting == Awaiting::Allocation) {
        asked = true;
        CHECK_FALSE(v.suggestion.has_value());
        CHECK(v.inv < v.blg + v.dem_hc1 + v.dem_hc2);
        const auto after = m.submit_allocation(id, AllocationPolicy::HC2First);
        CHECK(after.awaiting == Awaiting::Order);
        expect_kind([&] { m.submit_allocation(id, AllocationPolicy::HC2First); }, ErrorKind::StateConflict);
        v = after;
        continue;
      }
      v = m.submit_order(id, *v.suggestion);
    }
    CHECK(asked);
  }

  TEST_CASE("finished sessions reject input") {
    ManagerOptions o;
    o.scenario = quiet_scenario();
    SessionManager m(o);
    const auto id = m.create().session_id;
    const auto done = play_out(m, id);
    CHECK(done.week == 55);
    REQUIRE(done.totals.has_value());
    CHECK(done.totals->profit == done.profit_to_date);
    CHECK(done.blg == 0);
    expect_kind([&] { m.submit_order(id, 10); }, ErrorKind::StateConflict);
    expect_kind([&] { m.submit_allocation(id, AllocationPolicy::HC1First); }, ErrorKind::StateConflict);
  }

  TEST_CASE("bad input") {
    SessionManager m;
    const auto id = m.create().session_id;
    expect_kind([&] { m.submit_order(id, -1); }, ErrorKind::Validation);
    CHECK(m.view(id).week == 21);
    expect_kind([&] { m.view("nope"); }, ErrorKind::NotFound);
  }

  TEST_CASE("following the suggestion means zero deviation") {
    SessionManager m;
    const auto id = m.create().session_id;
    m.submit_order(id, *m.view(id).suggestion);
    const auto ep = telemetry::parse_episode(m.telemetry(id).text);
    REQUIRE(ep.weeks.size() == 1);
    CHECK(ep.weeks[0].snapshot.week == 21);
    CHECK(ep.weeks[0].order - ep.weeks[0].suggestion == 0);
  }

  TEST_CASE("an order arrives two weeks later") {
    ManagerOptions o;
    o.scenario = quiet_scenario();
    SessionManager m(o);
    const auto id = m.create().session_id;
    m.submit_order(id, 50);
    const auto w22 = m.view(id);
    CHECK(w22.arrived_shipment == 40);
    m.submit_order(id, *w22.suggestion);
    const auto w23 = m.view(id);
    CHECK(w23.week == 23);
    CHECK(w23.arrived_shipment == 50);
  }

  TEST_CASE("telemetry matches a standalone replay of the same decisions") {
    Session s("s1", disrupted_scenario());
    CHECK(telemetry::format_episode(s.telemetry()) ==
          "#session player_id=s1 condition=NoInfo seed=1 truth=none\n" + std::string(telemetry::kColumnHeader) + "\n");
    std::mt19937_64 rng(3);
    while (s.awaiting() != Awaiting::Done) {
      if (s.awaiting() == Awaiting::Allocation) {
        s.submit_allocation(static_cast<AllocationPolicy>(rng() % 3));
      } else {
        s.submit_order(static_cast<Units>(rng() % 120));
      }
      CHECK(telemetry::format_episode(s.telemetry()) == replay(s));
    }
    CHECK(s.telemetry().weeks.size() == 35);
  }

  TEST_CASE("idle sessions expire") {
    auto now = std::chrono::steady_clock::time_point{};
    ManagerOptions o;
    o.idle_timeout = std::chrono::seconds(60);
    o.clock = [&] { return now; };
    SessionManager m(o);
    const auto a = m.create().session_id;
    now += std::chrono::seconds(30);
    const auto b = m.create().session_id;
    now += std::chrono::seconds(20);
    m.view(a);
    CHECK(m.expire() == 0);
    now += std::chrono::seconds(50);
    CHECK(m.expire() == 1);
    expect_kind([&] { m.view(b); }, ErrorKind::NotFound);
    CHECK(m.view(a).session_id == a);
    CHECK(m.size() == 1);
    o.idle_timeout = std::chrono::seconds(0);
    CHECK_THROWS_AS(SessionManager{o}, Error);
  }

  TEST_CASE("concurrent sessions stay consistent") {
    SessionManager m;
    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) ids.push_back(m.create().session_id);
    std::vector<std::jthread> threads;
    for (int t = 0; t < 16; ++t) {
      threads.emplace_back([&, t] {
        std::mt19937_64 rng(t);
        for (int step = 0; step < 400; ++step) {
          const auto& id = ids[rng() % ids.size()];
          try {
            switch (rng() % 4) {
              case 0: m.submit_allocation(id, static_cast<AllocationPolicy>(rng() % 3)); break;
              case 1: m.submit_order(id, static_cast<Units>(rng() % 100)); break;
              case 2: m.view(id); break;
              default: m.telemetry(id); break;
            }
          } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::StateConflict);
          }
        }
      });
    }
    threads.clear();
    for (const auto& id : ids) {
      const auto ep = telemetry::parse_episode(m.telemetry(id).text);
      const auto v = m.view(id);
      if (v.awaiting != Awaiting::Done) CHECK(static_cast<int>(ep.weeks.size()) == v.week - 21);
    }
  }
}
