#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gamette/agents.hpp"
#include "gamette/error.hpp"

using namespace gamette;

TEST_SUITE("agents") {
  TEST_CASE("largest remainder split: sums, bounds and exact quotas") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> w(0.0, 3.0);
    std::uniform_int_distribution<Units> total(0, 500);
    for (int trial = 0; trial < 3000; ++trial) {
      std::vector<double> weights(1 + rng() % 5);
      for (auto& x : weights) x = w(rng);
      const Units t = total(rng);
      const auto parts = largest_remainder_split(t, weights);
      CHECK(std::accumulate(parts.begin(), parts.end(), Units{0}) == t);
      const double ws = std::accumulate(weights.begin(), weights.end(), 0.0);
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const double quota = ws > 0 ? t * weights[i] / ws : static_cast<double>(t) / weights.size();
        CHECK(parts[i] >= std::floor(quota - 1e-9));
        CHECK(parts[i] <= std::ceil(quota + 1e-9));
      }
    }
    const std::vector<double> quarters{1, 1, 1, 1};
    CHECK(largest_remainder_split(40, quarters) == std::vector<Units>{10, 10, 10, 10});
    const std::vector<double> thirds{1, 1, 1};
    // 10/3 each; the leftover unit goes to the lowest index.
    CHECK(largest_remainder_split(10, thirds) == std::vector<Units>{4, 3, 3});
    const std::vector<double> zeros{0, 0};
    CHECK(largest_remainder_split(5, zeros) == std::vector<Units>{3, 2});
    const std::vector<double> negative{1, -1};
    CHECK_THROWS_AS(largest_remainder_split(5, negative), Error);
  }

  TEST_CASE("trust under perfect fill approaches one geometrically") {
    TrustState t;
    for (int i = 0; i < 10; ++i) t = update_trust(t, AgentId::WS1, 20, 20, 0.7);
    CHECK(t.of(AgentId::WS1) == doctest::Approx(1.0 - 0.5 * std::pow(0.7, 10)).epsilon(1e-12));
    CHECK(t.of(AgentId::WS1) == doctest::Approx(0.98588).epsilon(1e-5));
    CHECK(t.of(AgentId::WS2) == 0.5);
  }

  TEST_CASE("trust fill rate edge cases") {
    TrustState t;
    t = update_trust(t, AgentId::WS2, 0, 0, 0.7);
    CHECK(t.of(AgentId::WS2) == doctest::Approx(0.7 * 0.5 + 0.3));
    t = update_trust(TrustState{}, AgentId::WS2, 10, 30, 0.7);  // over-delivery clamps to 1
    CHECK(t.of(AgentId::WS2) == doctest::Approx(0.65));
    t = update_trust(TrustState{}, AgentId::WS1, 10, 0, 0.7);
    CHECK(t.of(AgentId::WS1) == doctest::Approx(0.35));
    CHECK_THROWS_AS(update_trust(TrustState{}, AgentId::HC1, 1, 1), Error);
  }

  TEST_CASE("hc order split") {
    CHECK(hc_split_orders(41, TrustState{}, SplitMode::Equal) == std::array<Units, 2>{21, 20});
    TrustState t;
    t.trust = {0.75, 0.25};
    CHECK(hc_split_orders(40, t, SplitMode::TrustBased) == std::array<Units, 2>{30, 10});
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
      t.trust = {std::uniform_real_distribution<double>(0, 1)(rng), std::uniform_real_distribution<double>(0, 1)(rng)};
      const Units total = static_cast<Units>(rng() % 200);
      for (auto mode : {SplitMode::TrustBased, SplitMode::Equal}) {
        const auto p = hc_split_orders(total, t, mode);
        CHECK(p[0] + p[1] == total);
        CHECK(p[0] >= 0);
        CHECK(p[1] >= 0);
      }
    }
  }

  TEST_CASE("follower orders the suggestion") {
    BehavioralAgent a(default_behavioral_policy(PlayerType::Follower, 120, 9));
    for (int w = 21; w <= 55; ++w) CHECK(a.order(w, w, {}) == w);
  }

  TEST_CASE("reactor follows until the reaction week then holds its opening mode") {
    BehavioralAgent a(default_behavioral_policy(PlayerType::Reactor, 120, 4, 28, 21));
    for (int w = 21; w < 28; ++w) {
      CHECK(a.order(50, w, {}) == 50);
      CHECK_FALSE(a.current_mode().has_value());
    }
    for (int w = 28; w < 31; ++w) {
      a.order(50, w, {});
      CHECK(a.current_mode() == 2u);
    }
  }

  TEST_CASE("hoarder holds its opening mode past the reaction week") {
    const auto policy = default_behavioral_policy(PlayerType::Hoarder, 120, 4, 28, 21);
    CHECK(policy.hold_weeks == 10);
    BehavioralAgent a(policy);
    for (int w = 21; w < 31; ++w) {
      const Units q = a.order(40, w, {});
      CHECK(a.current_mode() == 1u);
      CHECK(q >= 0);
    }
  }

  TEST_CASE("behavioral agents are deterministic in their seed") {
    for (auto type : kAllPlayerTypes) {
      BehavioralAgent a(default_behavioral_policy(type, 120, 77));
      BehavioralAgent b(default_behavioral_policy(type, 120, 77));
      for (int w = 21; w <= 55; ++w) CHECK(a.order(60, w, {}) == b.order(60, w, {}));
    }
  }

  TEST_CASE("policy validation") {
    auto p = default_behavioral_policy(PlayerType::Hoarder, 120, 1);
    p.mode_transition[0][0] = 0.9;
    CHECK_THROWS_AS(p.validate(), Error);
    auto f = default_behavioral_policy(PlayerType::Follower, 120, 1);
    f.mode_emission[0].mean = 1.0;
    CHECK_THROWS_AS(f.validate(), Error);
    BehavioralAgent a(default_behavioral_policy(PlayerType::Follower, 120, 1));
    CHECK_THROWS_AS(a.order(-1, 21, {}), Error);
  }
}
