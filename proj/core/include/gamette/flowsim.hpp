#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "gamette/agents.hpp"
#include "gamette/episode.hpp"
#include "gamette/snapshot.hpp"
#include "gamette/types.hpp"

namespace gamette {

struct DisruptionEvent {
  AgentId target = AgentId::MN1;
  int start_week = 0;
  int end_week = 0;
  double capacity_multiplier = 1.0;

  bool active(int week) const { return week >= start_week && week <= end_week; }
};

struct CostRates {
  Dollars holding_per_unit = 1;
  Dollars stockout_per_unit = 10;
  Dollars revenue_per_unit = 5;
};

struct ScenarioConfig {
  int horizon = 35;
  int start_week = 21;
  int tutorial_weeks = 4;
  Units hc_consumption = 40;
  // Indexed by AgentId.
  std::array<Units, kAgentCount> base_stock_levels{120, 120, 120, 120, 80, 80};
  Units manufacturer_capacity = 65;
  std::vector<DisruptionEvent> disruptions;
  int announcement_week = 28;
  Condition condition = Condition::NoInfo;
  double trust_smoothing = 0.7;
  std::uint64_t rng_seed = 1;
  CostRates costs;
  SplitMode hc1_split = SplitMode::TrustBased;
  SplitMode hc2_split = SplitMode::Equal;

  int first_week() const { return start_week - tutorial_weeks; }
  int last_week() const { return start_week + horizon - 1; }
  Units base_stock(AgentId id) const { return base_stock_levels[index_of(id)]; }
  /// Capacity of a manufacturer in a given week after disruptions.
  Units capacity(AgentId mn, int week) const;
  void validate() const;
};

/// The gameplay scenario: MN1 loses 95% of its capacity on weeks 28-33.
ScenarioConfig disrupted_scenario();

/// max(0, S - (inv + oor - blg)).
Units order_up_to(Units base_stock, Units inv, Units oor, Units blg);

/// Splits available inventory between the two health centers. Whenever
/// inventory covers total demand, demand is shipped exactly, whatever the
/// policy. Auto under shortage falls back to Proportional.
std::pair<Units, Units> apply_allocation(AllocationPolicy policy, Units inv, Units dem_hc1,
                                         Units dem_hc2);

/// A wholesaler decision for one week. Missing fields fall back to the
/// scripted behavior (order-up-to, proportional allocation).
struct Decision {
  std::optional<AllocationPolicy> allocation;
  std::optional<Units> order;
};

struct WeekResult {
  int week = 0;
  std::array<WeekRow, kAgentCount> rows;

  const WeekRow& row(AgentId id) const { return rows[index_of(id)]; }
};

/// Mutable state of the six-agent network. Each week runs
///   begin_week():  receive arrivals, produce, take in downstream orders
///   ship():        serve backlog oldest-first, then allocate new demand
///   finish_week(): place upstream orders, accrue the ledger
/// A World has a single writer.
class World {
 public:
  enum class Stage : std::uint8_t { BetweenWeeks, Review, Ordering };

  explicit World(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  int week() const { return week_; }
  Stage stage() const { return stage_; }

  void begin_week();
  /// True when a wholesaler's inventory cannot cover backlog plus new demand.
  bool needs_allocation(AgentId ws) const;
  void ship(const std::map<AgentId, AllocationPolicy>& policies = {});
  /// Order-up-to suggestion from the post-shipping state.
  Units suggestion(AgentId id) const;
  WeekResult finish_week(const std::map<AgentId, Units>& wholesaler_orders = {});

  /// Runs a full weekly cycle.
  WeekResult advance_week(const std::map<AgentId, Decision>& decisions = {});

  /// State visible at the current stage (post-receipt during Review,
  /// post-shipping during Ordering).
  AgentSnapshot snapshot(AgentId id) const;
  Units inventory(AgentId id) const { return agents_[index_of(id)].inv; }
  Units backlog(AgentId id) const;
  Units on_order(AgentId id) const { return agents_[index_of(id)].oor; }
  Units initial_inventory(AgentId id) const { return initial_inv_[index_of(id)]; }
  /// MN inventory after this week's production, before shipping.
  Units manufacturer_inventory_at_review(AgentId mn) const;
  const TrustState& trust(AgentId hc) const;
  /// Demand each customer sent this week, as seen by `supplier`.
  Units demand_from(AgentId supplier, AgentId customer) const;

 private:
  struct Inbound {
    int arrival_week;
    AgentId from;
    Units qty;
  };
  struct BacklogLine {
    int week;
    AgentId customer;
    Units qty;
  };
  struct PlacedOrder {
    int week;
    Units qty;
  };
  struct AgentState {
    Units inv = 0;
    Units oor = 0;
    Units production_queue = 0;  // MN only
    std::deque<Inbound> inbound;
    std::deque<BacklogLine> backlog;
    // Orders placed last week, delivered as demand at the next begin_week.
    std::vector<std::pair<AgentId, Units>> incoming_orders;
    std::vector<std::pair<AgentId, Units>> demand;  // this week
    Units received = 0;
    Units shipped_a = 0;
    Units shipped_b = 0;
    Units inv_at_review = 0;
    TrustState trust;
    // HC only: orders placed per supplier (WS1, WS2), oldest first.
    std::array<std::deque<PlacedOrder>, 2> placed;
  };

  AgentState& at(AgentId id) { return agents_[index_of(id)]; }
  const AgentState& at(AgentId id) const { return agents_[index_of(id)]; }
  void initialize_steady_state();
  void ship_supplier(AgentId supplier, AllocationPolicy policy);
  void consume(AgentId hc);
  void send_order(AgentId customer, AgentId supplier, Units qty);
  std::array<AgentId, 2> customers_of(AgentId supplier) const;

  ScenarioConfig config_;
  int week_;
  Stage stage_ = Stage::BetweenWeeks;
  std::array<AgentState, kAgentCount> agents_;
  std::array<Units, kAgentCount> initial_inv_{};
};

struct OrderUpToController {
  AllocationPolicy allocation = AllocationPolicy::Proportional;
};

/// Replays fixed order quantities keyed by week; weeks without an entry use
/// the suggestion.
struct ScriptedController {
  std::map<int, Units> orders;
  std::map<int, AllocationPolicy> allocations;
  AllocationPolicy default_allocation = AllocationPolicy::Proportional;
};

struct BehavioralController {
  BehavioralAgent agent;
  AllocationPolicy allocation = AllocationPolicy::Proportional;
};

using Controller = std::variant<OrderUpToController, ScriptedController, BehavioralController>;

struct Episode {
  EpisodeRecord record;              // WS1 gameplay rows
  std::vector<WeekResult> network;   // every agent, every simulated week
  std::array<Units, kAgentCount> initial_inventory{};
};

/// Runs the scenario from its first tutorial week through the horizon. Every
/// agent needs a controller; manufacturers and health centers accept only
/// OrderUpToController. Wholesalers play order-up-to during tutorial weeks.
Episode run_standalone(const ScenarioConfig& config, std::map<AgentId, Controller> controllers,
                       std::string player_id = "standalone");

/// Controllers map with every agent on order-up-to, WS1 replaced by `ws1`.
std::map<AgentId, Controller> default_controllers(Controller ws1 = OrderUpToController{});

}  // namespace gamette
