#include "gamette/flowsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gamette/error.hpp"

namespace gamette {

namespace {

constexpr std::size_t ws_slot(AgentId ws) { return ws == AgentId::WS1 ? 0 : 1; }

AgentId supplier_of(AgentId ws) { return ws == AgentId::WS1 ? AgentId::MN1 : AgentId::MN2; }

}  // namespace

Dollars EpisodeRecord::total_profit() const {
  Dollars total = 0;
  for (const auto& row : weeks) total += row.ledger.profit;
  return total;
}

Units ScenarioConfig::capacity(AgentId mn, int week) const {
  double multiplier = 1.0;
  for (const auto& d : disruptions) {
    if (d.target == mn && d.active(week)) multiplier *= d.capacity_multiplier;
  }
  return static_cast<Units>(std::floor(static_cast<double>(manufacturer_capacity) * multiplier + 1e-9));
}

void ScenarioConfig::validate() const {
  if (horizon < 1) throw validation_error("scenario: horizon must be >= 1");
  if (tutorial_weeks < 0) throw validation_error("scenario: tutorial_weeks must be >= 0");
  if (hc_consumption < 0) throw validation_error("scenario: hc_consumption must be >= 0");
  if (manufacturer_capacity < 0) throw validation_error("scenario: manufacturer_capacity must be >= 0");
  for (AgentId id : kAllAgents) {
    if (base_stock(id) <= 0)
      throw validation_error("scenario: base stock for " + std::string(to_string(id)) + " must be > 0");
  }
  if (announcement_week < start_week || announcement_week > last_week())
    throw validation_error("scenario: announcement_week outside the horizon");
  if (!(trust_smoothing > 0.0 && trust_smoothing < 1.0))
    throw validation_error("scenario: trust_smoothing must lie in (0,1)");
  for (const auto& d : disruptions) {
    if (!is_manufacturer(d.target)) throw validation_error("scenario: disruptions must target MN1 or MN2");
    if (d.start_week > d.end_week) throw validation_error("scenario: disruption start after end");
    if (!(d.capacity_multiplier >= 0.0 && d.capacity_multiplier <= 1.0))
      throw validation_error("scenario: capacity_multiplier must lie in [0,1]");
  }
}

ScenarioConfig disrupted_scenario() {
  ScenarioConfig config;
  config.disruptions.push_back({AgentId::MN1, 28, 33, 0.05});
  return config;
}

Units order_up_to(Units base_stock, Units inv, Units oor, Units blg) {
  return std::max<Units>(0, base_stock - (inv + oor - blg));
}

std::pair<Units, Units> apply_allocation(AllocationPolicy policy, Units inv, Units dem_hc1,
                                         Units dem_hc2) {
  if (inv < 0 || dem_hc1 < 0 || dem_hc2 < 0) throw validation_error("apply_allocation: negative input");
  if (inv >= dem_hc1 + dem_hc2) return {dem_hc1, dem_hc2};
  switch (policy) {
    case AllocationPolicy::HC1First: {
      const Units first = std::min(inv, dem_hc1);
      return {first, std::min(inv - first, dem_hc2)};
    }
    case AllocationPolicy::HC2First: {
      const Units second = std::min(inv, dem_hc2);
      return {std::min(inv - second, dem_hc1), second};
    }
    case AllocationPolicy::Proportional:
    case AllocationPolicy::Auto: {
      const std::array<double, 2> weights{static_cast<double>(dem_hc1), static_cast<double>(dem_hc2)};
      const auto parts = largest_remainder_split(inv, weights);
      return {parts[0], parts[1]};
    }
  }
  return {0, 0};
}

World::World(ScenarioConfig config) : config_(std::move(config)), week_(config_.first_week()) {
  config_.validate();
  initialize_steady_state();
}

std::array<AgentId, 2> World::customers_of(AgentId supplier) const {
  switch (supplier) {
    case AgentId::MN1: return {AgentId::WS1, AgentId::WS1};
    case AgentId::MN2: return {AgentId::WS2, AgentId::WS2};
    default: return {AgentId::HC1, AgentId::HC2};
  }
}

void World::initialize_steady_state() {
  // Pipelines are filled as if the network had been stationary up to the end
  // of the week before the first simulated week.
  const int t0 = week_ - 1;
  const Units d = config_.hc_consumption;
  const TrustState neutral;
  const auto split1 = hc_split_orders(d, neutral, config_.hc1_split);
  const auto split2 = hc_split_orders(d, neutral, config_.hc2_split);
  const std::array<std::array<Units, 2>, 2> hc_split{split1, split2};

  for (AgentId hc : {AgentId::HC1, AgentId::HC2}) {
    AgentState& s = at(hc);
    const auto& parts = hc_split[hc == AgentId::HC1 ? 0 : 1];
    s.inv = std::max<Units>(0, config_.base_stock(hc) - 2 * d);
    s.oor = 2 * d;
    for (AgentId ws : {AgentId::WS1, AgentId::WS2}) {
      const Units q = parts[ws_slot(ws)];
      s.inbound.push_back({t0 + 1, ws, q});
      s.placed[ws_slot(ws)].push_back({t0 - 1, q});
      s.placed[ws_slot(ws)].push_back({t0, q});
      at(ws).incoming_orders.emplace_back(hc, q);
    }
  }
  for (AgentId ws : {AgentId::WS1, AgentId::WS2}) {
    AgentState& s = at(ws);
    Units flow = 0;
    for (const auto& [customer, q] : s.incoming_orders) flow += q;
    s.inv = std::max<Units>(0, config_.base_stock(ws) - 2 * flow);
    s.oor = 2 * flow;
    s.inbound.push_back({t0 + 1, supplier_of(ws), flow});
    AgentState& mn = at(supplier_of(ws));
    mn.incoming_orders.emplace_back(ws, flow);
    mn.inv = std::max<Units>(0, config_.base_stock(supplier_of(ws)) - flow);
    mn.oor = flow;  // production requested last week
  }
  for (AgentId id : kAllAgents) initial_inv_[index_of(id)] = at(id).inv;
}

void World::send_order(AgentId customer, AgentId supplier, Units qty) {
  at(supplier).incoming_orders.emplace_back(customer, qty);
  AgentState& c = at(customer);
  c.oor += qty;
  if (is_health_center(customer)) c.placed[ws_slot(supplier)].push_back({week_, qty});
}

void World::begin_week() {
  if (stage_ != Stage::BetweenWeeks) throw state_conflict("begin_week: previous week not finished");
  if (week_ > config_.last_week()) throw state_conflict("begin_week: horizon exhausted");

  // (1) receive arrivals
  for (AgentId id : kAllAgents) {
    AgentState& s = at(id);
    s.received = 0;
    s.shipped_a = s.shipped_b = 0;
    std::array<Units, 2> from_ws{0, 0};
    while (!s.inbound.empty() && s.inbound.front().arrival_week <= week_) {
      const Inbound in = s.inbound.front();
      s.inbound.pop_front();
      s.inv += in.qty;
      s.oor -= in.qty;
      s.received += in.qty;
      if (is_wholesaler(in.from)) from_ws[ws_slot(in.from)] += in.qty;
    }
    if (is_health_center(id)) {
      for (AgentId ws : {AgentId::WS1, AgentId::WS2}) {
        auto& placed = s.placed[ws_slot(ws)];
        Units due = 0;
        while (!placed.empty() && placed.front().week <= week_ - 2) {
          due += placed.front().qty;
          placed.pop_front();
        }
        s.trust = update_trust(s.trust, ws, due, from_ws[ws_slot(ws)], config_.trust_smoothing);
      }
    }
  }

  // (2) capacity-capped production
  for (AgentId mn : {AgentId::MN1, AgentId::MN2}) {
    AgentState& s = at(mn);
    const Units produced = std::min(s.oor, config_.capacity(mn, week_));
    s.inv += produced;
    s.oor -= produced;
    s.received += produced;
  }

  // (3) last week's orders arrive as demand
  for (AgentId id : kAllAgents) {
    AgentState& s = at(id);
    s.demand = std::move(s.incoming_orders);
    s.incoming_orders.clear();
    if (is_health_center(id)) s.demand = {{id, config_.hc_consumption}};
    s.inv_at_review = s.inv;
  }
  stage_ = Stage::Review;
}

Units World::backlog(AgentId id) const {
  Units total = 0;
  for (const auto& line : at(id).backlog) total += line.qty;
  return total;
}

Units World::demand_from(AgentId supplier, AgentId customer) const {
  Units total = 0;
  for (const auto& [c, q] : at(supplier).demand) {
    if (c == customer) total += q;
  }
  return total;
}

bool World::needs_allocation(AgentId ws) const {
  if (!is_wholesaler(ws)) return false;
  if (stage_ != Stage::Review) return false;
  const AgentState& s = at(ws);
  Units owed = backlog(ws);
  for (const auto& [c, q] : s.demand) owed += q;
  return s.inv < owed;
}

void World::ship_supplier(AgentId supplier, AllocationPolicy policy) {
  AgentState& s = at(supplier);
  const auto customers = customers_of(supplier);
  std::array<Units, 2> shipped{0, 0};
  auto slot_of = [&](AgentId c) -> std::size_t { return c == customers[0] ? 0 : 1; };

  Units available = s.inv;
  while (!s.backlog.empty() && available > 0) {
    BacklogLine& line = s.backlog.front();
    const Units q = std::min(line.qty, available);
    shipped[slot_of(line.customer)] += q;
    line.qty -= q;
    available -= q;
    if (line.qty == 0) s.backlog.pop_front();
  }

  const Units dem_a = demand_from(supplier, customers[0]);
  const Units dem_b = customers[0] == customers[1] ? 0 : demand_from(supplier, customers[1]);
  const auto [ship_a, ship_b] = apply_allocation(policy, available, dem_a, dem_b);
  shipped[0] += ship_a;
  shipped[1] += ship_b;
  available -= ship_a + ship_b;
  if (dem_a > ship_a) s.backlog.push_back({week_, customers[0], dem_a - ship_a});
  if (dem_b > ship_b) s.backlog.push_back({week_, customers[1], dem_b - ship_b});

  s.inv = available;
  s.shipped_a = shipped[0];
  s.shipped_b = shipped[1];
  for (std::size_t k = 0; k < 2; ++k) {
    if (shipped[k] > 0) at(customers[k]).inbound.push_back({week_ + 1, supplier, shipped[k]});
  }
}

void World::consume(AgentId hc) {
  AgentState& s = at(hc);
  const Units used = std::min(s.inv, config_.hc_consumption);
  s.inv -= used;
  s.shipped_a = used;
  s.shipped_b = 0;
}

void World::ship(const std::map<AgentId, AllocationPolicy>& policies) {
  if (stage_ != Stage::Review) throw state_conflict("ship: week not in review");
  for (const auto& [id, policy] : policies) {
    if (!is_wholesaler(id))
      throw validation_error("ship: allocation policy given for non-wholesaler " + std::string(to_string(id)));
  }
  for (AgentId mn : {AgentId::MN1, AgentId::MN2}) ship_supplier(mn, AllocationPolicy::Auto);
  for (AgentId ws : {AgentId::WS1, AgentId::WS2}) {
    const auto it = policies.find(ws);
    ship_supplier(ws, it == policies.end() ? AllocationPolicy::Proportional : it->second);
  }
  for (AgentId hc : {AgentId::HC1, AgentId::HC2}) consume(hc);
  stage_ = Stage::Ordering;
}

AgentSnapshot World::snapshot(AgentId id) const {
  const AgentState& s = at(id);
  AgentSnapshot snap;
  snap.week = week_;
  snap.inv = s.inv;
  if (is_health_center(id)) {
    snap.dem_hc1 = config_.hc_consumption;
  } else {
    const auto customers = customers_of(id);
    snap.dem_hc1 = demand_from(id, customers[0]);
    snap.dem_hc2 = customers[0] == customers[1] ? 0 : demand_from(id, customers[1]);
  }
  snap.blg = backlog(id);
  snap.shp = s.received;
  snap.oor = s.oor;
  return snap;
}

Units World::suggestion(AgentId id) const {
  const AgentState& s = at(id);
  return order_up_to(config_.base_stock(id), s.inv, s.oor, backlog(id));
}

Units World::manufacturer_inventory_at_review(AgentId mn) const {
  if (!is_manufacturer(mn)) throw validation_error("manufacturer_inventory_at_review: not a manufacturer");
  return at(mn).inv_at_review;
}

const TrustState& World::trust(AgentId hc) const {
  if (!is_health_center(hc)) throw validation_error("trust: not a health center");
  return at(hc).trust;
}

WeekResult World::finish_week(const std::map<AgentId, Units>& wholesaler_orders) {
  if (stage_ != Stage::Ordering) throw state_conflict("finish_week: shipping not done");
  for (const auto& [id, qty] : wholesaler_orders) {
    if (!is_wholesaler(id))
      throw validation_error("finish_week: order given for non-wholesaler " + std::string(to_string(id)));
    if (qty < 0) throw validation_error("finish_week: negative order quantity");
  }

  WeekResult result;
  result.week = week_;
  std::array<Units, kAgentCount> orders{};
  for (AgentId id : kAllAgents) {
    const AgentState& s = at(id);
    WeekRow& row = result.rows[index_of(id)];
    row.agent = id;
    row.snapshot = snapshot(id);
    row.suggestion = suggestion(id);
    const auto it = wholesaler_orders.find(id);
    row.order = it == wholesaler_orders.end() ? row.suggestion : it->second;
    orders[index_of(id)] = row.order;
    row.ship_hc1 = s.shipped_a;
    row.ship_hc2 = s.shipped_b;
    const CostRates& c = config_.costs;
    row.ledger.week = week_;
    row.ledger.holding_cost = c.holding_per_unit * row.snapshot.inv;
    row.ledger.stockout_cost = c.stockout_per_unit * row.snapshot.blg;
    row.ledger.revenue = c.revenue_per_unit * (s.shipped_a + s.shipped_b);
    row.ledger.profit = row.ledger.revenue - row.ledger.holding_cost - row.ledger.stockout_cost;
  }

  // (5) place upstream orders
  for (AgentId mn : {AgentId::MN1, AgentId::MN2}) at(mn).oor += orders[index_of(mn)];
  for (AgentId ws : {AgentId::WS1, AgentId::WS2}) send_order(ws, supplier_of(ws), orders[index_of(ws)]);
  for (AgentId hc : {AgentId::HC1, AgentId::HC2}) {
    const SplitMode mode = hc == AgentId::HC1 ? config_.hc1_split : config_.hc2_split;
    const auto parts = hc_split_orders(orders[index_of(hc)], at(hc).trust, mode);
    send_order(hc, AgentId::WS1, parts[0]);
    send_order(hc, AgentId::WS2, parts[1]);
  }

  stage_ = Stage::BetweenWeeks;
  ++week_;
  return result;
}

WeekResult World::advance_week(const std::map<AgentId, Decision>& decisions) {
  for (const auto& [id, d] : decisions) {
    if (!is_wholesaler(id))
      throw validation_error("advance_week: no external controller for " + std::string(to_string(id)));
    if (d.order && *d.order < 0) throw validation_error("advance_week: negative order quantity");
  }
  begin_week();
  std::map<AgentId, AllocationPolicy> policies;
  for (const auto& [id, d] : decisions) {
    if (d.allocation) policies[id] = *d.allocation;
  }
  ship(policies);
  std::map<AgentId, Units> orders;
  for (const auto& [id, d] : decisions) {
    if (d.order) orders[id] = *d.order;
  }
  return finish_week(orders);
}

std::map<AgentId, Controller> default_controllers(Controller ws1) {
  std::map<AgentId, Controller> controllers;
  for (AgentId id : kAllAgents) controllers.emplace(id, OrderUpToController{});
  controllers.insert_or_assign(AgentId::WS1, std::move(ws1));
  return controllers;
}

Episode run_standalone(const ScenarioConfig& config, std::map<AgentId, Controller> controllers,
                       std::string player_id) {
  if (config.horizon < 1) throw validation_error("run_standalone: empty episode (horizon 0)");
  for (AgentId id : kAllAgents) {
    const auto it = controllers.find(id);
    if (it == controllers.end())
      throw validation_error("run_standalone: no controller for " + std::string(to_string(id)));
    if (!is_wholesaler(id) && !std::holds_alternative<OrderUpToController>(it->second))
      throw validation_error("run_standalone: " + std::string(to_string(id)) +
                             " only supports the order-up-to controller");
  }

  World world(config);
  Episode episode;
  episode.record.player_id = std::move(player_id);
  episode.record.condition = config.condition;
  episode.record.seed = config.rng_seed;
  if (const auto* b = std::get_if<BehavioralController>(&controllers.at(AgentId::WS1))) {
    episode.record.player_type_truth = b->agent.policy().player_type;
  }
  for (AgentId id : kAllAgents) episode.initial_inventory[index_of(id)] = world.initial_inventory(id);
  episode.network.reserve(static_cast<std::size_t>(config.last_week() - config.first_week() + 1));

  while (world.week() <= config.last_week()) {
    const int week = world.week();
    const bool gameplay = week >= config.start_week;
    world.begin_week();

    std::map<AgentId, AllocationPolicy> policies;
    for (AgentId ws : {AgentId::WS1, AgentId::WS2}) {
      AllocationPolicy policy = AllocationPolicy::Proportional;
      if (gameplay) {
        std::visit(
            [&](const auto& c) {
              using T = std::decay_t<decltype(c)>;
              if constexpr (std::is_same_v<T, ScriptedController>) {
                const auto it = c.allocations.find(week);
                policy = it == c.allocations.end() ? c.default_allocation : it->second;
              } else {
                policy = c.allocation;
              }
            },
            controllers.at(ws));
      }
      policies[ws] = policy;
    }
    world.ship(policies);

    std::map<AgentId, Units> orders;
    for (AgentId ws : {AgentId::WS1, AgentId::WS2}) {
      const Units suggestion = world.suggestion(ws);
      Units order = suggestion;
      if (gameplay) {
        std::visit(
            [&](auto& c) {
              using T = std::decay_t<decltype(c)>;
              if constexpr (std::is_same_v<T, ScriptedController>) {
                const auto it = c.orders.find(week);
                if (it != c.orders.end()) order = it->second;
              } else if constexpr (std::is_same_v<T, BehavioralController>) {
                order = c.agent.order(suggestion, week, world.snapshot(ws));
              }
            },
            controllers.at(ws));
      }
      orders[ws] = order;
    }
    WeekResult result = world.finish_week(orders);
    if (gameplay) episode.record.weeks.push_back(result.row(AgentId::WS1));
    episode.network.push_back(std::move(result));
  }
  return episode;
}

}  // namespace gamette
