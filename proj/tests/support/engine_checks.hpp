#pragma once

// Integer-exact bookkeeping checks over a simulated network, written from
// the weekly cycle rules rather than from the engine code.

#include <algorithm>
#include <string>

#include "gamette/flowsim.hpp"

namespace oracle {

inline std::string check_engine_invariants(const gamette::ScenarioConfig& config, const gamette::Episode& ep) {
  using namespace gamette;
  const auto& net = ep.network;
  auto fail = [](const std::string& what, AgentId id, int week) {
    return what + " broken for " + std::string(to_string(id)) + " at week " + std::to_string(week);
  };
  for (std::size_t t = 0; t < net.size(); ++t) {
    const int week = net[t].week;
    if (week != config.first_week() + static_cast<int>(t)) return "weeks are not consecutive";
    for (AgentId id : kAllAgents) {
      const WeekRow& r = net[t].row(id);
      const auto& s = r.snapshot;
      const Units out = r.ship_hc1 + r.ship_hc2;
      const Units before = t == 0 ? ep.initial_inventory[index_of(id)] : net[t - 1].row(id).snapshot.inv;

      // Stock: what was there, plus what came in, minus what went out.
      if (s.inv != before + s.shp - out) return fail("flow conservation", id, week);
      if (s.inv < 0 || s.blg < 0 || s.oor < 0 || r.order < 0) return fail("non-negativity", id, week);

      const auto& c = config.costs;
      const auto& l = r.ledger;
      if (l.holding_cost != c.holding_per_unit * s.inv || l.stockout_cost != c.stockout_per_unit * s.blg ||
          l.revenue != c.revenue_per_unit * out || l.profit != l.revenue - l.holding_cost - l.stockout_cost)
        return fail("ledger identity", id, week);

      if (is_health_center(id)) {
        // Lost sales: consumption is capped by stock and nothing is owed.
        if (r.ship_hc1 != std::min(before + s.shp, config.hc_consumption) || s.blg != 0)
          return fail("health-center consumption", id, week);
      }
      if (t == 0) continue;
      const auto& prev = net[t - 1].row(id);

      // Pipeline: on-order grows by last week's order and shrinks by receipts.
      if (s.oor != prev.snapshot.oor + prev.order - s.shp) return fail("on-order accounting", id, week);

      if (!is_health_center(id)) {
        const Units demand = s.dem_hc1 + s.dem_hc2;
        if (s.blg != prev.snapshot.blg + demand - out) return fail("backlog accounting", id, week);
      }
      if (is_wholesaler(id)) {
        const AgentId mn = id == AgentId::WS1 ? AgentId::MN1 : AgentId::MN2;
        // An order reaches the supplier one week later and the goods shipped
        // then arrive one week after that.
        if (net[t].row(mn).snapshot.dem_hc1 != prev.order) return fail("order delivery", id, week);
        if (s.shp != net[t - 1].row(mn).ship_hc1) return fail("shipment lead time", id, week);
      }
      if (is_health_center(id)) {
        const bool first = id == AgentId::HC1;
        const Units from_ws = first ? net[t - 1].row(AgentId::WS1).ship_hc1 + net[t - 1].row(AgentId::WS2).ship_hc1
                                    : net[t - 1].row(AgentId::WS1).ship_hc2 + net[t - 1].row(AgentId::WS2).ship_hc2;
        if (s.shp != from_ws) return fail("shipment lead time", id, week);
        const auto& ws1 = net[t].row(AgentId::WS1).snapshot;
        const auto& ws2 = net[t].row(AgentId::WS2).snapshot;
        const Units ordered = first ? ws1.dem_hc1 + ws2.dem_hc1 : ws1.dem_hc2 + ws2.dem_hc2;
        if (ordered != prev.order) return fail("order split", id, week);
      }
      if (is_manufacturer(id)) {
        // One-week production: output is last week's queue, capped.
        const Units queue = prev.snapshot.oor + prev.order;
        if (s.shp != std::min(queue, config.capacity(id, week))) return fail("production", id, week);
      }
    }
  }
  return {};
}

}  // namespace oracle
