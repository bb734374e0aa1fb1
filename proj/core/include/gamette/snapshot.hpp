#pragma once

#include "gamette/types.hpp"

namespace gamette {

// Per-agent, per-week state after shipping. The two demand columns hold the
// agent's downstream customers in order: HC1/HC2 for a wholesaler, the paired
// wholesaler (first column only) for a manufacturer, and patient consumption
// (first column only) for a health center.
struct AgentSnapshot {
  int week = 0;
  Units inv = 0;
  Units dem_hc1 = 0;
  Units dem_hc2 = 0;
  Units blg = 0;
  Units shp = 0;  // units received into stock this week (production for MNs)
  Units oor = 0;

  friend bool operator==(const AgentSnapshot&, const AgentSnapshot&) = default;
};

struct LedgerEntry {
  int week = 0;
  Dollars holding_cost = 0;
  Dollars stockout_cost = 0;
  Dollars revenue = 0;
  Dollars profit = 0;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

// One exported telemetry line: snapshot plus the decisions taken that week.
struct WeekRow {
  AgentId agent = AgentId::WS1;
  AgentSnapshot snapshot;
  Units suggestion = 0;
  Units order = 0;
  Units ship_hc1 = 0;
  Units ship_hc2 = 0;
  LedgerEntry ledger;

  friend bool operator==(const WeekRow&, const WeekRow&) = default;
};

}  // namespace gamette
