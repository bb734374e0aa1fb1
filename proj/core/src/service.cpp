#include "gamette/service.hpp"

#include <cstdio>

#include "gamette/cohort.hpp"
#include "gamette/error.hpp"
#include "gamette/telemetry.hpp"

namespace gamette::service {

std::string_view to_string(Awaiting a) {
  switch (a) {
    case Awaiting::Allocation: return "Allocation";
    case Awaiting::Order: return "Order";
    case Awaiting::Done: return "Done";
  }
  return "?";
}

Session::Session(std::string id, ScenarioConfig scenario) : id_(std::move(id)), world_(std::move(scenario)) {
  const auto& config = world_.config();
  record_.player_id = id_;
  record_.condition = config.condition;
  record_.seed = config.rng_seed;
  // Tutorial weeks run on the scripted policy and stay out of telemetry.
  while (world_.week() < config.start_week) world_.advance_week();
  open_week();
}

int Session::week() const {
  return awaiting_ == Awaiting::Done ? world_.config().last_week() : world_.week();
}

void Session::open_week() {
  world_.begin_week();
  if (world_.needs_allocation(AgentId::WS1)) {
    awaiting_ = Awaiting::Allocation;
    return;
  }
  world_.ship({{AgentId::WS1, decisions_.default_allocation}});
  awaiting_ = Awaiting::Order;
}

PlayerView Session::view() const {
  const auto& config = world_.config();
  PlayerView v;
  v.session_id = id_;
  v.awaiting = awaiting_;
  v.week = week();
  v.condition = config.condition;
  for (const auto& row : record_.weeks) v.profit_to_date += row.ledger.profit;
  if (!record_.weeks.empty()) v.ledger = record_.weeks.back().ledger;

  if (awaiting_ == Awaiting::Done) {
    const auto& s = record_.weeks.back().snapshot;
    v.inv = s.inv;
    v.dem_hc1 = s.dem_hc1;
    v.dem_hc2 = s.dem_hc2;
    v.blg = s.blg;
    v.arrived_shipment = s.shp;
    v.oor = s.oor;
    GameTotals totals;
    for (const auto& row : record_.weeks) {
      totals.profit += row.ledger.profit;
      totals.holding_cost += row.ledger.holding_cost;
      totals.stockout_cost += row.ledger.stockout_cost;
      totals.revenue += row.ledger.revenue;
    }
    v.totals = totals;
    return v;
  }

  const AgentSnapshot s = world_.snapshot(AgentId::WS1);
  v.inv = s.inv;
  v.dem_hc1 = s.dem_hc1;
  v.dem_hc2 = s.dem_hc2;
  v.blg = s.blg;
  v.arrived_shipment = s.shp;
  v.oor = s.oor;
  if (awaiting_ == Awaiting::Order) v.suggestion = world_.suggestion(AgentId::WS1);
  if (config.condition == Condition::Info) v.manufacturer_inventory = world_.manufacturer_inventory_at_review(AgentId::MN1);
  v.news = v.week == config.announcement_week;
  return v;
}

PlayerView Session::submit_allocation(AllocationPolicy policy) {
  if (awaiting_ != Awaiting::Allocation)
    throw state_conflict("session is awaiting " + std::string(to_string(awaiting_)) + ", not Allocation");
  world_.ship({{AgentId::WS1, policy}});
  decisions_.allocations[world_.week()] = policy;
  awaiting_ = Awaiting::Order;
  return view();
}

PlayerView Session::submit_order(Units quantity) {
  if (awaiting_ != Awaiting::Order)
    throw state_conflict("session is awaiting " + std::string(to_string(awaiting_)) + ", not Order");
  if (quantity < 0) throw validation_error("order quantity must be >= 0");
  const int week = world_.week();
  decisions_.orders[week] = quantity;
  const WeekResult result = world_.finish_week({{AgentId::WS1, quantity}});
  record_.weeks.push_back(result.row(AgentId::WS1));
  if (week >= world_.config().last_week()) {
    awaiting_ = Awaiting::Done;
  } else {
    open_week();
  }
  return view();
}

SessionManager::SessionManager(ManagerOptions options) : options_(std::move(options)) {
  options_.scenario.validate();
  if (options_.idle_timeout.count() <= 0) throw validation_error("idle timeout must be positive");
}

PlayerView SessionManager::create(std::optional<Condition> condition) {
  expire();
  std::uint64_t n = 0;
  {
    std::lock_guard lock(mutex_);
    n = created_++;
  }
  const std::uint64_t seed = derive_seed(options_.seed, n);
  ScenarioConfig scenario = options_.scenario;
  scenario.rng_seed = seed;
  scenario.condition = condition.value_or((derive_seed(seed, 1) & 1U) ? Condition::Info : Condition::NoInfo);
  char id[24];
  std::snprintf(id, sizeof id, "s%016llx", static_cast<unsigned long long>(derive_seed(seed, 2)));

  auto slot = std::make_shared<Slot>();
  slot->session = std::make_unique<Session>(id, std::move(scenario));
  slot->last_used = options_.clock();
  PlayerView v = slot->session->view();
  std::lock_guard lock(mutex_);
  sessions_.emplace(id, std::move(slot));
  return v;
}

std::shared_ptr<SessionManager::Slot> SessionManager::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw not_found("no session '" + id + "'");
  return it->second;
}

template <typename Fn>
auto SessionManager::with_session(const std::string& id, Fn&& fn) {
  expire();
  auto slot = find(id);
  std::lock_guard lock(slot->mutex);
  slot->last_used = options_.clock();
  return fn(*slot->session);
}

PlayerView SessionManager::view(const std::string& id) {
  return with_session(id, [](Session& s) { return s.view(); });
}

PlayerView SessionManager::submit_allocation(const std::string& id, AllocationPolicy policy) {
  return with_session(id, [&](Session& s) { return s.submit_allocation(policy); });
}

PlayerView SessionManager::submit_order(const std::string& id, Units quantity) {
  return with_session(id, [&](Session& s) { return s.submit_order(quantity); });
}

SessionManager::Telemetry SessionManager::telemetry(const std::string& id) {
  return with_session(id, [](Session& s) {
    return Telemetry{telemetry::format_episode(s.telemetry()), s.awaiting(), s.week()};
  });
}

std::size_t SessionManager::size() {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::size_t SessionManager::expire() {
  const auto now = options_.clock();
  std::lock_guard lock(mutex_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock slot_lock(it->second->mutex, std::try_to_lock);
    // A session in use is not idle.
    if (slot_lock.owns_lock() && now - it->second->last_used > options_.idle_timeout) {
      slot_lock.unlock();
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

}  // namespace gamette::service
