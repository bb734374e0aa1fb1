#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "gamette/episode.hpp"
#include "gamette/flowsim.hpp"

namespace gamette::service {

enum class Awaiting : std::uint8_t { Allocation, Order, Done };
std::string_view to_string(Awaiting a);

inline constexpr std::string_view kShutdownNews = "mn1-shutdown";

struct GameTotals {
  Dollars profit = 0;
  Dollars holding_cost = 0;
  Dollars stockout_cost = 0;
  Dollars revenue = 0;
};

/// What the human wholesaler sees. During Allocation the quantities are the
/// post-receipt state; during Order they are post-shipping and the
/// suggestion is filled in.
struct PlayerView {
  std::string session_id;
  Awaiting awaiting = Awaiting::Order;
  int week = 0;
  Condition condition = Condition::NoInfo;
  Units inv = 0;
  Units dem_hc1 = 0;
  Units dem_hc2 = 0;
  Units blg = 0;
  Units arrived_shipment = 0;
  Units oor = 0;
  std::optional<Units> suggestion;
  std::optional<Units> manufacturer_inventory;  // Info only
  bool news = false;                            // set at the announcement week
  LedgerEntry ledger;                           // last completed gameplay week
  Dollars profit_to_date = 0;
  std::optional<GameTotals> totals;  // once Done
};

/// One human-played episode. Not thread-safe; SessionManager serializes
/// access per session.
class Session {
 public:
  Session(std::string id, ScenarioConfig scenario);

  const std::string& id() const { return id_; }
  const ScenarioConfig& scenario() const { return world_.config(); }
  Awaiting awaiting() const { return awaiting_; }
  int week() const;

  PlayerView view() const;
  PlayerView submit_allocation(AllocationPolicy policy);
  PlayerView submit_order(Units quantity);

  const EpisodeRecord& telemetry() const { return record_; }
  /// Decisions taken so far, replayable through run_standalone.
  const ScriptedController& decisions() const { return decisions_; }

 private:
  void open_week();

  std::string id_;
  World world_;
  Awaiting awaiting_ = Awaiting::Order;
  EpisodeRecord record_;
  ScriptedController decisions_;
};

struct ManagerOptions {
  ScenarioConfig scenario = disrupted_scenario();
  std::uint64_t seed = 1;
  std::chrono::seconds idle_timeout{2 * 60 * 60};
  std::function<std::chrono::steady_clock::time_point()> clock = [] { return std::chrono::steady_clock::now(); };
};

/// Owns the live sessions. Distinct sessions run concurrently; calls on the
/// same session are serialized. Session ids and unassigned conditions are
/// derived from the manager seed and the creation counter.
class SessionManager {
 public:
  explicit SessionManager(ManagerOptions options = {});

  PlayerView create(std::optional<Condition> condition = std::nullopt);
  PlayerView view(const std::string& id);
  PlayerView submit_allocation(const std::string& id, AllocationPolicy policy);
  PlayerView submit_order(const std::string& id, Units quantity);
  /// Telemetry file text plus the session's current awaiting state and week.
  struct Telemetry {
    std::string text;
    Awaiting awaiting = Awaiting::Order;
    int week = 0;
  };
  Telemetry telemetry(const std::string& id);

  std::size_t size();
  /// Drops sessions idle for longer than the timeout; returns how many.
  std::size_t expire();

 private:
  struct Slot {
    std::mutex mutex;
    std::unique_ptr<Session> session;
    std::chrono::steady_clock::time_point last_used;
  };
  std::shared_ptr<Slot> find(const std::string& id);

  template <typename Fn>
  auto with_session(const std::string& id, Fn&& fn);

  ManagerOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t created_ = 0;
};

}  // namespace gamette::service
