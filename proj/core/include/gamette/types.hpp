#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gamette {

using Units = std::int64_t;
using Dollars = std::int64_t;

enum class AgentId : std::uint8_t { MN1, MN2, WS1, WS2, HC1, HC2 };

inline constexpr std::array<AgentId, 6> kAllAgents = {
    AgentId::MN1, AgentId::MN2, AgentId::WS1,
    AgentId::WS2, AgentId::HC1, AgentId::HC2};
inline constexpr std::size_t kAgentCount = kAllAgents.size();

constexpr std::size_t index_of(AgentId id) {
  return static_cast<std::size_t>(id);
}

constexpr bool is_manufacturer(AgentId id) {
  return id == AgentId::MN1 || id == AgentId::MN2;
}
constexpr bool is_wholesaler(AgentId id) {
  return id == AgentId::WS1 || id == AgentId::WS2;
}
constexpr bool is_health_center(AgentId id) {
  return id == AgentId::HC1 || id == AgentId::HC2;
}

std::string_view to_string(AgentId id);
std::optional<AgentId> parse_agent(std::string_view text);

enum class Condition : std::uint8_t { NoInfo, Info };
std::string_view to_string(Condition c);
std::optional<Condition> parse_condition(std::string_view text);

enum class AllocationPolicy : std::uint8_t {
  HC1First,
  HC2First,
  Proportional,
  Auto
};
std::string_view to_string(AllocationPolicy p);
std::optional<AllocationPolicy> parse_allocation(std::string_view text);

enum class PlayerType : std::uint8_t { Hoarder, Reactor, Follower };
inline constexpr std::array<PlayerType, 3> kAllPlayerTypes = {
    PlayerType::Hoarder, PlayerType::Reactor, PlayerType::Follower};
std::string_view to_string(PlayerType t);
std::optional<PlayerType> parse_player_type(std::string_view text);

}  // namespace gamette
