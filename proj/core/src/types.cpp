#include "gamette/types.hpp"

namespace gamette {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view text,
                           const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  return std::nullopt;
}

constexpr std::array<std::pair<std::string_view, AgentId>, 6> kAgentNames = {{
    {"MN1", AgentId::MN1},
    {"MN2", AgentId::MN2},
    {"WS1", AgentId::WS1},
    {"WS2", AgentId::WS2},
    {"HC1", AgentId::HC1},
    {"HC2", AgentId::HC2},
}};

constexpr std::array<std::pair<std::string_view, Condition>, 2> kConditionNames = {{
    {"NoInfo", Condition::NoInfo},
    {"Info", Condition::Info},
}};

constexpr std::array<std::pair<std::string_view, AllocationPolicy>, 4> kAllocationNames = {{
    {"HC1First", AllocationPolicy::HC1First},
    {"HC2First", AllocationPolicy::HC2First},
    {"Proportional", AllocationPolicy::Proportional},
    {"Auto", AllocationPolicy::Auto},
}};

constexpr std::array<std::pair<std::string_view, PlayerType>, 3> kTypeNames = {{
    {"Hoarder", PlayerType::Hoarder},
    {"Reactor", PlayerType::Reactor},
    {"Follower", PlayerType::Follower},
}};

}  // namespace

std::string_view to_string(AgentId id) { return kAgentNames[index_of(id)].first; }
std::optional<AgentId> parse_agent(std::string_view text) {
  return lookup(text, kAgentNames);
}

std::string_view to_string(Condition c) {
  return kConditionNames[static_cast<std::size_t>(c)].first;
}
std::optional<Condition> parse_condition(std::string_view text) {
  return lookup(text, kConditionNames);
}

std::string_view to_string(AllocationPolicy p) {
  return kAllocationNames[static_cast<std::size_t>(p)].first;
}
std::optional<AllocationPolicy> parse_allocation(std::string_view text) {
  return lookup(text, kAllocationNames);
}

std::string_view to_string(PlayerType t) {
  return kTypeNames[static_cast<std::size_t>(t)].first;
}
std::optional<PlayerType> parse_player_type(std::string_view text) {
  return lookup(text, kTypeNames);
}

}  // namespace gamette
