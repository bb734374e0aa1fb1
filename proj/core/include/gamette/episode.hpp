#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gamette/snapshot.hpp"
#include "gamette/types.hpp"

namespace gamette {

/// One player's gameplay telemetry: the focal wholesaler's rows for every
/// gameplay week, in order.
struct EpisodeRecord {
  std::string player_id;
  Condition condition = Condition::NoInfo;
  std::uint64_t seed = 0;
  std::optional<PlayerType> player_type_truth;
  std::vector<WeekRow> weeks;

  Dollars total_profit() const;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

}  // namespace gamette
