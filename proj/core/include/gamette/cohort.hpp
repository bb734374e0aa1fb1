#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gamette/episode.hpp"
#include "gamette/flowsim.hpp"

namespace gamette {

struct CohortSpec {
  ScenarioConfig scenario = disrupted_scenario();
  // counts[type][condition], indexed by PlayerType then Condition.
  std::array<std::array<int, 2>, 3> counts{{{25, 25}, {25, 25}, {10, 10}}};
  std::uint64_t seed = 1;

  int total() const;
  void validate() const;
};

/// splitmix64 mix of a master seed and a stream index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// One synthetic episode per planted player, ordered by type then condition.
/// Player ids are p001, p002, ...
std::vector<EpisodeRecord> generate_cohort(const CohortSpec& spec, unsigned jobs = 1);

}  // namespace gamette
