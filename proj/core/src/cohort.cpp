#include "gamette/cohort.hpp"

#include <cstdio>

#include "gamette/error.hpp"
#include "gamette/parallel.hpp"

namespace gamette {

int CohortSpec::total() const {
  int n = 0;
  for (const auto& row : counts) n += row[0] + row[1];
  return n;
}

void CohortSpec::validate() const {
  scenario.validate();
  for (const auto& row : counts) {
    if (row[0] < 0 || row[1] < 0) throw validation_error("cohort: counts must be >= 0");
  }
  if (total() < 1) throw validation_error("cohort: no players");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<EpisodeRecord> generate_cohort(const CohortSpec& spec, unsigned jobs) {
  spec.validate();
  struct Slot {
    PlayerType type;
    Condition condition;
  };
  std::vector<Slot> slots;
  for (const auto type : kAllPlayerTypes) {
    for (const auto cond : {Condition::NoInfo, Condition::Info}) {
      const int n = spec.counts[static_cast<std::size_t>(type)][static_cast<std::size_t>(cond)];
      for (int i = 0; i < n; ++i) slots.push_back({type, cond});
    }
  }
  std::vector<EpisodeRecord> out(slots.size());
  parallel_for(slots.size(), jobs, [&](std::size_t i) {
    ScenarioConfig scenario = spec.scenario;
    scenario.condition = slots[i].condition;
    scenario.rng_seed = derive_seed(spec.seed, i);
    BehavioralPolicy policy = default_behavioral_policy(slots[i].type, scenario.base_stock(AgentId::WS1),
                                                        derive_seed(scenario.rng_seed, 1),
                                                        scenario.announcement_week, scenario.start_week);
    char id[16];
    std::snprintf(id, sizeof id, "p%03zu", i + 1);
    out[i] = run_standalone(scenario, default_controllers(BehavioralController{BehavioralAgent(std::move(policy))}),
                            id)
                 .record;
  });
  return out;
}

}  // namespace gamette
