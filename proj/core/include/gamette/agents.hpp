#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "gamette/snapshot.hpp"
#include "gamette/types.hpp"

namespace gamette {

/// Splits `total` into integer parts proportional to `weights` using the
/// largest-remainder method. Remainder ties go to the lower index. Weights
/// must be nonnegative; if they sum to zero the split is equal.
std::vector<Units> largest_remainder_split(Units total, std::span<const double> weights);

/// Health-center confidence in each wholesaler, indexed WS1, WS2.
struct TrustState {
  std::array<double, 2> trust{0.5, 0.5};

  double of(AgentId supplier) const;
  double& of(AgentId supplier);
};

enum class SplitMode : std::uint8_t { TrustBased, Equal };

/// Divides a health center's order between WS1 and WS2. The result always
/// sums to `total_order`.
std::array<Units, 2> hc_split_orders(Units total_order, const TrustState& trust,
                                     SplitMode mode);

/// Exponential smoothing of the realized fill rate. Fill rate is
/// received/demanded clamped to [0,1], and 1 when nothing was demanded.
TrustState update_trust(TrustState trust, AgentId supplier, Units demanded,
                        Units received, double smoothing = 0.7);

struct ModeEmission {
  double mean = 0.0;    // deviation from the suggestion, in units
  double stddev = 0.0;  // zero gives a deterministic deviation
};

/// Generative parameters of a synthetic wholesaler. Modes are a hidden Markov
/// chain over deviation levels; the chain starts from `mode_initial` on the
/// first active week.
struct BehavioralPolicy {
  PlayerType player_type = PlayerType::Follower;
  std::vector<double> mode_initial;
  std::vector<std::vector<double>> mode_transition;
  std::vector<ModeEmission> mode_emission;
  int reaction_week = 28;  // Reactor only: first week the chain runs
  int hold_weeks = 0;      // active weeks spent in the initial mode before the chain moves
  std::uint64_t rng_seed = 0;

  std::size_t mode_count() const { return mode_emission.size(); }
  // Throws a validation error on shape or stochasticity violations.
  void validate() const;
};

/// Default cohort fixtures, scaled by the wholesaler base stock level.
/// Hoarders hold their opening mode until three weeks past `reaction_week`;
/// reactors hold theirs for three weeks from `reaction_week`.
BehavioralPolicy default_behavioral_policy(PlayerType type, Units base_stock, std::uint64_t seed,
                                           int reaction_week = 28, int start_week = 21);

/// Runtime state of a behavioral policy: the current mode and the RNG stream.
class BehavioralAgent {
 public:
  explicit BehavioralAgent(BehavioralPolicy policy);

  /// Returns the order for this week and advances the mode chain.
  Units order(Units suggestion, int week, const AgentSnapshot& state);

  const BehavioralPolicy& policy() const { return policy_; }
  std::optional<std::size_t> current_mode() const { return mode_; }

 private:
  std::size_t sample_row(std::span<const double> probabilities);

  BehavioralPolicy policy_;
  std::mt19937_64 rng_;
  std::optional<std::size_t> mode_;
  int active_weeks_ = 0;
};

}  // namespace gamette
