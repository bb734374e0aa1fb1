#include "gamette/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gamette/error.hpp"

namespace gamette {

std::vector<Units> largest_remainder_split(Units total, std::span<const double> weights) {
  const std::size_t n = weights.size();
  std::vector<Units> parts(n, 0);
  if (n == 0) return parts;
  if (total < 0) throw validation_error("largest_remainder_split: negative total");

  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw validation_error("largest_remainder_split: weights must be finite and >= 0");
    weight_sum += w;
  }

  std::vector<double> remainders(n, 0.0);
  Units assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double quota = weight_sum > 0.0 ? static_cast<double>(total) * weights[i] / weight_sum
                                          : static_cast<double>(total) / static_cast<double>(n);
    // Absorb rounding noise so exact quotas such as 40 * 0.25 stay exact.
    const double floored = std::floor(quota + 1e-9);
    parts[i] = static_cast<Units>(floored);
    remainders[i] = quota - floored;
    assigned += parts[i];
  }

  // Floating noise can push the floors over; trim from the smallest remainders.
  while (assigned > total) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (parts[i] > 0 && (pick == n || remainders[i] < remainders[pick])) pick = i;
    }
    --parts[pick];
    remainders[pick] += 1.0;
    --assigned;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b] + 1e-12;
  });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % n) {
    ++parts[order[k]];
    ++assigned;
  }
  return parts;
}

double TrustState::of(AgentId supplier) const {
  return supplier == AgentId::WS1 ? trust[0] : trust[1];
}

double& TrustState::of(AgentId supplier) {
  return supplier == AgentId::WS1 ? trust[0] : trust[1];
}

std::array<Units, 2> hc_split_orders(Units total_order, const TrustState& trust,
                                     SplitMode mode) {
  if (total_order < 0) throw validation_error("hc_split_orders: negative total");
  if (mode == SplitMode::Equal) {
    // Odd totals put the extra unit on WS1.
    const Units half = total_order / 2;
    return {total_order - half, half};
  }
  const std::array<double, 2> weights = trust.trust;
  const auto parts = largest_remainder_split(total_order, weights);
  return {parts[0], parts[1]};
}

TrustState update_trust(TrustState trust, AgentId supplier, Units demanded, Units received,
                        double smoothing) {
  if (!is_wholesaler(supplier)) throw validation_error("update_trust: supplier must be WS1 or WS2");
  if (demanded < 0 || received < 0) throw validation_error("update_trust: negative quantity");
  double fill = 1.0;
  if (demanded > 0) {
    fill = std::clamp(static_cast<double>(received) / static_cast<double>(demanded), 0.0, 1.0);
  }
  double& value = trust.of(supplier);
  value = std::clamp(smoothing * value + (1.0 - smoothing) * fill, 0.0, 1.0);
  return trust;
}

void BehavioralPolicy::validate() const {
  const std::size_t m = mode_emission.size();
  if (m == 0) throw validation_error("behavioral policy: no modes");
  if (mode_initial.size() != m || mode_transition.size() != m)
    throw validation_error("behavioral policy: mode table sizes disagree");

  auto check_row = [](std::span<const double> row, const char* what) {
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw validation_error(std::string("behavioral policy: negative ") + what);
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw validation_error(std::string("behavioral policy: ") + what + " does not sum to 1");
  };
  check_row(mode_initial, "initial distribution");
  for (const auto& row : mode_transition) {
    if (row.size() != m) throw validation_error("behavioral policy: transition row size");
    check_row(row, "transition row");
  }
  if (hold_weeks < 0) throw validation_error("behavioral policy: hold_weeks must be >= 0");
  for (const auto& e : mode_emission) {
    if (!(e.stddev >= 0.0) || !std::isfinite(e.mean))
      throw validation_error("behavioral policy: bad emission");
  }
  if (player_type == PlayerType::Follower) {
    for (const auto& e : mode_emission) {
      if (e.mean != 0.0) throw validation_error("behavioral policy: follower means must be 0");
    }
  }
}

BehavioralPolicy default_behavioral_policy(PlayerType type, Units base_stock, std::uint64_t seed,
                                           int reaction_week, int start_week) {
  const double s = static_cast<double>(base_stock);
  BehavioralPolicy p;
  p.player_type = type;
  p.rng_seed = seed;
  p.reaction_week = reaction_week;
  switch (type) {
    case PlayerType::Follower:
      p.mode_initial = {1.0};
      p.mode_transition = {{1.0}};
      p.mode_emission = {{0.0, 0.0}};
      break;
    case PlayerType::Hoarder:
      // modes: C, P-small, P-large
      p.mode_initial = {0.0, 1.0, 0.0};
      p.mode_transition = {
          {0.40, 0.55, 0.05},
          {0.02, 0.95, 0.03},
          {0.05, 0.55, 0.40},
      };
      p.mode_emission = {{0.0, 0.0}, {0.25 * s, 0.05 * s}, {0.75 * s, 0.05 * s}};
      p.hold_weeks = std::max(0, reaction_week - start_week + 3);
      break;
    case PlayerType::Reactor:
      // modes: C, N, P-mid; the chain starts at reaction_week
      p.mode_initial = {0.0, 0.0, 1.0};
      p.mode_transition = {
          {0.60, 0.20, 0.20},
          {0.20, 0.60, 0.20},
          {0.05, 0.05, 0.90},
      };
      p.mode_emission = {{0.0, 0.0}, {-0.25 * s, 0.05 * s}, {0.5 * s, 0.05 * s}};
      p.hold_weeks = 3;
      break;
  }
  return p;
}

BehavioralAgent::BehavioralAgent(BehavioralPolicy policy)
    : policy_(std::move(policy)), rng_(policy_.rng_seed) {
  policy_.validate();
}

std::size_t BehavioralAgent::sample_row(std::span<const double> probabilities) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng_);
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  // u landed in the rounding slack above the last cumulative sum.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return 0;
}

Units BehavioralAgent::order(Units suggestion, int week, const AgentSnapshot& /*state*/) {
  if (suggestion < 0) throw validation_error("behavioral_order: negative suggestion");
  if (policy_.player_type == PlayerType::Follower) return suggestion;
  if (policy_.player_type == PlayerType::Reactor && week < policy_.reaction_week) return suggestion;

  if (!mode_) {
    mode_ = sample_row(policy_.mode_initial);
  } else if (active_weeks_ >= policy_.hold_weeks) {
    mode_ = sample_row(policy_.mode_transition[*mode_]);
  }
  ++active_weeks_;
  const ModeEmission& e = policy_.mode_emission[*mode_];
  double deviation = e.mean;
  if (e.stddev > 0.0) deviation = std::normal_distribution<double>(e.mean, e.stddev)(rng_);
  const double raw = std::round(static_cast<double>(suggestion) + deviation);
  return raw <= 0.0 ? 0 : static_cast<Units>(raw);
}

}  // namespace gamette
