#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gamette/numkit/chisq.hpp"
#include "gamette/numkit/hcluster.hpp"
#include "gamette/numkit/quality.hpp"
#include "gamette/types.hpp"

namespace gamette::seqtype {

struct ModeSequence {
  std::string player_id;
  std::vector<std::string> labels;
};

/// Number of leading positions where the two sequences agree.
std::size_t lcp_similarity(std::span<const std::string> a, std::span<const std::string> b);

/// Pairwise L - LCP distances. Sequences must share one length.
numkit::CondensedDistances lcp_distances(std::span<const ModeSequence> sequences, unsigned jobs = 1);

/// Per-player fraction of weeks spent in each alphabet label.
numkit::Matrix mode_frequencies(std::span<const ModeSequence> sequences,
                                std::span<const std::string> alphabet);

struct PlayerClustering {
  std::optional<numkit::ClusterTree> tree;  // absent when every sequence is identical
  std::vector<int> labels;
  std::size_t k = 0;
  numkit::QualityCurves quality;
  bool all_identical = false;
};

/// Average-linkage clustering on LCP distance. Quality curves are reported for
/// every k in `k_range` that does not exceed the player count.
PlayerClustering cluster_players(std::span<const ModeSequence> sequences,
                                 std::span<const std::string> alphabet,
                                 std::span<const std::size_t> k_range, std::size_t k = 3);

/// Names clusters: the one with the highest control-mode share is Follower,
/// the remaining one with the highest control share before `announcement_week`
/// is Reactor and the rest are Hoarder. `first_week` is the week of label 0.
std::vector<PlayerType> name_clusters(std::span<const ModeSequence> sequences, std::span<const int> labels,
                                      std::size_t k, int first_week, int announcement_week);

/// Fraction of items whose cluster matches the truth under the best
/// one-to-one assignment of clusters to truth classes.
double matched_accuracy(std::span<const int> clusters, std::span<const int> truth);

struct Phase {
  int id = 0;
  int start_week = 0;
  int end_week = 0;
  int dominant_state = 0;
};

struct PhaseSegmentation {
  std::vector<Phase> phases;
  std::vector<int> dominant_per_week;
  int first_week = 0;
  bool announcement_split = false;

  const Phase* phase_at(int week) const;
};

/// labels[player][week - first_week] is a system-state label. Each week takes
/// its modal label (lowest on ties); runs become phases and the run holding
/// `announcement_week` is split there.
PhaseSegmentation derive_phases(const std::vector<std::vector<int>>& labels, int first_week,
                                int announcement_week);

struct ContingencyTable {
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
  numkit::Matrix counts;
  std::optional<numkit::ChiSquareResult> test;
  std::string skipped;  // why the test was not run
};

struct PhaseInteraction {
  Phase phase;
  ContingencyTable by_type;
  ContingencyTable by_type_condition;
};

struct InteractionReport {
  std::vector<std::string> alphabet;
  std::vector<PhaseInteraction> phases;
  std::vector<int> skipped_phases;  // phase ids with no observed weeks
};

/// Presence counts per phase: a player counts once for each mode that occurs
/// in its within-phase subsequence. Rows follow kAllPlayerTypes order, and
/// type x condition rows list NoInfo before Info for each type.
InteractionReport interaction_report(std::span<const ModeSequence> sequences,
                                     const PhaseSegmentation& phases, std::span<const PlayerType> types,
                                     std::span<const Condition> conditions,
                                     std::span<const std::string> alphabet,
                                     numkit::CellResidual cell = numkit::CellResidual::Pearson);

}  // namespace gamette::seqtype
