#include "gamette/seqtype.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "gamette/error.hpp"
#include "gamette/parallel.hpp"

namespace gamette::seqtype {

using numkit::CondensedDistances;
using numkit::Matrix;

std::size_t lcp_similarity(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw validation_error("lcp_similarity: sequences differ in length");
  std::size_t n = 0;
  while (n < a.size() && a[n] == b[n]) ++n;
  return n;
}

namespace {

std::size_t common_length(std::span<const ModeSequence> sequences) {
  if (sequences.empty()) throw validation_error("no mode sequences");
  const std::size_t L = sequences.front().labels.size();
  for (const auto& s : sequences) {
    if (s.labels.size() != L) throw validation_error("mode sequence " + s.player_id + " has a different length");
  }
  return L;
}

}  // namespace

CondensedDistances lcp_distances(std::span<const ModeSequence> sequences, unsigned jobs) {
  const std::size_t L = common_length(sequences);
  const std::size_t n = sequences.size();
  CondensedDistances d(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j)
      d.at(i, j) = static_cast<double>(L - lcp_similarity(sequences[i].labels, sequences[j].labels));
  });
  return d;
}

Matrix mode_frequencies(std::span<const ModeSequence> sequences, std::span<const std::string> alphabet) {
  const std::size_t L = common_length(sequences);
  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t c = 0; c < alphabet.size(); ++c) column.emplace(alphabet[c], c);
  Matrix f(sequences.size(), alphabet.size());
  for (std::size_t p = 0; p < sequences.size(); ++p) {
    for (const auto& label : sequences[p].labels) {
      const auto it = column.find(label);
      if (it == column.end()) throw validation_error("label '" + label + "' is not in the mode alphabet");
      f(p, it->second) += 1.0 / static_cast<double>(L);
    }
  }
  return f;
}

PlayerClustering cluster_players(std::span<const ModeSequence> sequences, std::span<const std::string> alphabet,
                                 std::span<const std::size_t> k_range, std::size_t k) {
  const std::size_t n = sequences.size();
  if (k < 1 || k > n) throw validation_error("cluster_players: k must be in [1, players]");
  const CondensedDistances d = lcp_distances(sequences);
  const Matrix freq = mode_frequencies(sequences, alphabet);

  PlayerClustering out;
  out.k = k;
  out.all_identical = std::all_of(sequences.begin(), sequences.end(),
                                  [&](const ModeSequence& s) { return s.labels == sequences.front().labels; });
  if (out.all_identical) {
    out.labels.assign(n, 0);
    for (std::size_t kk : k_range) {
      if (kk < 1 || kk > n) continue;
      out.quality.ks.push_back(kk);
      out.quality.wss.push_back(0.0);
      out.quality.silhouette.push_back(0.0);
    }
    return out;
  }

  out.tree = numkit::hcluster(d, numkit::Linkage::Average);
  std::vector<std::size_t> ks;
  std::vector<std::vector<int>> labels;
  for (std::size_t kk : k_range) {
    if (kk < 1 || kk > n) continue;
    ks.push_back(kk);
    labels.push_back(out.tree->cut(kk));
  }
  out.quality = numkit::cluster_quality(freq, d, ks, labels);
  out.labels = out.tree->cut(k);
  return out;
}

std::vector<PlayerType> name_clusters(std::span<const ModeSequence> sequences, std::span<const int> labels,
                                      std::size_t k, int first_week, int announcement_week) {
  if (labels.size() != sequences.size()) throw validation_error("name_clusters: label count mismatch");
  std::vector<double> control(k, 0.0), early(k, 0.0), size(k, 0.0);
  for (std::size_t p = 0; p < sequences.size(); ++p) {
    const auto c = static_cast<std::size_t>(labels[p]);
    if (c >= k) throw validation_error("name_clusters: label out of range");
    const auto& seq = sequences[p].labels;
    const std::size_t cut = static_cast<std::size_t>(std::clamp(announcement_week - first_week, 0,
                                                                static_cast<int>(seq.size())));
    double all = 0.0, pre = 0.0;
    for (std::size_t t = 0; t < seq.size(); ++t) {
      if (seq[t] != "C") continue;
      all += 1.0;
      if (t < cut) pre += 1.0;
    }
    control[c] += seq.empty() ? 0.0 : all / static_cast<double>(seq.size());
    early[c] += cut == 0 ? 0.0 : pre / static_cast<double>(cut);
    size[c] += 1.0;
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (size[c] > 0.0) {
      control[c] /= size[c];
      early[c] /= size[c];
    }
  }
  std::vector<PlayerType> names(k, PlayerType::Hoarder);
  const auto follower = static_cast<std::size_t>(std::max_element(control.begin(), control.end()) - control.begin());
  names[follower] = PlayerType::Follower;
  std::optional<std::size_t> reactor;
  for (std::size_t c = 0; c < k; ++c) {
    if (c == follower) continue;
    if (!reactor || early[c] > early[*reactor]) reactor = c;
  }
  if (reactor) names[*reactor] = PlayerType::Reactor;
  return names;
}

double matched_accuracy(std::span<const int> clusters, std::span<const int> truth) {
  if (clusters.size() != truth.size() || clusters.empty())
    throw validation_error("matched_accuracy: size mismatch");
  const int kc = *std::max_element(clusters.begin(), clusters.end()) + 1;
  const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
  if (kc > 8 || kt > 8) throw validation_error("matched_accuracy: too many classes for exhaustive matching");
  Matrix table(static_cast<std::size_t>(kc), static_cast<std::size_t>(kt));
  for (std::size_t i = 0; i < clusters.size(); ++i)
    table(static_cast<std::size_t>(clusters[i]), static_cast<std::size_t>(truth[i])) += 1.0;

  // Exhaustive injective assignment; clusters left unassigned score nothing.
  double best = 0.0;
  std::vector<bool> used(static_cast<std::size_t>(kt), false);
  auto search = [&](auto&& self, int c, double acc) -> void {
    if (c == kc) {
      best = std::max(best, acc);
      return;
    }
    self(self, c + 1, acc);
    for (int t = 0; t < kt; ++t) {
      if (used[static_cast<std::size_t>(t)]) continue;
      used[static_cast<std::size_t>(t)] = true;
      self(self, c + 1, acc + table(static_cast<std::size_t>(c), static_cast<std::size_t>(t)));
      used[static_cast<std::size_t>(t)] = false;
    }
  };
  search(search, 0, 0.0);
  return best / static_cast<double>(clusters.size());
}

const Phase* PhaseSegmentation::phase_at(int week) const {
  for (const auto& p : phases) {
    if (week >= p.start_week && week <= p.end_week) return &p;
  }
  return nullptr;
}

PhaseSegmentation derive_phases(const std::vector<std::vector<int>>& labels, int first_week,
                                int announcement_week) {
  if (labels.empty() || labels.front().empty()) throw validation_error("derive_phases: no state labels");
  const std::size_t T = labels.front().size();
  for (const auto& row : labels) {
    if (row.size() != T) throw validation_error("derive_phases: ragged label matrix");
  }
  PhaseSegmentation out;
  out.first_week = first_week;
  for (std::size_t t = 0; t < T; ++t) {
    std::map<int, int> counts;
    for (const auto& row : labels) ++counts[row[t]];
    int mode = counts.begin()->first;
    int best = counts.begin()->second;
    for (const auto& [label, c] : counts) {
      if (c > best) {
        best = c;
        mode = label;
      }
    }
    out.dominant_per_week.push_back(mode);
  }
  for (std::size_t t = 0; t < T; ++t) {
    const int week = first_week + static_cast<int>(t);
    const bool forced = week == announcement_week && t > 0 && out.dominant_per_week[t - 1] == out.dominant_per_week[t];
    if (t == 0 || out.dominant_per_week[t] != out.dominant_per_week[t - 1] || forced) {
      if (forced) out.announcement_split = true;
      out.phases.push_back({static_cast<int>(out.phases.size()) + 1, week, week, out.dominant_per_week[t]});
    } else {
      out.phases.back().end_week = week;
    }
  }
  return out;
}

namespace {

void attach_test(ContingencyTable& table, numkit::CellResidual cell) {
  double total = 0.0;
  for (double x : table.counts.data()) total += x;
  if (total <= 0.0) {
    table.skipped = "empty table";
    return;
  }
  table.test = numkit::chi_square_independence(table.counts, cell);
}

}  // namespace

InteractionReport interaction_report(std::span<const ModeSequence> sequences, const PhaseSegmentation& phases,
                                     std::span<const PlayerType> types, std::span<const Condition> conditions,
                                     std::span<const std::string> alphabet, numkit::CellResidual cell) {
  const std::size_t L = common_length(sequences);
  if (types.size() != sequences.size() || conditions.size() != sequences.size())
    throw validation_error("interaction_report: every player needs a type and a condition");
  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t c = 0; c < alphabet.size(); ++c) column.emplace(alphabet[c], c);

  InteractionReport out;
  out.alphabet.assign(alphabet.begin(), alphabet.end());
  for (const auto& phase : phases.phases) {
    const int lo = std::max(phase.start_week - phases.first_week, 0);
    const int hi = std::min(phase.end_week - phases.first_week, static_cast<int>(L) - 1);
    if (lo > hi) {
      out.skipped_phases.push_back(phase.id);
      continue;
    }
    PhaseInteraction pi;
    pi.phase = phase;
    pi.by_type.counts = Matrix(kAllPlayerTypes.size(), alphabet.size());
    pi.by_type_condition.counts = Matrix(kAllPlayerTypes.size() * 2, alphabet.size());
    for (const auto t : kAllPlayerTypes) {
      pi.by_type.row_names.emplace_back(to_string(t));
      for (const auto c : {Condition::NoInfo, Condition::Info})
        pi.by_type_condition.row_names.push_back(std::string(to_string(t)) + "/" + std::string(to_string(c)));
    }
    pi.by_type.col_names = out.alphabet;
    pi.by_type_condition.col_names = out.alphabet;

    for (std::size_t p = 0; p < sequences.size(); ++p) {
      std::vector<bool> present(alphabet.size(), false);
      for (int t = lo; t <= hi; ++t) {
        const auto it = column.find(sequences[p].labels[static_cast<std::size_t>(t)]);
        if (it == column.end()) throw validation_error("interaction_report: label outside the alphabet");
        present[it->second] = true;
      }
      const std::size_t tr = static_cast<std::size_t>(types[p]);
      const std::size_t cr = tr * 2 + (conditions[p] == Condition::Info ? 1 : 0);
      for (std::size_t m = 0; m < alphabet.size(); ++m) {
        if (!present[m]) continue;
        pi.by_type.counts(tr, m) += 1.0;
        pi.by_type_condition.counts(cr, m) += 1.0;
      }
    }
    attach_test(pi.by_type, cell);
    attach_test(pi.by_type_condition, cell);
    out.phases.push_back(std::move(pi));
  }
  return out;
}

}  // namespace gamette::seqtype
