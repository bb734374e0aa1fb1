#include "gamette/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gamette/config.hpp"
#include "gamette/error.hpp"
#include "gamette/hmm.hpp"
#include "gamette/numkit/hcluster.hpp"
#include "gamette/numkit/pca.hpp"
#include "gamette/numkit/quality.hpp"
#include "gamette/seqtype.hpp"
#include "gamette/telemetry.hpp"
#include "gamette/textio.hpp"

namespace gamette::pipeline {

namespace fs = std::filesystem;
using numkit::Matrix;

namespace {

constexpr std::array<std::string_view, 9> kStageNames = {"filter", "states", "phases",      "deviations", "hmm",
                                                         "decode", "types",  "interaction", "summary"};

}  // namespace

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> parse_stage(std::string_view text) {
  for (const auto s : kAllStages) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::vector<std::string> stage_artifacts(Stage s) {
  switch (s) {
    case Stage::Filter: return {"manifest.yaml", "filter.csv"};
    case Stage::States:
      return {"pca_scree.csv",        "pca_loadings.csv", "pca_scores.csv",    "state_dendrogram.csv",
              "state_quality.csv",    "state_labels.csv", "state_clusters.csv"};
    case Stage::Phases: return {"phases.csv"};
    case Stage::Deviations: return {"deviations.csv", "deviation_stats.csv"};
    case Stage::Hmm: return {"bic.csv", "hmm_model.txt", "hmm_trace.csv"};
    case Stage::Decode: return {"mode_sequences.csv"};
    case Stage::Types: return {"types.csv", "type_quality.csv", "type_dendrogram.csv"};
    case Stage::Interaction: return {"interaction.csv", "interaction_tests.csv"};
    case Stage::Summary: return {"summary.txt"};
  }
  return {};
}

void Manifest::validate() const {
  if (inputs.empty()) throw validation_error("manifest: no inputs");
  for (const auto& p : inputs) {
    if (!fs::exists(p)) throw validation_error("manifest: input does not exist: " + p.string());
  }
  if (!(outlier_width > 0.0)) throw validation_error("manifest: outlier_width must be > 0");
  auto check_range = [](const std::vector<std::size_t>& ks, const char* what) {
    if (ks.empty()) throw validation_error(std::string("manifest: empty ") + what);
    for (auto k : ks) {
      if (k < 1 || k > 64) throw validation_error(std::string("manifest: ") + what + " entries must be in 1..64");
    }
  };
  check_range(state_k_range, "state_k_range");
  check_range(hmm_k_range, "hmm_k_range");
  check_range(type_k_range, "type_k_range");
  if (state_k < 1) throw validation_error("manifest: state_k must be >= 1");
  if (type_k < 1) throw validation_error("manifest: type_k must be >= 1");
  if (hmm_restarts < 1) throw validation_error("manifest: hmm_restarts must be >= 1");
  if (!(hmm_tolerance > 0.0)) throw validation_error("manifest: hmm_tolerance must be > 0");
  if (hmm_max_iterations < 1) throw validation_error("manifest: hmm_max_iterations must be >= 1");
  if (jobs < 1) throw validation_error("manifest: jobs must be >= 1");
  if (output.empty()) throw validation_error("manifest: no output directory");
}

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw validation_error("input is neither a file nor a directory: " + p.string());
    }
  }
  if (out.empty()) throw validation_error("no episode files found in the inputs");
  return out;
}

namespace {

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string opt_double(const std::optional<double>& x) { return x ? format_double(*x) : "NA"; }

std::optional<double> parse_opt(const std::string& s) {
  if (s == "NA") return std::nullopt;
  return parse_double(s);
}

class Artifact {
 public:
  Artifact(const fs::path& dir, const std::string& name, std::uint64_t seed)
      : path_(dir / name), out_(path_, std::ios::binary) {
    if (!out_) throw io_error("cannot write " + path_.string());
    out_ << "# seed=" << seed << '\n';
  }
  ~Artifact() = default;

  std::ostream& operator*() { return out_; }

  void close() {
    out_.close();
    if (!out_) throw io_error("write failed: " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

CsvTable load_table(const fs::path& dir, const std::string& name, std::initializer_list<std::string_view> header) {
  const fs::path path = dir / name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read " + path.string());
  CsvTable t = read_csv(in);
  if (!std::equal(t.header.begin(), t.header.end(), header.begin(), header.end()))
    throw validation_error(path.string() + ": unexpected header");
  return t;
}

int to_int(const std::string& s, std::string_view what) { return static_cast<int>(parse_integer(s, what)); }

std::string truth_name(const EpisodeRecord& e) {
  return e.player_type_truth ? std::string(to_string(*e.player_type_truth)) : "none";
}

struct InteractionCell {
  int phase = 0;
  std::string table;
  std::string row;
  std::string mode;
  double observed = 0.0;
  std::optional<double> expected, residual, p_value;
};

struct InteractionTest {
  int phase = 0;
  int start_week = 0;
  int end_week = 0;
  std::string table;
  std::optional<double> statistic, p_value;
  int df = 0;
  std::string status;
};

// Everything the stages hand to each other.
struct Run {
  Run(const Manifest& manifest, fs::path bundle) : m(manifest), dir(std::move(bundle)) {}

  const Manifest& m;
  fs::path dir;

  std::vector<EpisodeRecord> inputs;
  std::vector<double> z_profit;
  std::vector<bool> kept_flag;
  std::vector<EpisodeRecord> kept;

  std::vector<std::string> players;
  std::vector<int> weeks;
  std::array<double, 2> explained{};
  std::vector<double> pc1;
  std::vector<std::string> state_names;
  std::vector<std::vector<int>> state_labels;  // [player][week]

  seqtype::PhaseSegmentation phases;

  telemetry::DeviationSequences dev;
  double zero = 0.0;

  hmm::StoredModel model;

  std::vector<seqtype::ModeSequence> modes;

  std::vector<int> type_cluster;
  std::vector<PlayerType> types;

  std::vector<InteractionCell> cells;
  std::vector<InteractionTest> tests;

  Artifact open(const std::string& name) const { return Artifact(dir, name, m.seed); }
};

// ---- filter

void read_inputs(Run& r) {
  std::set<std::string> ids;
  for (const auto& path : expand_inputs(r.m.inputs)) {
    r.inputs.push_back(telemetry::load_episode(path));
    if (!ids.insert(r.inputs.back().player_id).second)
      throw validation_error("duplicate player_id " + r.inputs.back().player_id + " in " + path.string());
  }
}

void finish_filter(Run& r) {
  r.kept.clear();
  for (std::size_t i = 0; i < r.inputs.size(); ++i) {
    if (r.kept_flag[i]) r.kept.push_back(r.inputs[i]);
  }
  if (r.kept.size() < 2) throw validation_error("fewer than 2 episodes remain after outlier filtering");
}

void run_filter(Run& r) {
  {
    Artifact a = r.open("manifest.yaml");
    *a << config::format_manifest(r.m);
    a.close();
  }
  read_inputs(r);
  const auto split = telemetry::filter_outliers(r.inputs, r.m.outlier_width);
  std::set<std::string> kept_ids;
  for (const auto& e : split.kept) kept_ids.insert(e.player_id);
  Artifact a = r.open("filter.csv");
  *a << "player_id,condition,truth,total_profit,z,kept\n";
  for (const auto& e : r.inputs) {
    const double profit = static_cast<double>(e.total_profit());
    const double z = split.stddev_profit > 0.0 ? (profit - split.mean_profit) / split.stddev_profit : 0.0;
    const bool kept = kept_ids.count(e.player_id) > 0;
    r.z_profit.push_back(z);
    r.kept_flag.push_back(kept);
    *a << e.player_id << ',' << to_string(e.condition) << ',' << truth_name(e) << ',' << e.total_profit() << ','
       << format_double(z) << ',' << (kept ? 1 : 0) << '\n';
  }
  a.close();
  finish_filter(r);
}

void load_filter(Run& r) {
  read_inputs(r);
  const auto t = load_table(r.dir, "filter.csv", {"player_id", "condition", "truth", "total_profit", "z", "kept"});
  if (t.rows.size() != r.inputs.size()) throw validation_error("filter.csv does not match the inputs");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i][0] != r.inputs[i].player_id) throw validation_error("filter.csv does not match the inputs");
    r.z_profit.push_back(parse_double(t.rows[i][4]));
    r.kept_flag.push_back(t.rows[i][5] == "1");
  }
  finish_filter(r);
}

// ---- states

void run_states(Run& r) {
  const auto sm = telemetry::build_state_matrix(r.kept);
  const auto pc = numkit::pca(sm.values);
  r.players = sm.player_ids;
  r.weeks = sm.weeks;
  const std::size_t P = r.players.size();
  const std::size_t T = r.weeks.size();
  const std::size_t dims = std::min<std::size_t>(2, pc.components.rows());

  Matrix scores(sm.values.rows(), dims);
  for (std::size_t i = 0; i < scores.rows(); ++i)
    for (std::size_t c = 0; c < dims; ++c) scores(i, c) = pc.scores(i, c);
  const auto tree = numkit::hcluster_points(scores, numkit::Linkage::Ward);
  if (r.m.state_k > scores.rows()) throw validation_error("state_k exceeds the number of player-weeks");
  const auto labels = tree.cut(r.m.state_k);

  std::vector<std::size_t> ks;
  std::vector<std::vector<int>> cuts;
  for (auto k : r.m.state_k_range) {
    if (k > scores.rows()) continue;
    ks.push_back(k);
    cuts.push_back(tree.cut(k));
  }
  const auto quality = numkit::cluster_quality(scores, numkit::euclidean_distances(scores), ks, cuts);

  // Raw per-cluster means name the clusters.
  const std::size_t k = r.m.state_k;
  const std::size_t V = telemetry::kStateColumns.size();
  Matrix means(k, V);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t t = 0; t < T; ++t) {
      const auto c = static_cast<std::size_t>(labels[sm.row(p, t)]);
      const auto& s = r.kept[p].weeks[t].snapshot;
      const double raw[] = {double(s.inv), double(s.dem_hc1), double(s.dem_hc2),
                            double(s.blg), double(s.shp),     double(s.oor)};
      for (std::size_t v = 0; v < V; ++v) means(c, v) += raw[v];
      ++counts[c];
    }
  }
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t v = 0; v < V; ++v) means(c, v) /= static_cast<double>(std::max<std::size_t>(counts[c], 1));

  r.state_names.assign(k, "");
  std::vector<std::size_t> rest(k);
  for (std::size_t c = 0; c < k; ++c) rest[c] = c;
  auto take_max = [&](std::size_t column, const char* name) {
    if (rest.empty()) return;
    auto best = rest.begin();
    for (auto it = rest.begin(); it != rest.end(); ++it) {
      if (means(*it, column) > means(*best, column)) best = it;
    }
    r.state_names[*best] = name;
    rest.erase(best);
  };
  take_max(3, "disruption");
  take_max(4, "recovery");
  for (std::size_t i = 0; i < rest.size(); ++i)
    r.state_names[rest[i]] = rest.size() == 1 ? "stable" : "stable" + std::to_string(i + 1);

  r.explained = {pc.explained_fraction.size() > 0 ? pc.explained_fraction[0] : 0.0,
                 pc.explained_fraction.size() > 1 ? pc.explained_fraction[1] : 0.0};
  r.pc1 = pc.components.row(0).size() ? std::vector<double>(pc.components.row(0).begin(), pc.components.row(0).end())
                                      : std::vector<double>{};
  r.state_labels.assign(P, std::vector<int>(T));
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t t = 0; t < T; ++t) r.state_labels[p][t] = labels[sm.row(p, t)];

  {
    Artifact a = r.open("pca_scree.csv");
    *a << "component,eigenvalue,explained,cumulative\n";
    double cum = 0.0;
    for (std::size_t i = 0; i < pc.eigenvalues.size(); ++i) {
      cum += pc.explained_fraction[i];
      *a << i + 1 << ',' << format_double(pc.eigenvalues[i]) << ',' << format_double(pc.explained_fraction[i]) << ','
         << format_double(cum) << '\n';
    }
    a.close();
  }
  {
    Artifact a = r.open("pca_loadings.csv");
    *a << "component";
    for (auto name : telemetry::kStateColumns) *a << ',' << name;
    *a << '\n';
    for (std::size_t i = 0; i < pc.components.rows(); ++i) {
      *a << i + 1;
      for (double x : pc.components.row(i)) *a << ',' << format_double(x);
      *a << '\n';
    }
    a.close();
  }
  {
    Artifact a = r.open("pca_scores.csv");
    *a << "player_id,week,pc1,pc2\n";
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t t = 0; t < T; ++t) {
        const auto row = sm.row(p, t);
        *a << r.players[p] << ',' << r.weeks[t] << ',' << format_double(scores(row, 0)) << ','
           << format_double(dims > 1 ? scores(row, 1) : 0.0) << '\n';
      }
    a.close();
  }
  {
    Artifact a = r.open("state_dendrogram.csv");
    *a << "step,left,right,height,size\n";
    for (std::size_t s = 0; s < tree.merges().size(); ++s) {
      const auto& mg = tree.merges()[s];
      *a << s + 1 << ',' << mg.left << ',' << mg.right << ',' << format_double(mg.height) << ',' << mg.size << '\n';
    }
    a.close();
  }
  {
    Artifact a = r.open("state_quality.csv");
    *a << "k,wss,silhouette\n";
    for (std::size_t i = 0; i < quality.ks.size(); ++i)
      *a << quality.ks[i] << ',' << format_double(quality.wss[i]) << ',' << format_double(quality.silhouette[i])
         << '\n';
    a.close();
  }
  {
    Artifact a = r.open("state_labels.csv");
    *a << "player_id,week,state,name\n";
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t t = 0; t < T; ++t) {
        const int s = r.state_labels[p][t];
        *a << r.players[p] << ',' << r.weeks[t] << ',' << s << ',' << r.state_names[static_cast<std::size_t>(s)]
           << '\n';
      }
    a.close();
  }
  {
    Artifact a = r.open("state_clusters.csv");
    *a << "state,name,count";
    for (auto name : telemetry::kStateColumns) *a << ',' << name;
    *a << '\n';
    for (std::size_t c = 0; c < k; ++c) {
      *a << c << ',' << r.state_names[c] << ',' << counts[c];
      for (std::size_t v = 0; v < V; ++v) *a << ',' << format_double(means(c, v));
      *a << '\n';
    }
    a.close();
  }
}

void load_states(Run& r) {
  const auto scree = load_table(r.dir, "pca_scree.csv", {"component", "eigenvalue", "explained", "cumulative"});
  for (std::size_t i = 0; i < std::min<std::size_t>(2, scree.rows.size()); ++i)
    r.explained[i] = parse_double(scree.rows[i][2]);
  const auto loadings = load_table(r.dir, "pca_loadings.csv",
                                   {"component", "inv", "dem_hc1", "dem_hc2", "blg", "shp", "oor"});
  if (!loadings.rows.empty())
    for (std::size_t v = 1; v < loadings.rows[0].size(); ++v) r.pc1.push_back(parse_double(loadings.rows[0][v]));
  const auto clusters = load_table(r.dir, "state_clusters.csv",
                                   {"state", "name", "count", "inv", "dem_hc1", "dem_hc2", "blg", "shp", "oor"});
  for (const auto& row : clusters.rows) r.state_names.push_back(row[1]);

  const auto labels = load_table(r.dir, "state_labels.csv", {"player_id", "week", "state", "name"});
  std::map<std::string, std::size_t> index;
  for (const auto& row : labels.rows) {
    auto [it, fresh] = index.emplace(row[0], r.players.size());
    if (fresh) {
      r.players.push_back(row[0]);
      r.state_labels.emplace_back();
    }
    if (it->second == 0) r.weeks.push_back(to_int(row[1], "week"));
    const int s = to_int(row[2], "state");
    if (s < 0 || static_cast<std::size_t>(s) >= r.state_names.size())
      throw validation_error("state_labels.csv: state out of range");
    r.state_labels[it->second].push_back(s);
  }
  if (r.players.size() != r.kept.size()) throw validation_error("state_labels.csv does not match the kept episodes");
  for (std::size_t p = 0; p < r.players.size(); ++p) {
    if (r.players[p] != r.kept[p].player_id || r.state_labels[p].size() != r.weeks.size())
      throw validation_error("state_labels.csv does not match the kept episodes");
  }
}

// ---- phases

void run_phases(Run& r) {
  r.phases = seqtype::derive_phases(r.state_labels, r.weeks.front(), r.m.announcement_week);
  Artifact a = r.open("phases.csv");
  *a << "phase,start_week,end_week,state,name\n";
  for (const auto& ph : r.phases.phases)
    *a << ph.id << ',' << ph.start_week << ',' << ph.end_week << ',' << ph.dominant_state << ','
       << r.state_names[static_cast<std::size_t>(ph.dominant_state)] << '\n';
  a.close();
}

void load_phases(Run& r) {
  const auto t = load_table(r.dir, "phases.csv", {"phase", "start_week", "end_week", "state", "name"});
  r.phases.first_week = r.weeks.front();
  for (const auto& row : t.rows) {
    seqtype::Phase ph{to_int(row[0], "phase"), to_int(row[1], "start_week"), to_int(row[2], "end_week"),
                      to_int(row[3], "state")};
    if (!r.phases.phases.empty() && r.phases.phases.back().dominant_state == ph.dominant_state &&
        ph.start_week == r.m.announcement_week)
      r.phases.announcement_split = true;
    for (int w = ph.start_week; w <= ph.end_week; ++w) r.phases.dominant_per_week.push_back(ph.dominant_state);
    r.phases.phases.push_back(ph);
  }
}

// ---- deviations

void run_deviations(Run& r) {
  r.dev = telemetry::build_deviation_sequences(r.kept);
  r.zero = -r.dev.pooled_mean / r.dev.pooled_stddev;
  {
    Artifact a = r.open("deviations.csv");
    *a << "player_id,week,raw,normalized\n";
    for (std::size_t p = 0; p < r.dev.player_ids.size(); ++p)
      for (std::size_t t = 0; t < r.dev.raw[p].size(); ++t)
        *a << r.dev.player_ids[p] << ',' << r.weeks[t] << ',' << format_double(r.dev.raw[p][t]) << ','
           << format_double(r.dev.normalized[p][t]) << '\n';
    a.close();
  }
  Artifact a = r.open("deviation_stats.csv");
  *a << "pooled_mean,pooled_stddev,zero\n";
  *a << format_double(r.dev.pooled_mean) << ',' << format_double(r.dev.pooled_stddev) << ',' << format_double(r.zero)
     << '\n';
  a.close();
}

void load_deviations(Run& r) {
  const auto stats = load_table(r.dir, "deviation_stats.csv", {"pooled_mean", "pooled_stddev", "zero"});
  if (stats.rows.size() != 1) throw validation_error("deviation_stats.csv: expected one row");
  r.dev.pooled_mean = parse_double(stats.rows[0][0]);
  r.dev.pooled_stddev = parse_double(stats.rows[0][1]);
  r.zero = parse_double(stats.rows[0][2]);
  const auto t = load_table(r.dir, "deviations.csv", {"player_id", "week", "raw", "normalized"});
  for (const auto& row : t.rows) {
    if (r.dev.player_ids.empty() || r.dev.player_ids.back() != row[0]) {
      r.dev.player_ids.push_back(row[0]);
      r.dev.raw.emplace_back();
      r.dev.normalized.emplace_back();
    }
    r.dev.raw.back().push_back(parse_double(row[2]));
    r.dev.normalized.back().push_back(parse_double(row[3]));
  }
  if (r.dev.player_ids != r.players) throw validation_error("deviations.csv does not match the kept episodes");
}

// ---- hmm

std::string clean(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

void run_hmm(Run& r) {
  const auto sweep = hmm::bic_sweep(r.dev.normalized, r.m.hmm_k_range, r.m.hmm_restarts, r.m.seed, r.m.jobs,
                                    r.m.hmm_tolerance, r.m.hmm_max_iterations);
  {
    Artifact a = r.open("bic.csv");
    *a << "k,log_likelihood,free_parameters,data_size,bic,iterations,converged,degenerate,selected,error\n";
    for (std::size_t i = 0; i < sweep.entries.size(); ++i) {
      const auto& e = sweep.entries[i];
      const auto& fit = sweep.fits[i];
      *a << e.n_states << ',' << (e.failed ? "NA" : format_double(e.log_likelihood)) << ',' << e.free_parameters
         << ',' << e.data_size << ',' << (e.failed ? "NA" : format_double(e.bic)) << ','
         << (fit ? std::to_string(fit->iterations) : "NA") << ',' << (fit && fit->converged ? 1 : 0) << ','
         << (fit && fit->degenerate ? 1 : 0) << ',' << (i == sweep.selected ? 1 : 0) << ',' << clean(e.error)
         << '\n';
    }
    a.close();
  }
  const auto& best = *sweep.fits[sweep.selected];
  {
    Artifact a = r.open("hmm_model.txt");
    hmm::write_model(*a, best.model, r.zero);
    a.close();
  }
  {
    Artifact a = r.open("hmm_trace.csv");
    *a << "iteration,log_likelihood\n";
    for (std::size_t i = 0; i < best.trace.size(); ++i) *a << i << ',' << format_double(best.trace[i]) << '\n';
    a.close();
  }
  r.model = {best.model, r.zero, hmm::label_states(best.model, r.zero)};
}

void load_hmm(Run& r) {
  const fs::path path = r.dir / "hmm_model.txt";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read " + path.string());
  r.model = hmm::read_model(in);
}

// ---- decode

void run_decode(Run& r) {
  Artifact a = r.open("mode_sequences.csv");
  *a << "player_id,week,state,mode\n";
  for (std::size_t p = 0; p < r.dev.player_ids.size(); ++p) {
    const auto path = hmm::viterbi(r.model.model, r.dev.normalized[p]);
    seqtype::ModeSequence seq{r.dev.player_ids[p], {}};
    for (std::size_t t = 0; t < path.size(); ++t) {
      seq.labels.push_back(r.model.labeling.labels[path[t]]);
      *a << seq.player_id << ',' << r.weeks[t] << ',' << path[t] << ',' << seq.labels.back() << '\n';
    }
    r.modes.push_back(std::move(seq));
  }
  a.close();
}

void load_decode(Run& r) {
  const auto t = load_table(r.dir, "mode_sequences.csv", {"player_id", "week", "state", "mode"});
  for (const auto& row : t.rows) {
    if (r.modes.empty() || r.modes.back().player_id != row[0]) r.modes.push_back({row[0], {}});
    r.modes.back().labels.push_back(row[3]);
  }
  if (r.modes.size() != r.players.size()) throw validation_error("mode_sequences.csv does not match the players");
}

// ---- types

void run_types(Run& r) {
  const auto clustering =
      seqtype::cluster_players(r.modes, r.model.labeling.alphabet, r.m.type_k_range, r.m.type_k);
  const auto names =
      seqtype::name_clusters(r.modes, clustering.labels, r.m.type_k, r.weeks.front(), r.m.announcement_week);
  r.type_cluster = clustering.labels;
  {
    Artifact a = r.open("types.csv");
    *a << "player_id,condition,truth,cluster,type\n";
    for (std::size_t p = 0; p < r.modes.size(); ++p) {
      r.types.push_back(names[static_cast<std::size_t>(clustering.labels[p])]);
      *a << r.modes[p].player_id << ',' << to_string(r.kept[p].condition) << ',' << truth_name(r.kept[p]) << ','
         << clustering.labels[p] << ',' << to_string(r.types.back()) << '\n';
    }
    a.close();
  }
  {
    Artifact a = r.open("type_quality.csv");
    *a << "k,wss,silhouette\n";
    const auto& q = clustering.quality;
    for (std::size_t i = 0; i < q.ks.size(); ++i)
      *a << q.ks[i] << ',' << format_double(q.wss[i]) << ',' << format_double(q.silhouette[i]) << '\n';
    a.close();
  }
  Artifact a = r.open("type_dendrogram.csv");
  *a << "step,left,right,height,size\n";
  if (clustering.tree) {
    const auto& merges = clustering.tree->merges();
    for (std::size_t s = 0; s < merges.size(); ++s)
      *a << s + 1 << ',' << merges[s].left << ',' << merges[s].right << ',' << format_double(merges[s].height) << ','
         << merges[s].size << '\n';
  }
  a.close();
}

void load_types(Run& r) {
  const auto t = load_table(r.dir, "types.csv", {"player_id", "condition", "truth", "cluster", "type"});
  if (t.rows.size() != r.modes.size()) throw validation_error("types.csv does not match the players");
  for (std::size_t p = 0; p < t.rows.size(); ++p) {
    const auto type = parse_player_type(t.rows[p][4]);
    if (t.rows[p][0] != r.modes[p].player_id || !type) throw validation_error("types.csv: bad row " + t.rows[p][0]);
    r.type_cluster.push_back(to_int(t.rows[p][3], "cluster"));
    r.types.push_back(*type);
  }
}

// ---- interaction

void add_table(Run& r, int phase, const std::string& name, const seqtype::ContingencyTable& table) {
  const numkit::ChiSquareResult* test = table.test ? &*table.test : nullptr;
  std::vector<std::optional<std::size_t>> row_at(table.counts.rows()), col_at(table.counts.cols());
  if (test) {
    for (std::size_t i = 0; i < test->kept_rows.size(); ++i) row_at[test->kept_rows[i]] = i;
    for (std::size_t j = 0; j < test->kept_cols.size(); ++j) col_at[test->kept_cols[j]] = j;
  }
  for (std::size_t i = 0; i < table.counts.rows(); ++i) {
    for (std::size_t j = 0; j < table.counts.cols(); ++j) {
      InteractionCell cell{phase, name, table.row_names[i], table.col_names[j], table.counts(i, j), {}, {}, {}};
      if (row_at[i] && col_at[j]) {
        const auto a = *row_at[i], b = *col_at[j];
        cell.expected = test->expected(a, b);
        cell.residual = r.m.cell == numkit::CellResidual::Pearson ? test->pearson_residuals(a, b)
                                                                  : test->adjusted_residuals(a, b);
        cell.p_value = test->cell_p_values(a, b);
      }
      r.cells.push_back(std::move(cell));
    }
  }
}

void run_interaction(Run& r) {
  std::vector<Condition> conditions;
  for (const auto& e : r.kept) conditions.push_back(e.condition);
  const auto report =
      seqtype::interaction_report(r.modes, r.phases, r.types, conditions, r.model.labeling.alphabet, r.m.cell);
  for (const auto& pi : report.phases) {
    for (const auto& [name, table] : {std::pair<std::string, const seqtype::ContingencyTable*>{"type", &pi.by_type},
                                      {"type_condition", &pi.by_type_condition}}) {
      add_table(r, pi.phase.id, name, *table);
      InteractionTest test{pi.phase.id, pi.phase.start_week, pi.phase.end_week, name, {}, {}, 0, "ok"};
      if (table->test) {
        test.statistic = table->test->statistic;
        test.p_value = table->test->p_value;
        test.df = table->test->degrees_of_freedom;
      } else {
        test.status = "skipped: " + table->skipped;
      }
      r.tests.push_back(test);
    }
  }
  {
    Artifact a = r.open("interaction.csv");
    *a << "phase,table,row,mode,observed,expected,residual,cell_p\n";
    for (const auto& c : r.cells)
      *a << c.phase << ',' << c.table << ',' << c.row << ',' << c.mode << ',' << format_double(c.observed) << ','
         << opt_double(c.expected) << ',' << opt_double(c.residual) << ',' << opt_double(c.p_value) << '\n';
    a.close();
  }
  Artifact a = r.open("interaction_tests.csv");
  *a << "phase,start_week,end_week,table,statistic,df,p_value,status\n";
  for (const auto& t : r.tests)
    *a << t.phase << ',' << t.start_week << ',' << t.end_week << ',' << t.table << ',' << opt_double(t.statistic)
       << ',' << t.df << ',' << opt_double(t.p_value) << ',' << clean(t.status) << '\n';
  a.close();
}

void load_interaction(Run& r) {
  const auto cells = load_table(r.dir, "interaction.csv",
                                {"phase", "table", "row", "mode", "observed", "expected", "residual", "cell_p"});
  for (const auto& row : cells.rows)
    r.cells.push_back({to_int(row[0], "phase"), row[1], row[2], row[3], parse_double(row[4]), parse_opt(row[5]),
                       parse_opt(row[6]), parse_opt(row[7])});
  const auto tests = load_table(r.dir, "interaction_tests.csv",
                                {"phase", "start_week", "end_week", "table", "statistic", "df", "p_value", "status"});
  for (const auto& row : tests.rows)
    r.tests.push_back({to_int(row[0], "phase"), to_int(row[1], "start_week"), to_int(row[2], "end_week"), row[3],
                       parse_opt(row[4]), parse_opt(row[6]), to_int(row[5], "df"), row[7]});
}

// ---- summary

Summary summarize(const Run& r) {
  Summary s;
  s.input_episodes = r.inputs.size();
  s.kept_episodes = r.kept.size();
  s.explained = r.explained;
  s.hmm_states = r.model.model.n_states();
  s.alphabet = r.model.labeling.alphabet;

  const seqtype::Phase* disruption = nullptr;
  for (std::size_t i = 0; i < r.phases.phases.size(); ++i) {
    const auto& ph = r.phases.phases[i];
    if (r.state_names[static_cast<std::size_t>(ph.dominant_state)] != "disruption") continue;
    if (!disruption || ph.end_week - ph.start_week > disruption->end_week - disruption->start_week) disruption = &ph;
  }
  if (disruption) {
    s.disruption_phase = std::pair{disruption->start_week, disruption->end_week};
    const auto next = static_cast<std::size_t>(disruption - r.phases.phases.data()) + 1;
    if (next < r.phases.phases.size() &&
        r.state_names[static_cast<std::size_t>(r.phases.phases[next].dominant_state)] == "recovery")
      s.recovery_phase = std::pair{r.phases.phases[next].start_week, r.phases.phases[next].end_week};
  }

  std::vector<int> truth;
  std::size_t named = 0;
  for (std::size_t p = 0; p < r.kept.size(); ++p) {
    if (!r.kept[p].player_type_truth) break;
    truth.push_back(static_cast<int>(*r.kept[p].player_type_truth));
    named += r.types[p] == *r.kept[p].player_type_truth ? 1 : 0;
  }
  if (truth.size() == r.kept.size()) {
    s.matched_accuracy = seqtype::matched_accuracy(r.type_cluster, truth);
    s.named_accuracy = static_cast<double>(named) / static_cast<double>(truth.size());
  }
  return s;
}

void write_summary(const Run& r, const Summary& s) {
  Artifact a = r.open("summary.txt");
  auto& out = *a;
  out << "episodes: " << s.input_episodes << " read, " << s.kept_episodes << " kept, "
      << s.input_episodes - s.kept_episodes << " removed as profit outliers\n";
  out << "weeks: " << r.weeks.front() << "-" << r.weeks.back() << "\n";
  out << "pca: PC1 " << fixed(s.explained[0], 4) << ", PC2 " << fixed(s.explained[1], 4) << ", together "
      << fixed(s.explained[0] + s.explained[1], 4) << "\n";
  out << "pca: PC1 loadings";
  for (std::size_t v = 0; v < r.pc1.size() && v < telemetry::kStateColumns.size(); ++v)
    out << ' ' << telemetry::kStateColumns[v] << '=' << fixed(r.pc1[v], 4);
  out << "\n";
  out << "states: k=" << r.state_names.size();
  for (std::size_t c = 0; c < r.state_names.size(); ++c) out << ' ' << c << '=' << r.state_names[c];
  out << "\n";
  for (const auto& ph : r.phases.phases)
    out << "phase " << ph.id << ": weeks " << ph.start_week << "-" << ph.end_week << ", "
        << r.state_names[static_cast<std::size_t>(ph.dominant_state)] << "\n";
  out << "disruption phase: "
      << (s.disruption_phase ? std::to_string(s.disruption_phase->first) + "-" + std::to_string(s.disruption_phase->second)
                             : std::string("none"))
      << "\n";
  out << "recovery phase: "
      << (s.recovery_phase ? std::to_string(s.recovery_phase->first) + "-" + std::to_string(s.recovery_phase->second)
                           : std::string("none"))
      << "\n";
  out << "hmm: " << s.hmm_states << " states by BIC, modes";
  for (const auto& m : s.alphabet) out << ' ' << m;
  out << "\n";
  for (std::size_t st = 0; st < r.model.model.n_states(); ++st)
    out << "hmm: " << r.model.labeling.labels[st] << " mean " << fixed(r.model.model.emissions[st].mean, 4)
        << " sd " << fixed(r.model.model.emissions[st].stddev, 4) << "\n";
  std::map<PlayerType, std::size_t> sizes;
  for (auto t : r.types) ++sizes[t];
  out << "types:";
  for (auto t : kAllPlayerTypes) out << ' ' << to_string(t) << '=' << sizes[t];
  out << "\n";
  if (s.matched_accuracy)
    out << "type recovery: matched accuracy " << fixed(*s.matched_accuracy, 4) << ", named accuracy "
        << fixed(*s.named_accuracy, 4) << "\n";
  else
    out << "type recovery: no truth labels\n";
  for (const auto& t : r.tests) {
    if (t.table != "type") continue;
    out << "interaction phase " << t.phase << " (" << t.start_week << "-" << t.end_week << "): ";
    if (t.statistic)
      out << "chi2 " << fixed(*t.statistic, 3) << " df " << t.df << " p " << fixed(*t.p_value, 5);
    else
      out << t.status;
    out << "\n";
    for (auto type : kAllPlayerTypes) {
      out << "  " << to_string(type) << ":";
      for (const auto& c : r.cells) {
        if (c.phase == t.phase && c.table == "type" && c.row == to_string(type) && c.residual)
          out << ' ' << c.mode << '=' << fixed(*c.residual, 3);
      }
      out << "\n";
    }
  }
  a.close();
}

template <typename Fn>
void in_stage(Stage s, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.kind(), "stage " + std::string(to_string(s)) + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Io, "stage " + std::string(to_string(s)) + ": " + e.what());
  }
}

}  // namespace

Summary run_pipeline(const Manifest& manifest, std::optional<Stage> resume_from) {
  manifest.validate();
  std::error_code ec;
  fs::create_directories(manifest.output, ec);
  if (ec) throw io_error("cannot create " + manifest.output.string() + ": " + ec.message());

  Run r{manifest, manifest.output};
  const auto start = resume_from.value_or(Stage::Filter);
  auto step = [&](Stage s, void (*compute)(Run&), void (*load)(Run&)) {
    in_stage(s, [&] { (s < start ? load : compute)(r); });
  };
  step(Stage::Filter, run_filter, load_filter);
  step(Stage::States, run_states, load_states);
  step(Stage::Phases, run_phases, load_phases);
  step(Stage::Deviations, run_deviations, load_deviations);
  step(Stage::Hmm, run_hmm, load_hmm);
  step(Stage::Decode, run_decode, load_decode);
  step(Stage::Types, run_types, load_types);
  step(Stage::Interaction, run_interaction, load_interaction);
  Summary summary;
  in_stage(Stage::Summary, [&] {
    summary = summarize(r);
    write_summary(r, summary);
  });
  return summary;
}

}  // namespace gamette::pipeline
