#include "gamette/telemetry.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gamette/error.hpp"
#include "gamette/textio.hpp"

namespace gamette::telemetry {

using numkit::Matrix;

namespace {

std::int64_t parse_int(std::string_view text, std::string_view what) { return parse_integer(text, what); }

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

void write_episode(std::ostream& out, const EpisodeRecord& e) {
  if (e.player_id.empty() || e.player_id.find_first_of(" \t\n,=") != std::string::npos)
    throw validation_error("player_id must be non-empty without spaces, commas or '='");
  out << kSessionPrefix << " player_id=" << e.player_id << " condition=" << to_string(e.condition)
      << " seed=" << e.seed << " truth=" << (e.player_type_truth ? to_string(*e.player_type_truth) : "none")
      << '\n';
  out << kColumnHeader << '\n';
  for (const auto& w : e.weeks) {
    const auto& s = w.snapshot;
    const auto& l = w.ledger;
    out << s.week << ',' << to_string(w.agent) << ',' << s.inv << ',' << s.dem_hc1 << ',' << s.dem_hc2 << ','
        << s.blg << ',' << s.shp << ',' << s.oor << ',' << w.suggestion << ',' << w.order << ',' << w.ship_hc1
        << ',' << w.ship_hc2 << ',' << l.holding_cost << ',' << l.stockout_cost << ',' << l.revenue << ','
        << l.profit << '\n';
  }
}

std::string format_episode(const EpisodeRecord& episode) {
  std::ostringstream out;
  write_episode(out, episode);
  return out.str();
}

EpisodeRecord read_episode(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw validation_error("episode: missing session header");
  std::string_view head = trim_cr(line);
  if (!head.starts_with(kSessionPrefix)) throw validation_error("episode: first line must start with #session");

  EpisodeRecord e;
  bool have_id = false;
  std::istringstream fields{std::string(head.substr(kSessionPrefix.size()))};
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw validation_error("episode: malformed header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "player_id") {
      e.player_id = value;
      have_id = !value.empty();
    } else if (key == "condition") {
      const auto c = parse_condition(value);
      if (!c) throw validation_error("episode: unknown condition '" + value + "'");
      e.condition = *c;
    } else if (key == "seed") {
      e.seed = parse_unsigned(value, "seed");
    } else if (key == "truth") {
      if (value != "none") {
        const auto t = parse_player_type(value);
        if (!t) throw validation_error("episode: unknown player type '" + value + "'");
        e.player_type_truth = *t;
      }
    } else {
      throw validation_error("episode: unknown header field '" + key + "'");
    }
  }
  if (!have_id) throw validation_error("episode: header lacks player_id");

  if (!std::getline(in, line) || trim_cr(line) != kColumnHeader)
    throw validation_error("episode: missing or unexpected column header");

  while (std::getline(in, line)) {
    const std::string_view text = trim_cr(line);
    if (text.empty()) continue;
    const auto cols = split(text, ',');
    if (cols.size() != 16) throw validation_error("episode: expected 16 columns, got " + std::to_string(cols.size()));
    WeekRow w;
    const auto agent = parse_agent(cols[1]);
    if (!agent) throw validation_error("episode: unknown agent '" + cols[1] + "'");
    w.agent = *agent;
    auto& s = w.snapshot;
    s.week = static_cast<int>(parse_int(cols[0], "week"));
    s.inv = parse_int(cols[2], "inv");
    s.dem_hc1 = parse_int(cols[3], "dem_hc1");
    s.dem_hc2 = parse_int(cols[4], "dem_hc2");
    s.blg = parse_int(cols[5], "blg");
    s.shp = parse_int(cols[6], "shp");
    s.oor = parse_int(cols[7], "oor");
    w.suggestion = parse_int(cols[8], "suggestion");
    w.order = parse_int(cols[9], "order");
    w.ship_hc1 = parse_int(cols[10], "ship_hc1");
    w.ship_hc2 = parse_int(cols[11], "ship_hc2");
    w.ledger.week = s.week;
    w.ledger.holding_cost = parse_int(cols[12], "holding");
    w.ledger.stockout_cost = parse_int(cols[13], "stockout");
    w.ledger.revenue = parse_int(cols[14], "revenue");
    w.ledger.profit = parse_int(cols[15], "profit");
    if (!e.weeks.empty() && s.week != e.weeks.back().snapshot.week + 1)
      throw validation_error("episode: weeks are not consecutive at week " + std::to_string(s.week));
    e.weeks.push_back(w);
  }
  return e;
}

EpisodeRecord parse_episode(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_episode(in);
}

void save_episode(const std::filesystem::path& path, const EpisodeRecord& episode) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  write_episode(out, episode);
  if (!out) throw io_error("write failed: " + path.string());
}

EpisodeRecord load_episode(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read " + path.string());
  try {
    return read_episode(in);
  } catch (const Error& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
}

OutlierSplit filter_outliers(std::vector<EpisodeRecord> episodes, double width) {
  if (episodes.size() < 2) throw validation_error("filter_outliers: need at least 2 episodes");
  std::vector<double> totals;
  totals.reserve(episodes.size());
  for (const auto& e : episodes) totals.push_back(static_cast<double>(e.total_profit()));
  OutlierSplit out;
  out.mean_profit = numkit::mean(totals);
  out.stddev_profit = numkit::population_stddev(totals);
  const double band = width * out.stddev_profit;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const bool inside = std::abs(totals[i] - out.mean_profit) <= band;
    (inside ? out.kept : out.removed).push_back(std::move(episodes[i]));
  }
  return out;
}

namespace {

void check_aligned(std::span<const EpisodeRecord> episodes) {
  if (episodes.empty()) throw validation_error("no episodes");
  const auto& ref = episodes.front().weeks;
  if (ref.empty()) throw validation_error("episode " + episodes.front().player_id + " has no weeks");
  for (const auto& e : episodes) {
    if (e.weeks.size() != ref.size() || e.weeks.front().snapshot.week != ref.front().snapshot.week)
      throw validation_error("episode " + e.player_id + " does not share the horizon of the first episode");
  }
}

}  // namespace

StateMatrix build_state_matrix(std::span<const EpisodeRecord> episodes) {
  check_aligned(episodes);
  StateMatrix out;
  for (const auto& w : episodes.front().weeks) out.weeks.push_back(w.snapshot.week);
  out.values = Matrix(episodes.size() * out.weeks.size(), kStateColumns.size());
  for (std::size_t p = 0; p < episodes.size(); ++p) {
    out.player_ids.push_back(episodes[p].player_id);
    for (std::size_t t = 0; t < out.weeks.size(); ++t) {
      const auto& s = episodes[p].weeks[t].snapshot;
      auto row = out.values.row(out.row(p, t));
      row[0] = static_cast<double>(s.inv);
      row[1] = static_cast<double>(s.dem_hc1);
      row[2] = static_cast<double>(s.dem_hc2);
      row[3] = static_cast<double>(s.blg);
      row[4] = static_cast<double>(s.shp);
      row[5] = static_cast<double>(s.oor);
    }
  }
  out.standardization = numkit::standardize_columns(out.values);
  return out;
}

DeviationSequences build_deviation_sequences(std::span<const EpisodeRecord> episodes) {
  check_aligned(episodes);
  DeviationSequences out;
  std::vector<double> pooled;
  for (const auto& e : episodes) {
    out.player_ids.push_back(e.player_id);
    auto& raw = out.raw.emplace_back();
    for (const auto& w : e.weeks) raw.push_back(static_cast<double>(w.order - w.suggestion));
    pooled.insert(pooled.end(), raw.begin(), raw.end());
  }
  out.pooled_mean = numkit::mean(pooled);
  out.pooled_stddev = numkit::population_stddev(pooled);
  if (!(out.pooled_stddev > 0.0)) throw numeric_error("deviations have zero variance: no behavioral signal");
  for (const auto& raw : out.raw) {
    auto& z = out.normalized.emplace_back();
    for (double x : raw) z.push_back((x - out.pooled_mean) / out.pooled_stddev);
  }
  return out;
}

void write_matrix_csv(std::ostream& out, std::span<const std::string> header, const Matrix& m) {
  if (header.size() != m.cols()) throw validation_error("csv header width does not match matrix");
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in, std::vector<std::string>* header) {
  std::string line;
  if (!std::getline(in, line)) throw validation_error("csv: missing header");
  const auto names = split(trim_cr(line), ',');
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto cells = split(text, ',');
    if (cells.size() != names.size()) throw validation_error("csv: ragged row " + std::to_string(rows + 1));
    for (const auto& c : cells) values.push_back(parse_double(c));
    ++rows;
  }
  Matrix m(rows, names.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i / names.size(), i % names.size()) = values[i];
  if (header) *header = names;
  return m;
}

}  // namespace gamette::telemetry
