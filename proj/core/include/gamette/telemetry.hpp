#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gamette/episode.hpp"
#include "gamette/numkit/matrix.hpp"
#include "gamette/numkit/stats.hpp"

namespace gamette::telemetry {

inline constexpr std::string_view kSessionPrefix = "#session";
inline constexpr std::string_view kColumnHeader =
    "week,agent,inv,dem_hc1,dem_hc2,blg,shp,oor,suggestion,order,ship_hc1,ship_hc2,holding,stockout,"
    "revenue,profit";

/// Episode file: one session header line, the column header, then one line
/// per week.
void write_episode(std::ostream& out, const EpisodeRecord& episode);
std::string format_episode(const EpisodeRecord& episode);
EpisodeRecord read_episode(std::istream& in);
EpisodeRecord parse_episode(std::string_view text);

void save_episode(const std::filesystem::path& path, const EpisodeRecord& episode);
EpisodeRecord load_episode(const std::filesystem::path& path);

struct OutlierSplit {
  std::vector<EpisodeRecord> kept;
  std::vector<EpisodeRecord> removed;
  double mean_profit = 0.0;
  double stddev_profit = 0.0;
};

/// Removes episodes whose total profit falls outside mean +- 3 population
/// standard deviations. One pass; input order is preserved.
OutlierSplit filter_outliers(std::vector<EpisodeRecord> episodes, double width = 3.0);

inline constexpr std::array<std::string_view, 6> kStateColumns = {"inv", "dem_hc1", "dem_hc2",
                                                                  "blg", "shp", "oor"};

struct StateMatrix {
  numkit::Matrix values;  // player-major, one row per (player, week)
  std::vector<std::string> player_ids;
  std::vector<int> weeks;  // gameplay weeks shared by every player
  numkit::Standardization standardization;

  std::size_t row(std::size_t player, std::size_t week_index) const {
    return player * weeks.size() + week_index;
  }
};

StateMatrix build_state_matrix(std::span<const EpisodeRecord> episodes);

struct DeviationSequences {
  std::vector<std::string> player_ids;
  std::vector<std::vector<double>> raw;         // order - suggestion
  std::vector<std::vector<double>> normalized;  // pooled z-scores
  double pooled_mean = 0.0;
  double pooled_stddev = 0.0;
};

DeviationSequences build_deviation_sequences(std::span<const EpisodeRecord> episodes);

/// CSV with a header row; values use format_double.
void write_matrix_csv(std::ostream& out, std::span<const std::string> header, const numkit::Matrix& m);
numkit::Matrix read_matrix_csv(std::istream& in, std::vector<std::string>* header = nullptr);

}  // namespace gamette::telemetry
