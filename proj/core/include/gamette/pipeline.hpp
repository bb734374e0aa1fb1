#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gamette/numkit/chisq.hpp"

namespace gamette::pipeline {

struct Manifest {
  // Episode files, or directories whose *.csv files are read in name order.
  std::vector<std::filesystem::path> inputs;
  double outlier_width = 3.0;
  std::size_t state_k = 3;
  std::vector<std::size_t> state_k_range{2, 3, 4, 5, 6, 7, 8};
  std::vector<std::size_t> hmm_k_range{2, 3, 4, 5, 6, 7, 8};
  int hmm_restarts = 5;
  double hmm_tolerance = 1e-6;
  int hmm_max_iterations = 500;
  std::size_t type_k = 3;
  std::vector<std::size_t> type_k_range{2, 3, 4, 5, 6};
  numkit::CellResidual cell = numkit::CellResidual::Pearson;
  int announcement_week = 28;
  std::uint64_t seed = 7;
  std::filesystem::path output;
  unsigned jobs = 1;

  void validate() const;
};

enum class Stage : std::uint8_t { Filter, States, Phases, Deviations, Hmm, Decode, Types, Interaction, Summary };

inline constexpr std::array<Stage, 9> kAllStages = {Stage::Filter,     Stage::States, Stage::Phases,
                                                    Stage::Deviations, Stage::Hmm,    Stage::Decode,
                                                    Stage::Types,      Stage::Interaction, Stage::Summary};

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view text);

/// Files a stage writes into the bundle directory.
std::vector<std::string> stage_artifacts(Stage s);

struct Summary {
  std::size_t input_episodes = 0;
  std::size_t kept_episodes = 0;
  std::array<double, 2> explained{};
  std::optional<std::pair<int, int>> disruption_phase;  // first and last week
  std::optional<std::pair<int, int>> recovery_phase;
  std::size_t hmm_states = 0;
  std::vector<std::string> alphabet;
  std::optional<double> matched_accuracy;
  std::optional<double> named_accuracy;
};

/// Runs every stage in order and writes the bundle into manifest.output.
/// With `resume_from`, earlier stages are reloaded from the artifacts already
/// in that directory. A failing stage raises an Error naming the stage; files
/// written by earlier stages stay in place.
Summary run_pipeline(const Manifest& manifest, std::optional<Stage> resume_from = std::nullopt);

/// Episode files named by the manifest inputs, in reading order.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs);

}  // namespace gamette::pipeline
