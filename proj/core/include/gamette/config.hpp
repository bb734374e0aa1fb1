#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gamette/cohort.hpp"
#include "gamette/flowsim.hpp"
#include "gamette/pipeline.hpp"

namespace gamette::config {

/// A YAML document with up to three top-level sections: `scenario`, `cohort`
/// and `pipeline`. Keys are checked strictly; anything unknown is an error.
/// Sections that are absent keep their defaults.
struct Document {
  ScenarioConfig scenario = disrupted_scenario();
  CohortSpec cohort;  // cohort.scenario mirrors `scenario`
  pipeline::Manifest manifest;
  bool has_scenario = false;
  bool has_cohort = false;
  bool has_pipeline = false;
};

/// Relative pipeline input and output paths are resolved against `base_dir`.
Document parse(std::string_view text, const std::filesystem::path& base_dir = {});
Document load(const std::filesystem::path& path);

std::string format_scenario(const ScenarioConfig& scenario);
std::string format_cohort(const CohortSpec& cohort);
/// Omits `output` and `jobs`, which do not affect results.
std::string format_manifest(const pipeline::Manifest& manifest);

}  // namespace gamette::config
