#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gamette/cohort.hpp"
#include "gamette/error.hpp"
#include "gamette/pipeline.hpp"
#include "gamette/telemetry.hpp"
#include "oracles.hpp"

using namespace gamette;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_cohort(const fs::path& dir, const CohortSpec& spec) {
  const fs::path eps = dir / "episodes";
  fs::create_directories(eps);
  for (const auto& e : generate_cohort(spec)) telemetry::save_episode(eps / (e.player_id + ".csv"), e);
  return eps;
}

pipeline::Manifest small_manifest(const fs::path& inputs, const fs::path& out) {
  pipeline::Manifest m;
  m.inputs = {inputs};
  m.output = out;
  m.hmm_restarts = 2;
  m.hmm_k_range = {2, 3, 4};
  m.state_k_range = {2, 3, 4};
  m.type_k_range = {2, 3, 4};
  return m;
}

std::vector<std::string> all_artifacts() {
  std::vector<std::string> names;
  for (auto s : pipeline::kAllStages)
    for (auto& n : pipeline::stage_artifacts(s)) names.push_back(n);
  return names;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("stage names") {
    for (auto s : pipeline::kAllStages) CHECK(pipeline::parse_stage(pipeline::to_string(s)) == s);
    CHECK_FALSE(pipeline::parse_stage("everything").has_value());
    CHECK(pipeline::to_string(pipeline::Stage::Hmm) == "hmm");
  }

  TEST_CASE("bundle is complete, deterministic and resumable") {
    const auto dir = oracle::scratch_dir("pipeline");
    CohortSpec spec;
    spec.counts = {{{5, 5}, {5, 5}, {3, 3}}};
    const auto eps = write_cohort(dir, spec);

    const auto summary = pipeline::run_pipeline(small_manifest(eps, dir / "a"));
    CHECK(summary.input_episodes == 26);
    CHECK(summary.kept_episodes <= 26);
    CHECK(summary.hmm_states >= 2);
    CHECK(summary.alphabet.size() == summary.hmm_states);
    for (const auto& name : all_artifacts()) CHECK_MESSAGE(fs::exists(dir / "a" / name), name);
    CHECK(slurp(dir / "a" / "filter.csv").starts_with("# seed=7\n"));

    auto parallel = small_manifest(eps, dir / "b");
    parallel.jobs = 4;
    pipeline::run_pipeline(parallel);
    for (const auto& name : all_artifacts())
      CHECK_MESSAGE(slurp(dir / "a" / name) == slurp(dir / "b" / name), name);

    for (auto from : {pipeline::Stage::States, pipeline::Stage::Hmm, pipeline::Stage::Types,
                      pipeline::Stage::Summary}) {
      pipeline::run_pipeline(small_manifest(eps, dir / "b"), from);
      for (const auto& name : all_artifacts())
        CHECK_MESSAGE(slurp(dir / "a" / name) == slurp(dir / "b" / name), name);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("failures name the stage") {
    const auto dir = oracle::scratch_dir("pipeline-fail");
    CohortSpec one;
    one.counts = {{{1, 0}, {0, 0}, {0, 0}}};
    const auto single = write_cohort(dir / "one", one);
    try {
      pipeline::run_pipeline(small_manifest(single, dir / "out1"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("stage filter") != std::string::npos);
      CHECK(e.kind() == ErrorKind::Validation);
    }

    CohortSpec followers;
    followers.counts = {{{0, 0}, {0, 0}, {4, 4}}};
    const auto flat = write_cohort(dir / "flat", followers);
    try {
      pipeline::run_pipeline(small_manifest(flat, dir / "out2"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("stage deviations") != std::string::npos);
      CHECK(e.kind() == ErrorKind::Numeric);
    }
    CHECK(fs::exists(dir / "out2" / "phases.csv"));

    CHECK_THROWS_AS(pipeline::run_pipeline(small_manifest(dir / "nothing", dir / "out3")), Error);
    CHECK_THROWS_AS(pipeline::run_pipeline(small_manifest(single, dir / "out4"), pipeline::Stage::Hmm), Error);
    fs::remove_all(dir);
  }

  TEST_CASE("manifest validation") {
    pipeline::Manifest m;
    m.inputs = {fs::temp_directory_path()};
    m.output = "y";
    CHECK_NOTHROW(m.validate());
    m.hmm_k_range.clear();
    CHECK_THROWS_AS(m.validate(), Error);
    m = pipeline::Manifest{};
    m.inputs = {fs::temp_directory_path()};
    m.output = "y";
    m.hmm_restarts = 0;
    CHECK_THROWS_AS(m.validate(), Error);
    m.hmm_restarts = 1;
    m.inputs = {"/nonexistent/episodes"};
    CHECK_THROWS_AS(m.validate(), Error);
  }

  TEST_CASE("directory inputs expand to sorted csv files") {
    const auto dir = oracle::scratch_dir("expand");
    for (const char* n : {"b.csv", "a.csv", "notes.txt"}) std::ofstream(dir / n) << "x";
    const auto files = pipeline::expand_inputs({dir});
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "a.csv");
    CHECK(files[1].filename() == "b.csv");
    fs::remove_all(dir);
  }
}
