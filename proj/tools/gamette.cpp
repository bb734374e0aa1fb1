#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gamette/cohort.hpp"
#include "gamette/config.hpp"
#include "gamette/error.hpp"
#include "gamette/flowsim.hpp"
#include "gamette/http.hpp"
#include "gamette/pipeline.hpp"
#include "gamette/service.hpp"
#include "gamette/telemetry.hpp"

namespace fs = std::filesystem;
using namespace gamette;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

fs::path stamped_dir(const fs::path& base, const std::string& command) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  fs::path dir = base / (command + "-" + stamp);
  for (int n = 2; fs::exists(dir); ++n) dir = base / (command + "-" + stamp + "-" + std::to_string(n));
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw io_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

config::Document load_config(const std::string& path) {
  return path.empty() ? config::Document{} : config::load(path);
}

int run_simulate(const Globals& g, const std::string& config_path, const std::string& out, const std::string& type,
                 const std::string& condition) {
  auto doc = load_config(config_path);
  ScenarioConfig scenario = doc.scenario;
  if (g.seed) scenario.rng_seed = *g.seed;
  if (!condition.empty()) scenario.condition = *parse_condition(condition);
  Controller ws1 = OrderUpToController{};
  std::optional<PlayerType> planted;
  if (type != "follower-exact") {
    planted = *parse_player_type(type);
    ws1 = BehavioralController{BehavioralAgent(default_behavioral_policy(
        *planted, scenario.base_stock(AgentId::WS1), derive_seed(scenario.rng_seed, 1), scenario.announcement_week,
        scenario.start_week))};
  }
  const auto episode = run_standalone(scenario, default_controllers(std::move(ws1)), "p001");
  const fs::path dir = stamped_dir(out, "simulate");
  write_text(dir / "scenario.yaml", config::format_scenario(scenario));
  telemetry::save_episode(dir / "p001.csv", episode.record);
  std::cout << dir.string() << "\n";
  std::cout << "total profit " << episode.record.total_profit() << "\n";
  return 0;
}

int run_synth(const Globals& g, const std::string& config_path, const std::string& out) {
  auto doc = load_config(config_path);
  CohortSpec spec = doc.cohort;
  if (g.seed) spec.seed = *g.seed;
  const auto episodes = generate_cohort(spec, g.jobs);
  const fs::path dir = stamped_dir(out, "cohort");
  fs::create_directories(dir / "episodes");
  write_text(dir / "cohort.yaml", config::format_scenario(spec.scenario) + config::format_cohort(spec));
  for (const auto& e : episodes) telemetry::save_episode(dir / "episodes" / (e.player_id + ".csv"), e);
  std::cout << dir.string() << "\n";
  std::cout << episodes.size() << " episodes\n";
  return 0;
}

int run_analyze(const Globals& g, const std::string& config_path, const std::vector<std::string>& inputs,
                const std::string& out, const std::string& resume, const std::string& bundle) {
  auto doc = load_config(config_path);
  pipeline::Manifest m = doc.manifest;
  if (!inputs.empty()) m.inputs.assign(inputs.begin(), inputs.end());
  if (g.seed) m.seed = *g.seed;
  m.jobs = g.jobs;
  std::optional<pipeline::Stage> from;
  if (!resume.empty()) {
    from = pipeline::parse_stage(resume);
    if (!from) throw validation_error("unknown stage '" + resume + "'");
    if (bundle.empty()) throw validation_error("--resume-from needs --bundle");
    m.output = bundle;
  } else {
    m.output = stamped_dir(out, "analyze");
  }
  pipeline::run_pipeline(m, from);
  std::cout << m.output.string() << "\n";
  std::cout << read_text(m.output / "summary.txt");
  return 0;
}

int run_report(const std::string& bundle) {
  std::vector<std::string> missing;
  for (const auto s : pipeline::kAllStages) {
    for (const auto& name : pipeline::stage_artifacts(s)) {
      if (!fs::exists(fs::path(bundle) / name)) missing.push_back(name);
    }
  }
  if (!missing.empty()) {
    std::cerr << "incomplete bundle, missing:";
    for (const auto& m : missing) std::cerr << ' ' << m;
    std::cerr << "\n";
    return kExitValidation;
  }
  std::cout << read_text(fs::path(bundle) / "summary.txt");
  return 0;
}

int run_serve(const Globals& g, const std::string& config_path, const std::string& host, int port, int idle) {
  auto doc = load_config(config_path);
  service::ManagerOptions options;
  options.scenario = doc.scenario;
  if (g.seed) options.seed = *g.seed;
  options.idle_timeout = std::chrono::seconds(idle);
  service::SessionManager manager(options);
  http::Server server(manager);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int bound = server.bind(host, port);
  std::cout << "listening on " << host << ":" << bound << std::endl;
  std::atomic<bool> signalled{false};
  std::jthread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    server.stop();
  });
  server.listen();
  if (!signalled) pthread_kill(watcher.native_handle(), SIGTERM);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gamette: supply-chain game simulation and behavioral analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every stochastic component");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string config_path, out = "runs", type = "follower-exact", condition, resume, bundle, host = "127.0.0.1";
  std::vector<std::string> inputs;
  int port = 8080, idle = 7200;

  auto* simulate = app.add_subcommand("simulate", "Run one standalone episode");
  simulate->add_option("--config", config_path, "YAML config with a scenario section")->check(CLI::ExistingFile);
  simulate->add_option("--out", out, "Parent of the timestamped output directory");
  simulate->add_option("--player", type, "follower-exact, Hoarder, Reactor or Follower")
      ->check(CLI::IsMember({"follower-exact", "Hoarder", "Reactor", "Follower"}));
  simulate->add_option("--condition", condition)->check(CLI::IsMember({"Info", "NoInfo"}));

  auto* synth = app.add_subcommand("synth-cohort", "Generate a planted synthetic cohort");
  synth->add_option("--config", config_path, "YAML config with scenario and cohort sections")
      ->check(CLI::ExistingFile);
  synth->add_option("--out", out, "Parent of the timestamped output directory");

  auto* analyze = app.add_subcommand("analyze", "Run the analysis pipeline");
  analyze->add_option("--config", config_path, "YAML config with a pipeline section")->check(CLI::ExistingFile);
  analyze->add_option("--input", inputs, "Episode files or directories (override the manifest)");
  analyze->add_option("--out", out, "Parent of the timestamped bundle directory");
  analyze->add_option("--resume-from", resume, "Reload earlier stages from --bundle and rerun from this one");
  analyze->add_option("--bundle", bundle, "Existing bundle directory to resume in")->check(CLI::ExistingDirectory);

  auto* report = app.add_subcommand("report", "Check a bundle and print its summary");
  report->add_option("--bundle", bundle)->required()->check(CLI::ExistingDirectory);

  auto* serve = app.add_subcommand("serve", "Serve the game over HTTP");
  serve->add_option("--config", config_path, "YAML config with a scenario section")->check(CLI::ExistingFile);
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--idle-timeout", idle, "Seconds before an idle session is dropped")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (simulate->parsed()) return run_simulate(g, config_path, out, type, condition);
    if (synth->parsed()) return run_synth(g, config_path, out);
    if (analyze->parsed()) return run_analyze(g, config_path, inputs, out, resume, bundle);
    if (report->parsed()) return run_report(bundle);
    if (serve->parsed()) return run_serve(g, config_path, host, port, idle);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool validation = e.kind() == ErrorKind::Validation || e.kind() == ErrorKind::NotFound ||
                            e.kind() == ErrorKind::StateConflict;
    return validation ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
