#include "gamette/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "gamette/error.hpp"
#include "gamette/textio.hpp"

namespace gamette::config {

namespace {

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) throw validation_error(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw validation_error(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const std::string& where, const char* key, T& target) {
  const YAML::Node value = node[key];
  if (!value) return;
  try {
    target = value.as<T>();
  } catch (const YAML::Exception&) {
    throw validation_error(where + "." + key + ": bad value");
  }
}

std::vector<std::size_t> read_range(const YAML::Node& node, const std::string& where) {
  // [lo, hi] inclusive
  if (!node.IsSequence() || node.size() != 2) throw validation_error(where + ": expected [lo, hi]");
  std::size_t lo = 0, hi = 0;
  try {
    lo = node[0].as<std::size_t>();
    hi = node[1].as<std::size_t>();
  } catch (const YAML::Exception&) {
    throw validation_error(where + ": bad bound");
  }
  if (lo > hi) throw validation_error(where + ": lo > hi");
  std::vector<std::size_t> out;
  for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

std::string_view split_name(SplitMode m) { return m == SplitMode::TrustBased ? "trust" : "equal"; }

SplitMode parse_split(const std::string& text, const std::string& where) {
  if (text == "trust") return SplitMode::TrustBased;
  if (text == "equal") return SplitMode::Equal;
  throw validation_error(where + ": split must be 'trust' or 'equal'");
}

AgentId agent_key(const std::string& text, const std::string& where) {
  const auto id = parse_agent(text);
  if (!id) throw validation_error(where + ": unknown agent '" + text + "'");
  return *id;
}

void parse_scenario(const YAML::Node& node, ScenarioConfig& s) {
  const std::string where = "scenario";
  check_keys(node, where,
             {"horizon", "start_week", "tutorial_weeks", "hc_consumption", "base_stock", "manufacturer_capacity",
              "announcement_week", "condition", "trust_smoothing", "seed", "costs", "split", "disruptions"});
  read(node, where, "horizon", s.horizon);
  read(node, where, "start_week", s.start_week);
  read(node, where, "tutorial_weeks", s.tutorial_weeks);
  read(node, where, "hc_consumption", s.hc_consumption);
  read(node, where, "manufacturer_capacity", s.manufacturer_capacity);
  read(node, where, "announcement_week", s.announcement_week);
  read(node, where, "trust_smoothing", s.trust_smoothing);
  read(node, where, "seed", s.rng_seed);
  if (const auto c = node["condition"]) {
    const auto parsed = parse_condition(c.as<std::string>());
    if (!parsed) throw validation_error("scenario.condition: expected NoInfo or Info");
    s.condition = *parsed;
  }
  if (const auto b = node["base_stock"]) {
    if (!b.IsMap()) throw validation_error("scenario.base_stock: expected a mapping");
    for (const auto& kv : b) {
      const AgentId id = agent_key(kv.first.as<std::string>(), "scenario.base_stock");
      try {
        s.base_stock_levels[index_of(id)] = kv.second.as<Units>();
      } catch (const YAML::Exception&) {
        throw validation_error("scenario.base_stock." + std::string(to_string(id)) + ": bad value");
      }
    }
  }
  if (const auto c = node["costs"]) {
    check_keys(c, "scenario.costs", {"holding", "stockout", "revenue"});
    read(c, "scenario.costs", "holding", s.costs.holding_per_unit);
    read(c, "scenario.costs", "stockout", s.costs.stockout_per_unit);
    read(c, "scenario.costs", "revenue", s.costs.revenue_per_unit);
  }
  if (const auto sp = node["split"]) {
    check_keys(sp, "scenario.split", {"HC1", "HC2"});
    if (sp["HC1"]) s.hc1_split = parse_split(sp["HC1"].as<std::string>(), "scenario.split.HC1");
    if (sp["HC2"]) s.hc2_split = parse_split(sp["HC2"].as<std::string>(), "scenario.split.HC2");
  }
  if (const auto d = node["disruptions"]) {
    if (!d.IsSequence()) throw validation_error("scenario.disruptions: expected a list");
    s.disruptions.clear();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string w = "scenario.disruptions[" + std::to_string(i) + "]";
      check_keys(d[i], w, {"target", "start_week", "end_week", "capacity_multiplier"});
      DisruptionEvent e;
      if (!d[i]["target"] || !d[i]["start_week"] || !d[i]["end_week"] || !d[i]["capacity_multiplier"])
        throw validation_error(w + ": needs target, start_week, end_week and capacity_multiplier");
      e.target = agent_key(d[i]["target"].as<std::string>(), w);
      read(d[i], w, "start_week", e.start_week);
      read(d[i], w, "end_week", e.end_week);
      read(d[i], w, "capacity_multiplier", e.capacity_multiplier);
      s.disruptions.push_back(e);
    }
  }
  s.validate();
}

void parse_cohort(const YAML::Node& node, CohortSpec& c) {
  check_keys(node, "cohort", {"seed", "counts"});
  read(node, "cohort", "seed", c.seed);
  if (const auto counts = node["counts"]) {
    check_keys(counts, "cohort.counts", {"Hoarder", "Reactor", "Follower"});
    for (const auto& kv : counts) {
      const auto name = kv.first.as<std::string>();
      const auto type = *parse_player_type(name);
      const std::string w = "cohort.counts." + name;
      check_keys(kv.second, w, {"NoInfo", "Info"});
      auto& row = c.counts[static_cast<std::size_t>(type)];
      read(kv.second, w, "NoInfo", row[0]);
      read(kv.second, w, "Info", row[1]);
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_relative() && !base.empty() ? base / p : p;
}

void parse_manifest(const YAML::Node& node, pipeline::Manifest& m, const std::filesystem::path& base) {
  const std::string where = "pipeline";
  check_keys(node, where,
             {"inputs", "outlier_width", "state_k", "state_k_range", "hmm_k_range", "hmm_restarts", "hmm_tolerance",
              "hmm_max_iterations", "type_k", "type_k_range", "cell_residual", "announcement_week", "seed", "output",
              "jobs"});
  if (const auto in = node["inputs"]) {
    if (!in.IsSequence()) throw validation_error("pipeline.inputs: expected a list");
    m.inputs.clear();
    for (const auto& p : in) m.inputs.push_back(resolve(p.as<std::string>(), base));
  }
  read(node, where, "outlier_width", m.outlier_width);
  read(node, where, "state_k", m.state_k);
  read(node, where, "hmm_restarts", m.hmm_restarts);
  read(node, where, "hmm_tolerance", m.hmm_tolerance);
  read(node, where, "hmm_max_iterations", m.hmm_max_iterations);
  read(node, where, "type_k", m.type_k);
  read(node, where, "announcement_week", m.announcement_week);
  read(node, where, "seed", m.seed);
  read(node, where, "jobs", m.jobs);
  if (const auto r = node["state_k_range"]) m.state_k_range = read_range(r, "pipeline.state_k_range");
  if (const auto r = node["hmm_k_range"]) m.hmm_k_range = read_range(r, "pipeline.hmm_k_range");
  if (const auto r = node["type_k_range"]) m.type_k_range = read_range(r, "pipeline.type_k_range");
  if (const auto c = node["cell_residual"]) {
    const auto v = c.as<std::string>();
    if (v == "pearson") m.cell = numkit::CellResidual::Pearson;
    else if (v == "adjusted") m.cell = numkit::CellResidual::Adjusted;
    else throw validation_error("pipeline.cell_residual: expected pearson or adjusted");
  }
  if (const auto o = node["output"]) m.output = resolve(o.as<std::string>(), base);
}

void emit_range(YAML::Emitter& out, const char* key, const std::vector<std::size_t>& ks) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  if (!ks.empty()) out << ks.front() << ks.back();
  out << YAML::EndSeq;
}

}  // namespace

Document parse(std::string_view text, const std::filesystem::path& base_dir) {
  Document doc;
  try {
    const YAML::Node root = YAML::Load(std::string(text));
    if (root.IsNull()) return doc;
    check_keys(root, "config", {"scenario", "cohort", "pipeline"});
    if (const auto s = root["scenario"]) {
      parse_scenario(s, doc.scenario);
      doc.has_scenario = true;
    }
    if (const auto c = root["cohort"]) {
      parse_cohort(c, doc.cohort);
      doc.has_cohort = true;
    }
    doc.manifest.announcement_week = doc.scenario.announcement_week;
    if (const auto p = root["pipeline"]) {
      parse_manifest(p, doc.manifest, base_dir);
      doc.has_pipeline = true;
    }
  } catch (const YAML::Exception& e) {
    throw validation_error(std::string("config: ") + e.what());
  }
  doc.cohort.scenario = doc.scenario;
  doc.cohort.validate();
  return doc;
}

Document load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse(text.str(), path.parent_path());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string format_scenario(const ScenarioConfig& s) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "horizon" << YAML::Value << s.horizon;
  out << YAML::Key << "start_week" << YAML::Value << s.start_week;
  out << YAML::Key << "tutorial_weeks" << YAML::Value << s.tutorial_weeks;
  out << YAML::Key << "hc_consumption" << YAML::Value << s.hc_consumption;
  out << YAML::Key << "base_stock" << YAML::Value << YAML::Flow << YAML::BeginMap;
  for (const auto id : kAllAgents) out << YAML::Key << std::string(to_string(id)) << YAML::Value << s.base_stock(id);
  out << YAML::EndMap;
  out << YAML::Key << "manufacturer_capacity" << YAML::Value << s.manufacturer_capacity;
  out << YAML::Key << "announcement_week" << YAML::Value << s.announcement_week;
  out << YAML::Key << "condition" << YAML::Value << std::string(to_string(s.condition));
  out << YAML::Key << "trust_smoothing" << YAML::Value << format_double(s.trust_smoothing);
  out << YAML::Key << "seed" << YAML::Value << s.rng_seed;
  out << YAML::Key << "costs" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "holding" << YAML::Value << s.costs.holding_per_unit;
  out << YAML::Key << "stockout" << YAML::Value << s.costs.stockout_per_unit;
  out << YAML::Key << "revenue" << YAML::Value << s.costs.revenue_per_unit << YAML::EndMap;
  out << YAML::Key << "split" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "HC1" << YAML::Value << std::string(split_name(s.hc1_split));
  out << YAML::Key << "HC2" << YAML::Value << std::string(split_name(s.hc2_split)) << YAML::EndMap;
  out << YAML::Key << "disruptions" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : s.disruptions) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "target" << YAML::Value << std::string(to_string(d.target));
    out << YAML::Key << "start_week" << YAML::Value << d.start_week;
    out << YAML::Key << "end_week" << YAML::Value << d.end_week;
    out << YAML::Key << "capacity_multiplier" << YAML::Value << format_double(d.capacity_multiplier);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string format_cohort(const CohortSpec& c) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "cohort" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "counts" << YAML::Value << YAML::BeginMap;
  for (const auto t : kAllPlayerTypes) {
    const auto& row = c.counts[static_cast<std::size_t>(t)];
    out << YAML::Key << std::string(to_string(t)) << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "NoInfo" << YAML::Value << row[0] << YAML::Key << "Info" << YAML::Value << row[1];
    out << YAML::EndMap;
  }
  out << YAML::EndMap << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string format_manifest(const pipeline::Manifest& m) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "pipeline" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "inputs" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : m.inputs) out << p.generic_string();
  out << YAML::EndSeq;
  out << YAML::Key << "outlier_width" << YAML::Value << format_double(m.outlier_width);
  out << YAML::Key << "state_k" << YAML::Value << m.state_k;
  emit_range(out, "state_k_range", m.state_k_range);
  emit_range(out, "hmm_k_range", m.hmm_k_range);
  out << YAML::Key << "hmm_restarts" << YAML::Value << m.hmm_restarts;
  out << YAML::Key << "hmm_tolerance" << YAML::Value << format_double(m.hmm_tolerance);
  out << YAML::Key << "hmm_max_iterations" << YAML::Value << m.hmm_max_iterations;
  out << YAML::Key << "type_k" << YAML::Value << m.type_k;
  emit_range(out, "type_k_range", m.type_k_range);
  out << YAML::Key << "cell_residual" << YAML::Value
      << (m.cell == numkit::CellResidual::Pearson ? "pearson" : "adjusted");
  out << YAML::Key << "announcement_week" << YAML::Value << m.announcement_week;
  out << YAML::Key << "seed" << YAML::Value << m.seed;
  out << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace gamette::config
