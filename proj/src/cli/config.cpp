#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>

#include <yaml-cpp/yaml.h>

#include "rpb/cli.hpp"

namespace rpb::cli {

namespace {

json scalar_to_json(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted: always a string
  if (text == "true" || text == "True") return true;
  if (text == "false" || text == "False") return false;
  if (text == "null" || text == "~" || text.empty()) return nullptr;
  const char* first = text.data();
  const char* last = first + text.size();
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc() && p == last) return i;
  std::uint64_t u = 0;
  if (auto [p, ec] = std::from_chars(first, last, u); ec == std::errc() && p == last) return u;
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc() && p == last) return d;
  return text;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Scalar: return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& item : node) {
        const auto key = item.first.as<std::string>();
        if (out.contains(key)) throw ConfigError("duplicate key '" + key + "'");
        out[key] = yaml_to_json(item.second);
      }
      return out;
    }
  }
  return nullptr;
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace

json load_structured_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return yaml_to_json(YAML::Load(in));
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ExperimentConfig parse_config(const json& doc, const GlobalOptions& flags) {
  ExperimentConfig cfg;
  const json root = doc.is_null() ? json::object() : doc;
  const std::string where = "config";
  require_known_keys(root,
                     {"policy", "agents", "instance", "reward_model", "T", "T_grid", "alpha", "reps", "seed", "mode",
                      "threads", "output", "expect", "check", "counterexample", "sweep"},
                     where);
  try {
    if (root.contains("policy")) {
      cfg.policy = root.at("policy").get<PolicySpec>();
      cfg.policy->validate();
    }
    if (root.contains("agents")) {
      if (!root.at("agents").is_array()) throw ConfigError("agents: expected a list");
      for (const auto& a : root.at("agents")) cfg.agents.push_back(agent_from_json(a));
    }
    if (root.contains("instance")) {
      const auto& inst = root.at("instance");
      require_known_keys(inst, {"means", "replication"}, "instance");
      cfg.means = field<std::vector<std::vector<double>>>(inst, "means", "instance");
      if (inst.contains("replication"))
        cfg.replication = field<std::vector<ReplicationVector>>(inst, "replication", "instance");
      if (cfg.replication.empty())
        for (const auto& m : cfg.means) cfg.replication.push_back(ReplicationVector::truthful(m.size()));
      if (cfg.replication.size() != cfg.means.size())
        throw ConfigError("instance.replication: one vector per agent is required");
      build_multi_agent_instance(cfg.means, cfg.replication, RewardModel::Deterministic);  // validates means
    }
    if (root.contains("reward_model")) cfg.reward_model = root.at("reward_model").get<RewardModel>();
    if (root.contains("T")) {
      cfg.horizon = field<std::int64_t>(root, "T", where);
      if (*cfg.horizon < 1) throw ConfigError("T: must be at least 1");
    }
    if (root.contains("T_grid")) {
      cfg.horizon_grid = field<std::vector<std::int64_t>>(root, "T_grid", where);
      for (auto t : cfg.horizon_grid)
        if (t < 2) throw ConfigError("T_grid: horizons must be at least 2");
    }
    if (root.contains("alpha")) {
      cfg.alpha = field<double>(root, "alpha", where);
      if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha: must lie in (0,1)");
    }
    if (root.contains("reps")) cfg.reps = field<std::int64_t>(root, "reps", where);
    if (root.contains("seed")) cfg.seed = field<std::uint64_t>(root, "seed", where);
    if (root.contains("mode")) cfg.mode = root.at("mode").get<EvalMode>();
    if (root.contains("threads")) cfg.threads = field<int>(root, "threads", where);
    if (root.contains("output")) {
      const auto& out = root.at("output");
      require_known_keys(out, {"dir", "format"}, "output");
      if (out.contains("dir")) cfg.out_dir = field<std::string>(out, "dir", "output");
      if (out.contains("format")) cfg.format = field<std::string>(out, "format", "output");
    }
    if (root.contains("expect")) cfg.expect = field<std::string>(root, "expect", where);
    if (root.contains("check")) cfg.check = root.at("check");
    if (root.contains("counterexample")) cfg.counterexample = root.at("counterexample");
    if (root.contains("sweep")) cfg.sweep = root.at("sweep");
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.reps) cfg.reps = *flags.reps;
  if (flags.out) cfg.out_dir = *flags.out;
  if (flags.format) cfg.format = *flags.format;
  if (flags.threads) cfg.threads = *flags.threads;
  if (cfg.threads == 0)
    if (const char* env = std::getenv("RPB_THREADS")) cfg.threads = std::atoi(env);

  if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format: expected 'csv' or 'json'");
  if (cfg.reps < 1) throw ConfigError("reps: must be at least 1");
  if (cfg.threads < 0) throw ConfigError("threads: must be non-negative");
  if (!cfg.mode.is_exact()) {
    if (cfg.mode.reps == 0) cfg.mode.reps = cfg.reps;
    if (flags.reps) cfg.mode.reps = *flags.reps;
    if (cfg.mode.seed == 0) cfg.mode.seed = cfg.seed;
    if (flags.seed) cfg.mode.seed = *flags.seed;
    if (cfg.mode.reps < 2) throw ConfigError("mode.reps: Monte-Carlo mode needs at least 2 replications");
  }
  cfg.mode.threads = cfg.threads;
  if (cfg.expect) certificate_kind_from_string(*cfg.expect);
  return cfg;
}

}  // namespace rpb::cli
