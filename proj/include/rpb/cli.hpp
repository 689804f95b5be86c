#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rpb/checkers.hpp"
#include "rpb/serialization.hpp"

namespace rpb::cli {

enum ExitCode : int {
  kExitExpected = 0,
  kExitContrary = 1,
  kExitInconclusive = 2,
  kExitConfigError = 3,
};

/// Command-line flags; each one overrides the matching config value.
struct GlobalOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  std::optional<std::string> out;
  std::optional<std::string> format;  // csv | json
  std::optional<int> threads;
};

/// Parsed experiment file. Sections consumed by a single command (`check`,
/// `counterexample`, `sweep`) stay as JSON and are validated by that command.
struct ExperimentConfig {
  std::optional<PolicySpec> policy;
  std::vector<AgentSpec> agents;
  std::vector<std::vector<double>> means;         // realized instance, per agent
  std::vector<ReplicationVector> replication;     // per agent; truthful when empty
  RewardModel reward_model = RewardModel::Bernoulli;
  std::optional<std::int64_t> horizon;
  std::vector<std::int64_t> horizon_grid;
  double alpha = 0.5;
  std::int64_t reps = 1000;
  std::uint64_t seed = 0;
  EvalMode mode;
  int threads = 0;
  std::string out_dir = ".";
  std::string format = "csv";
  std::optional<std::string> expect;
  json check = json::object();
  json counterexample = json::object();
  json sweep = json::object();
};

/// Reads a YAML or JSON file into JSON (YAML is a superset of the JSON we accept).
json load_structured_file(const std::string& path);

/// Validates and applies flag overrides. Throws ConfigError with the field path.
ExperimentConfig parse_config(const json& doc, const GlobalOptions& flags);

/// Runs a named check from the config's `check.<name>` section.
Certificate run_check(const std::string& name, const ExperimentConfig& cfg);

/// Re-runs a certificate's producing call from its recorded inputs.
Certificate recheck(const Certificate& cert, int threads = 0);

/// Exit code for a certificate against the expected kind.
int verdict_exit_code(const Certificate& cert, CertificateKind expected);
CertificateKind default_expectation(const std::string& check);

int cmd_run(const ExperimentConfig& cfg, std::ostream& log);
int cmd_check(const std::string& name, const ExperimentConfig& cfg, std::ostream& log);
int cmd_recheck(const std::string& certificate_path, int threads, std::ostream& log);
int cmd_counterexample(const std::string& kind, const ExperimentConfig& cfg, std::ostream& log);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);

/// Whole command line, as used by the `rpb` executable.
int run_cli(int argc, char** argv);

}  // namespace rpb::cli
