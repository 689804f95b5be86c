#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rpb/cli.hpp"

using namespace rpb;
namespace fs = std::filesystem;

namespace {

int rpb_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rpb");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rpb_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "config.yaml";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kData = RPB_TEST_DATA;

}  // namespace

TEST_CASE("run writes a trajectory and summary") {
  const auto dir = scratch("run");
  REQUIRE(rpb_cli({"--config", kData + "/run_ucb.yaml", "--out", dir.string(), "run"}) == cli::kExitExpected);
  const auto csv = slurp(dir / "trajectory.csv");
  CHECK(csv.rfind("t,agent,arm,reward,cum_regret\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
  const auto summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary["regret"].get<double>() == 2.0);

  // byte-identical reruns
  const auto again = scratch("run2");
  REQUIRE(rpb_cli({"--config", kData + "/run_ucb.yaml", "--out", again.string(), "run"}) == 0);
  CHECK(slurp(again / "trajectory.csv") == csv);
}

TEST_CASE("run with T = 1 and json output") {
  const auto dir = scratch("run_t1");
  const auto cfg = write_config(dir, "policy: {name: etc, m: 2}\ninstance: {means: [[0.3, 0.6]]}\nT: 1\n");
  REQUIRE(rpb_cli({"--config", cfg.string(), "--out", dir.string(), "--format", "json", "run"}) == 0);
  const auto traj = json::parse(slurp(dir / "trajectory.json"));
  REQUIRE(traj.size() == 1);
  CHECK(traj[0]["t"] == 1);
}

TEST_CASE("config errors exit with 3") {
  const auto dir = scratch("bad");
  CHECK(rpb_cli({"--config", kData + "/bad_key.yaml", "run"}) == cli::kExitConfigError);
  CHECK(rpb_cli({"--config", (dir / "missing.yaml").string(), "run"}) == cli::kExitConfigError);
  const auto neg = write_config(dir, "policy: {name: ucb}\ninstance: {means: [[0.3, 1.6]]}\nT: 5\n");
  CHECK(rpb_cli({"--config", neg.string(), "run"}) == cli::kExitConfigError);
  const auto alpha = write_config(dir, "alpha: 1.5\n");
  CHECK(rpb_cli({"--config", alpha.string(), "run"}) == cli::kExitConfigError);
  const auto nested = write_config(dir, "check: {trp: {means: [1, 0], bogus: 1}}\nT: 7\npolicy: {name: ucb}\n");
  CHECK(rpb_cli({"--config", nested.string(), "--out", dir.string(), "check", "trp"}) == cli::kExitConfigError);
}

TEST_CASE("checks and their exit codes") {
  const auto dir = scratch("check");
  CHECK(rpb_cli({"--config", kData + "/trp_etc.yaml", "--out", dir.string(), "check", "trp"}) == cli::kExitExpected);
  CHECK(json::parse(slurp(dir / "trp.json"))["kind"] == "TRPHolds");
  CHECK(rpb_cli({"--config", kData + "/rp_ucb.yaml", "--out", dir.string(), "check", "rp"}) == cli::kExitExpected);
  CHECK(json::parse(slurp(dir / "rp.json"))["kind"] == "BestResponseDeviation");
  CHECK(rpb_cli({"--config", kData + "/pi_identity.yaml", "--out", dir.string(), "check", "pi"}) == cli::kExitExpected);

  // the same UCB deviation, but expecting none: contrary outcome
  const auto contrary = write_config(
      dir, "policy: {name: ucb, c: 2}\nagents: [{prior: {support: [0, 1]}, l: 2}]\nreward_model: bernoulli\n"
           "mode: exact\nexpect: NoDeviationFound\ncheck: {rp: {T_list: [7], r_max: 1}}\n");
  CHECK(rpb_cli({"--config", contrary.string(), "--out", dir.string(), "check", "rp"}) == cli::kExitContrary);
}

TEST_CASE("verdict exit codes") {
  Certificate c;
  c.kind = CertificateKind::BoundSatisfied;
  c.outcome = Outcome::Holds;
  CHECK(cli::verdict_exit_code(c, CertificateKind::BoundSatisfied) == 0);
  CHECK(cli::verdict_exit_code(c, CertificateKind::BoundViolated) == 1);
  c.outcome = Outcome::Inconclusive;
  CHECK(cli::verdict_exit_code(c, CertificateKind::BoundSatisfied) == 2);
}

TEST_CASE("certificates re-verify from their inputs") {
  const auto dir = scratch("recheck");
  REQUIRE(rpb_cli({"--config", kData + "/trp_etc.yaml", "--out", dir.string(), "check", "trp"}) == 0);
  REQUIRE(rpb_cli({"--config", kData + "/rp_ucb.yaml", "--out", dir.string(), "check", "rp"}) == 0);
  const auto mis = write_config(dir, "seed: 4\nreps: 500\ncheck: {misselect: {mu_star: 0.75, mu_a: 0.25, m: 20}}\n");
  REQUIRE(rpb_cli({"--config", mis.string(), "--out", dir.string(), "check", "misselect"}) == 0);
  for (const char* name : {"trp.json", "rp.json", "misselect.json"})
    CHECK(rpb_cli({"check", "--certificate", (dir / name).string()}) == cli::kExitExpected);

  // a tampered result no longer reproduces
  auto cert = json::parse(slurp(dir / "misselect.json"));
  cert["payload"]["result"]["frequency"]["mean"] = 0.5;
  std::ofstream(dir / "tampered.json") << cert.dump(2);
  CHECK(rpb_cli({"check", "--certificate", (dir / "tampered.json").string()}) == cli::kExitContrary);

  const auto direct = cli::recheck(json::parse(slurp(dir / "trp.json")).get<Certificate>());
  CHECK(json(direct) == json::parse(slurp(dir / "trp.json")));
}

TEST_CASE("ucb counterexample") {
  const auto dir = scratch("cx");
  const auto c2 = write_config(dir, "counterexample: {c: 2, i_max: 3, horizon_cap: 1000}\nalpha: 0.4\n");
  REQUIRE(rpb_cli({"--config", c2.string(), "--out", dir.string(), "counterexample", "ucb"}) == cli::kExitExpected);
  const auto cert = json::parse(slurp(dir / "ucb.json"));
  CHECK(cert["payload"]["result"]["regret"] == json({{"A", 2.0}, {"B", 1.0}, {"C", 2.0}}));
  const auto sched = slurp(dir / "ucb_schedule.csv");
  CHECK(std::count(sched.begin(), sched.end(), '\n') == 4);  // header + s_1..s_3
  for (const char* inst : {"A", "B", "C"}) CHECK(fs::exists(dir / (std::string("ucb_trace_") + inst + ".csv")));

  // c = 1 has no witness within the cap: schedule still written, contrary exit
  const auto c1dir = scratch("cx1");
  const auto c1 = write_config(c1dir, "counterexample: {c: 1, i_max: 2, horizon_cap: 500}\n");
  CHECK(rpb_cli({"--config", c1.string(), "--out", c1dir.string(), "counterexample", "ucb"}) == cli::kExitContrary);
  CHECK(fs::exists(c1dir / "ucb_schedule.csv"));
  CHECK(json::parse(slurp(c1dir / "ucb.json"))["status"] == "search-exhausted");
}

TEST_CASE("hucb counterexample") {
  const auto dir = scratch("hucb");
  const auto cfg = write_config(dir, "counterexample: {grid_step: 0.05, horizon_cap: 200}\n");
  REQUIRE(rpb_cli({"--config", cfg.string(), "--out", dir.string(), "counterexample", "hucb"}) == cli::kExitExpected);
  CHECK(json::parse(slurp(dir / "hucb.json"))["kind"] == "BestResponseDeviation");
}

TEST_CASE("sweep") {
  const auto dir = scratch("sweep");
  REQUIRE(rpb_cli({"--config", kData + "/sweep.yaml", "--out", dir.string(), "sweep"}) == 0);
  const auto csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("policy,T,regret_mean,ci\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  CHECK(slurp(dir / "sweep.svg").find("<polyline") != std::string::npos);

  const auto flat = scratch("sweep_flat");
  const auto cfg = write_config(flat, "instance: {means: [[0.5]]}\nreward_model: deterministic\nreps: 2\n"
                                      "sweep: {T_grid: [10, 20], policies: [{label: ucb, policy: {name: ucb}}]}\n");
  REQUIRE(rpb_cli({"--config", cfg.string(), "--out", flat.string(), "sweep"}) == 0);
  CHECK(slurp(flat / "sweep.csv") == "policy,T,regret_mean,ci\nucb,10,0,0\nucb,20,0,0\n");
}

TEST_CASE("flags and environment override the config") {
  const json doc = json::parse(R"({"seed": 1, "reps": 10, "threads": 0})");
  cli::GlobalOptions flags;
  flags.seed = 9;
  flags.reps = 20;
  ::setenv("RPB_THREADS", "3", 1);
  const auto cfg = cli::parse_config(doc, flags);
  CHECK(cfg.seed == 9);
  CHECK(cfg.reps == 20);
  CHECK(cfg.threads == 3);
  flags.threads = 5;
  CHECK(cli::parse_config(doc, flags).threads == 5);
  ::unsetenv("RPB_THREADS");
}
