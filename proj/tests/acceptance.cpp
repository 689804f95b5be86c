// One line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rpb/checkers.hpp"
#include "rpb/cli.hpp"
#include "rpb/counterexamples.hpp"

using namespace rpb;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::vector<Certificate> produced;  // re-verified by the last criterion

Certificate keep(Certificate c) {
  produced.push_back(c);
  return c;
}

std::string fmt(double x) { return format_number(x); }

Verdict ucb_triple() {
  const auto s = ucb_run_lengths(2, {1.0});
  const std::int64_t T = s.at(1) + s.at(2) + 2;
  const auto r = ucb_regret_triple({1.0}, T);
  const bool pass = r.a == 2 && r.b == 1 && r.c == 2 && r.violates();
  return {pass, "c=1: s2=" + std::to_string(s.at(2)) + " T=" + std::to_string(T) + " Reg A,B,C = " + fmt(r.a) + "," +
                    fmt(r.b) + "," + fmt(r.c) + " (need 2,1,2 and A > (B+C)/2)"};
}

Verdict ucb_gain() {
  const auto s = ucb_run_lengths(2, {1.0});
  const std::int64_t T = s.at(1) + s.at(2) + 2;
  const double alpha = 0.4;
  const double gain = ucb_replication_gain({1.0}, T, alpha);
  return {std::abs(gain - 0.25 * alpha) <= 1e-12,
          "c=1 T=" + std::to_string(T) + ": ex-ante gain of r=(1,0) is " + fmt(gain) + " (need " + fmt(0.25 * alpha) + ")"};
}

Verdict etc_trp() {
  const std::vector<std::vector<double>> families{{1.0, 0.0}, {0.9, 0.5, 0.1}, {0.8, 0.8, 0.2}};
  std::string detail;
  bool pass = true;
  for (const auto& mu : families) {
    const std::size_t l = mu.size();
    double gap = 1.0;
    for (double a : mu)
      for (double b : mu)
        if (a > b) gap = std::min(gap, a - b);
    const auto m = smallest_consistent_m(l, gap, [&](std::int64_t m) { return 4 * m * std::int64_t(l); });
    const std::int64_t T = 4 * m * std::int64_t(l);
    const auto cert = keep(check_trp(PolicySpec::etc(m), mu, enumerate_strategies(l, 3), RewardModel::Deterministic, T,
                                     EvalMode::exact()));
    pass = pass && cert.kind == CertificateKind::TRPHolds;
    detail += "m=" + std::to_string(m) + ",T=" + std::to_string(T) + ":" + to_string(cert.kind) +
              "(min margin " + fmt(cert.payload["result"]["worst"]["margin"].get<double>()) + ") ";
  }
  return {pass, detail};
}

Verdict pull_bound() {
  const std::int64_t T = 2000, m = etc_theorem_m(2, 0.6, T);
  const auto cert = keep(check_etc_pull_bound({0.9, 0.3}, m, T, 5000, 4));
  const auto& r = cert.payload["result"];
  return {cert.outcome != Outcome::Violated,
          "m=" + std::to_string(m) + " E[n_2]=" + fmt(r["arms"][0]["pulls"]["mean"].get<double>()) + " (bound " +
              fmt(r["arms"][0]["bound"].get<double>()) + "), regret " + fmt(r["regret"]["mean"].get<double>()) +
              " (bound " + fmt(r["regret_bound"].get<double>()) + "), " + to_string(cert.outcome)};
}

Verdict misselect() {
  const auto cert = keep(check_misselect_bound(0.75, 0.25, 40, 100000, 5));
  const auto& r = cert.payload["result"];
  return {cert.outcome != Outcome::Violated, "frequency " + fmt(r["frequency"]["mean"].get<double>()) + " +- " +
                                                 fmt(r["frequency"]["std_error"].get<double>()) + " vs bound " +
                                                 fmt(r["bound"].get<double>()) + ", " + to_string(cert.outcome)};
}

Verdict hetc_rp() {
  const json doc = json::parse(R"({
    "policy": {"name": "hetc"},
    "agents": [{"prior": {"support": [0, 1]}, "l": 2}, {"prior": {"support": [0, 1]}, "l": 2}],
    "reward_model": "bernoulli",
    "mode": "exact",
    "check": {"rp": {"theorem_m": true, "r_max": 2,
                     "T_list": [{"Mn": 1, "mL": 4}, {"Mn": 2}],
                     "opponent_sets": [[[0, 0], [2, 0]], [[0, 0], [2, 0]]]}}
  })");
  const auto cfg = cli::parse_config(doc, {});
  const auto cert = keep(cli::run_check("rp", cfg));
  std::string horizons;
  for (const auto& run : cert.payload["inputs"]["runs"])
    horizons += std::to_string(run["T"].get<std::int64_t>()) + "(m=" + std::to_string(run["policy"]["m"].get<std::int64_t>()) + ") ";
  return {cert.kind == CertificateKind::NoDeviationFound,
          "T=" + horizons + std::to_string(cert.payload["result"]["evaluations"].get<std::int64_t>()) +
              " utility evaluations: " + to_string(cert.kind)};
}

Verdict scaling() {
  ScalingSpec spec;
  spec.means = {{0.75, 0.25}, {0.25, 0.25}};
  spec.model = RewardModel::Bernoulli;
  spec.gap = 0.5;
  for (int e = 12; e <= 16; ++e) spec.horizons.push_back(std::int64_t{1} << e);
  spec.reps = 500;
  spec.seed = 7;
  const auto cert = keep(check_hetc_regret_scaling(spec));
  std::string rho;
  for (const auto& row : cert.payload["result"]["rows"]) rho += fmt(row["rho"].get<double>()) + " ";
  return {cert.outcome == Outcome::Holds, "rho = " + rho + "spread " + fmt(cert.payload["result"]["rho_spread"].get<double>()) +
                                              ", Reg/T decreasing: " +
                                              (cert.payload["result"]["regret_per_round_decreasing"].get<bool>() ? "yes" : "no")};
}

Verdict eps_closed_form() {
  const auto cert = keep(check_eps_greedy_closed_form(1.0, 0.0, {EpsDenominator::OverT, 11.0, 0.9, 0}, 1000, 10000, 8));
  std::string detail;
  for (const auto& row : cert.payload["result"]["instances"])
    detail += row["instance"].get<std::string>() + ": " + fmt(row["simulated"]["mean"].get<double>()) + " vs " +
              fmt(row["closed_form"].get<double>()) + "; ";
  detail += "(R_B+R_C)/2 - R_A = " + fmt(cert.payload["result"]["replication_gap"].get<double>());
  return {cert.kind == CertificateKind::ClosedFormMatch, detail};
}

Verdict permutation_invariance() {
  const std::vector<std::pair<std::string, PolicySpec>> flat{
      {"ucb", PolicySpec::ucb(2.0)},
      {"etc", PolicySpec::etc(10)},
      {"eps-greedy", PolicySpec::eps_greedy({EpsDenominator::OverRound, 11.0, 0.9, 0})}};
  std::vector<std::pair<std::string, BanditInstance>> single{
      {"det", build_registered_instance(std::vector<double>{0.9, 0.4, 0.4}, ReplicationVector({1, 0, 1}), RewardModel::Deterministic)},
      {"bern", build_registered_instance(std::vector<double>{0.7, 0.2, 0.5}, ReplicationVector({1, 0, 0}), RewardModel::Bernoulli)}};
  std::vector<std::pair<std::string, BanditInstance>> multi{
      {"det", build_multi_agent_instance({{0.9, 0.4}, {0.6, 0.6}}, {ReplicationVector({0, 1}), ReplicationVector({0, 0})},
                                         RewardModel::Deterministic)},
      {"bern", build_multi_agent_instance({{0.7, 0.2}, {0.5, 0.4}}, {ReplicationVector({1, 0}), ReplicationVector({0, 0})},
                                          RewardModel::Bernoulli)}};
  bool pass = true;
  std::string detail;
  std::uint64_t seed = 100;
  auto run = [&](const std::string& name, const PolicySpec& p, const std::vector<std::pair<std::string, BanditInstance>>& insts) {
    for (const auto& [label, inst] : insts) {
      const auto cert = keep(check_permutation_invariance(p, inst, random_pi_cases(inst.size(), 20, seed++), 1000));
      pass = pass && cert.kind == CertificateKind::PIHolds;
      detail += name + "/" + label + ":" + (cert.kind == CertificateKind::PIHolds ? "ok " : "VIOLATED ");
    }
  };
  for (const auto& [name, p] : flat) run(name, p, single);
  run("hetc", PolicySpec::hetc(30, 10, 60), multi);
  return {pass, detail};
}

Verdict certificates_reverify() {
  std::size_t ok = 0;
  for (const auto& c : produced) {
    const auto again = cli::recheck(json(c).get<Certificate>());
    if (json(again) == json(c)) ++ok;
  }
  return {ok == produced.size(),
          "no full-scale regret magnitudes to reproduce; " + std::to_string(ok) + "/" + std::to_string(produced.size()) +
              " certificates from criteria 3-9 re-verified from their recorded inputs"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "ucb single-agent failure", 1, ucb_triple},
      {2, "ucb not replication-proof", 1, ucb_gain},
      {3, "etc truthful under random permutation", 10, etc_trp},
      {4, "etc pull bound", 60, pull_bound},
      {5, "misselection bound", 30, misselect},
      {6, "h-etc replication-proof", 60, hetc_rp},
      {7, "h-etc regret scaling", 600, scaling},
      {8, "eps-greedy closed form", 60, eps_closed_form},
      {9, "permutation equivariance", 60, permutation_invariance},
      {10, "certificate-based acceptance", 600, certificates_reverify},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = v.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] criterion %2d  %-38s %6.2fs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                v.detail.c_str(), in_time ? "" : " (over time limit)");
    std::fflush(stdout);
    if (c.id == 2) {
      // the same construction with a larger bonus does produce the deviation
      const auto cert = ucb_failure_certificate({2.0}, 0.4, 1000);
      const auto& r = cert.payload["result"];
      std::printf("[INFO] ucb with c=2: T=%s Reg A,B,C = %s,%s,%s, ex-ante gain %s = %s * alpha\n",
                  std::to_string(r["T"].get<std::int64_t>()).c_str(), fmt(r["regret"]["A"].get<double>()).c_str(),
                  fmt(r["regret"]["B"].get<double>()).c_str(), fmt(r["regret"]["C"].get<double>()).c_str(),
                  fmt(r["ex_ante_gain"].get<double>()).c_str(), fmt(r["ex_ante_gain_per_alpha"].get<double>()).c_str());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures;
}
