#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "rpb/cli.hpp"
#include "rpb/counterexamples.hpp"
#include "rpb/engine.hpp"
#include "rpb/metrics.hpp"

namespace rpb::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}

json section(const json& parent, const std::string& name, const std::string& where) {
  if (!parent.contains(name)) return json::object();
  const auto& s = parent.at(name);
  if (!s.is_object()) throw ConfigError(where + "." + name + ": expected an object");
  return s;
}

// Horizon-dependent policy parameters that have an obvious default.
PolicySpec at_horizon(PolicySpec p, std::int64_t horizon) {
  if (p.kind == PolicyKind::EpsGreedy && p.eps.mode == EpsDenominator::OverT) p.eps.horizon = horizon;
  return p;
}

const PolicySpec& require_policy(const ExperimentConfig& cfg) {
  if (!cfg.policy) throw ConfigError("config: missing key 'policy'");
  return *cfg.policy;
}

std::int64_t require_horizon(const json& s, const ExperimentConfig& cfg, const std::string& where) {
  if (s.contains("T")) return field<std::int64_t>(s, "T", where);
  if (cfg.horizon) return *cfg.horizon;
  throw ConfigError(where + ": missing key 'T'");
}

double min_positive_gap(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[i - 1]) gap = std::min(gap, values[i] - values[i - 1]);
  if (!std::isfinite(gap)) throw ConfigError("gap: the values are all equal; give 'gap' explicitly");
  return gap;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "t,agent,arm,reward,cum_regret\n";
  const auto cum = cumulative_regret(traj);
  for (std::size_t i = 0; i < traj.rounds.size(); ++i) {
    const auto& r = traj.rounds[i];
    out << r.t << ',' << r.agent << ',' << r.arm << ',' << format_number(r.reward) << ',' << format_number(cum[i])
        << '\n';
  }
  return out.str();
}

json trajectory_json(const Trajectory& traj) {
  json rows = json::array();
  const auto cum = cumulative_regret(traj);
  for (std::size_t i = 0; i < traj.rounds.size(); ++i) {
    const auto& r = traj.rounds[i];
    rows.push_back({{"t", r.t}, {"agent", r.agent}, {"arm", r.arm}, {"reward", r.reward}, {"cum_regret", cum[i]}});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// check sections

Certificate check_trp_from(const json& s, const ExperimentConfig& cfg) {
  const std::string where = "check.trp";
  require_known_keys(s, {"means", "strategies", "r_max", "T", "theorem_m", "gap", "T_multiple"}, where);
  const auto means = field<std::vector<double>>(s, "means", where);
  const std::size_t l = means.size();
  const auto strategies = s.contains("strategies")
                              ? field<std::vector<ReplicationVector>>(s, "strategies", where)
                              : enumerate_strategies(l, field_or<int>(s, "r_max", 3, where));
  PolicySpec policy;
  std::int64_t T = 0;
  if (field_or<bool>(s, "theorem_m", false, where)) {
    const double gap = s.contains("gap") ? field<double>(s, "gap", where) : min_positive_gap(means);
    std::int64_t m = 0;
    if (s.contains("T_multiple")) {
      const auto mult = field<std::int64_t>(s, "T_multiple", where);
      m = smallest_consistent_m(l, gap, [&](std::int64_t mm) { return mult * mm * static_cast<std::int64_t>(l); });
      T = mult * m * static_cast<std::int64_t>(l);
    } else {
      T = require_horizon(s, cfg, where);
      m = etc_theorem_m(l, gap, T);
    }
    policy = PolicySpec::etc(m);
  } else {
    policy = require_policy(cfg);
    T = require_horizon(s, cfg, where);
  }
  return check_trp(at_horizon(policy, T), means, strategies, cfg.reward_model, T, cfg.mode);
}

Certificate check_pi_from(const json& s, const ExperimentConfig& cfg) {
  const std::string where = "check.pi";
  require_known_keys(s, {"means", "replication", "cases", "identity_only", "T"}, where);
  auto means = s.contains("means") ? field<std::vector<std::vector<double>>>(s, "means", where) : cfg.means;
  if (means.empty()) throw ConfigError(where + ": missing key 'means'");
  std::vector<ReplicationVector> replication;
  if (s.contains("replication"))
    replication = field<std::vector<ReplicationVector>>(s, "replication", where);
  else if (!s.contains("means") && !cfg.replication.empty())
    replication = cfg.replication;
  else
    for (const auto& m : means) replication.push_back(ReplicationVector::truthful(m.size()));
  const auto instance = build_multi_agent_instance(means, replication, cfg.reward_model);
  const std::int64_t T = s.contains("T") ? field<std::int64_t>(s, "T", where) : cfg.horizon.value_or(200);
  std::vector<PiCase> cases;
  if (field_or<bool>(s, "identity_only", false, where))
    cases.push_back({Permutation::identity(instance.size()), cfg.seed});
  else
    cases = random_pi_cases(instance.size(), field_or<std::size_t>(s, "cases", 20, where), cfg.seed);
  return check_permutation_invariance(at_horizon(require_policy(cfg), T), instance, cases, T);
}

Certificate check_rp_from(const json& s, const ExperimentConfig& cfg) {
  const std::string where = "check.rp";
  require_known_keys(s, {"T_list", "r_max", "theorem_m", "gap", "opponent_sets", "conditional"}, where);
  if (cfg.agents.empty()) throw ConfigError(where + ": the config needs 'agents'");
  MultiAgentRpSpec spec;
  spec.agents = cfg.agents;
  spec.r_max = field_or<int>(s, "r_max", 1, where);
  spec.alpha = cfg.alpha;
  spec.model = cfg.reward_model;
  spec.conditional_on_opponents = field_or<bool>(s, "conditional", false, where);
  if (s.contains("opponent_sets"))
    spec.opponent_sets = field<std::vector<std::vector<ReplicationVector>>>(s, "opponent_sets", where);

  const PolicySpec base = require_policy(cfg);
  const bool theorem = field_or<bool>(s, "theorem_m", false, where);
  std::size_t L = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& a : spec.agents) {
    L = std::max(L, static_cast<std::size_t>(a.num_originals));
    gap = std::min(gap, a.prior.min_gap());
  }
  if (s.contains("gap")) gap = field<double>(s, "gap", where);
  const auto n = static_cast<std::int64_t>(spec.agents.size());
  const auto Ls = static_cast<std::int64_t>(L);

  // theorem parameters: ETC m = ceil(2 L ln(2T) / gap^2); H-ETC adds M = mL, tau = Mn
  auto with_theorem = [&](std::int64_t m) {
    if (base.kind == PolicyKind::Etc) return PolicySpec::etc(m);
    if (base.kind == PolicyKind::Hetc) return PolicySpec::hetc(m * Ls, m, m * Ls * n);
    throw ConfigError(where + ".theorem_m: only for etc and hetc");
  };
  if (!s.contains("T_list")) {
    if (!cfg.horizon) throw ConfigError(where + ": missing key 'T_list'");
    spec.runs.push_back({*cfg.horizon, theorem ? with_theorem(etc_theorem_m(L, gap, *cfg.horizon)) : base});
  } else {
    for (const auto& entry : s.at("T_list")) {
      if (entry.is_number_integer()) {
        const auto T = entry.get<std::int64_t>();
        spec.runs.push_back({T, at_horizon(theorem ? with_theorem(etc_theorem_m(L, gap, T)) : base, T)});
      } else if (entry.is_object()) {
        // T = a * M n + b * m L, with m chosen self-consistently (requires theorem_m)
        require_known_keys(entry, {"Mn", "mL"}, where + ".T_list[]");
        if (!theorem || base.kind != PolicyKind::Hetc)
          throw ConfigError(where + ".T_list: symbolic horizons need theorem_m with hetc");
        const auto a = field_or<std::int64_t>(entry, "Mn", 0, where);
        const auto b = field_or<std::int64_t>(entry, "mL", 0, where);
        auto horizon_of = [&](std::int64_t m) { return a * (m * Ls) * n + b * m * Ls; };
        const auto m = smallest_consistent_m(L, gap, horizon_of);
        spec.runs.push_back({horizon_of(m), with_theorem(m)});
      } else {
        throw ConfigError(where + ".T_list: entries are integers or {Mn, mL} objects");
      }
    }
  }
  return check_replication_proof(spec, cfg.mode);
}

Certificate check_pull_bound_from(const json& s, const ExperimentConfig& cfg) {
  const std::string where = "check.pull-bound";
  require_known_keys(s, {"means", "m", "T"}, where);
  const auto means = field<std::vector<double>>(s, "means", where);
  const std::int64_t T = require_horizon(s, cfg, where);
  const std::int64_t m = s.contains("m") ? field<std::int64_t>(s, "m", where)
                                         : etc_theorem_m(means.size(), min_positive_gap(means), T);
  return check_etc_pull_bound(means, m, T, cfg.reps, cfg.seed, cfg.reward_model, cfg.threads);
}

Certificate check_misselect_from(const json& s, const ExperimentConfig& cfg) {
  const std::string where = "check.misselect";
  require_known_keys(s, {"mu_star", "mu_a", "m"}, where);
  return check_misselect_bound(field<double>(s, "mu_star", where), field<double>(s, "mu_a", where),
                               field<std::int64_t>(s, "m", where), cfg.reps, cfg.seed, cfg.reward_model, cfg.threads);
}

Certificate check_scaling_from(const json& s, const ExperimentConfig& cfg) {
  const std::string where = "check.scaling";
  require_known_keys(s, {"means", "gap", "T_grid", "slack"}, where);
  ScalingSpec spec;
  spec.means = s.contains("means") ? field<std::vector<std::vector<double>>>(s, "means", where) : cfg.means;
  if (spec.means.empty()) throw ConfigError(where + ": missing key 'means'");
  spec.model = cfg.reward_model;
  spec.gap = field<double>(s, "gap", where);
  spec.horizons = s.contains("T_grid") ? field<std::vector<std::int64_t>>(s, "T_grid", where) : cfg.horizon_grid;
  if (spec.horizons.empty()) throw ConfigError(where + ": missing key 'T_grid'");
  spec.reps = cfg.reps;
  spec.seed = cfg.seed;
  spec.slack = field_or<double>(s, "slack", 4.0, where);
  spec.threads = cfg.threads;
  return check_hetc_regret_scaling(spec);
}

Certificate check_eps_from(const json& s, const ExperimentConfig& cfg) {
  const std::string where = "check.eps-closed-form";
  require_known_keys(s, {"mu1", "mu2", "T", "schedule"}, where);
  EpsSchedule schedule;
  if (s.contains("schedule"))
    schedule = s.at("schedule").get<EpsSchedule>();
  else if (cfg.policy && cfg.policy->kind == PolicyKind::EpsGreedy)
    schedule = cfg.policy->eps;
  const RewardModel model = cfg.reward_model;
  return check_eps_greedy_closed_form(field<double>(s, "mu1", where), field<double>(s, "mu2", where), schedule,
                                      require_horizon(s, cfg, where), cfg.reps, cfg.seed, model, cfg.threads);
}

const std::map<std::string, Certificate (*)(const json&, const ExperimentConfig&)> kChecks{
    {"trp", check_trp_from},           {"pi", check_pi_from},
    {"rp", check_rp_from},             {"pull-bound", check_pull_bound_from},
    {"misselect", check_misselect_from}, {"scaling", check_scaling_from},
    {"eps-closed-form", check_eps_from},
};

}  // namespace

Certificate run_check(const std::string& name, const ExperimentConfig& cfg) {
  const auto it = kChecks.find(name);
  if (it == kChecks.end()) throw ConfigError("unknown check '" + name + "'");
  if (!cfg.check.is_object()) throw ConfigError("check: expected an object");
  for (const auto& item : cfg.check.items())
    if (!kChecks.count(item.key())) throw ConfigError("check: unknown key '" + item.key() + "'");
  return it->second(section(cfg.check, name, "check"), cfg);
}

CertificateKind default_expectation(const std::string& check) {
  static const std::map<std::string, CertificateKind> defaults{
      {"trp", CertificateKind::TRPHolds},
      {"pi", CertificateKind::PIHolds},
      {"rp", CertificateKind::NoDeviationFound},
      {"pull-bound", CertificateKind::BoundSatisfied},
      {"misselect", CertificateKind::BoundSatisfied},
      {"scaling", CertificateKind::ScalingReport},
      {"eps-closed-form", CertificateKind::ClosedFormMatch},
      {"ucb-failure", CertificateKind::BestResponseDeviation},
      {"hucb-failure", CertificateKind::BestResponseDeviation},
  };
  const auto it = defaults.find(check);
  if (it == defaults.end()) throw ConfigError("unknown check '" + check + "'");
  return it->second;
}

int verdict_exit_code(const Certificate& cert, CertificateKind expected) {
  if (cert.outcome == Outcome::Inconclusive) return kExitInconclusive;
  if (cert.kind != expected) return kExitContrary;
  // a scaling report is only the expected verdict when its claim held
  if (cert.kind == CertificateKind::ScalingReport && cert.outcome != Outcome::Holds) return kExitContrary;
  return kExitExpected;
}

// ---------------------------------------------------------------------------

Certificate recheck(const Certificate& cert, int threads) {
  const json& in = cert.payload.at("inputs");
  const std::string where = "certificate.inputs";
  const auto& c = cert.check;
  if (c == "trp")
    return check_trp(field<PolicySpec>(in, "policy", where), field<std::vector<double>>(in, "means", where),
                     field<std::vector<ReplicationVector>>(in, "strategies", where), field<RewardModel>(in, "model", where),
                     field<std::int64_t>(in, "T", where), field<EvalMode>(in, "mode", where));
  if (c == "pi") {
    std::vector<ArmSpec> arms;
    for (const auto& a : in.at("arms"))
      arms.push_back({a.at("mean").get<double>(), a.at("model").get<RewardModel>(), a.at("owner").get<int>(),
                      a.at("original").get<int>(), a.at("replica").get<int>()});
    std::vector<PiCase> cases;
    for (const auto& k : in.at("cases")) cases.push_back({k.at("sigma").get<Permutation>(), k.at("seed").get<std::uint64_t>()});
    return check_permutation_invariance(field<PolicySpec>(in, "policy", where), BanditInstance(std::move(arms)), cases,
                                        field<std::int64_t>(in, "T", where));
  }
  if (c == "rp") {
    MultiAgentRpSpec spec;
    for (const auto& a : in.at("agents")) {
      const int l = a.at("l").get<int>();
      spec.agents.emplace_back(prior_from_json(a.at("prior")), l, ReplicationVector::truthful(static_cast<std::size_t>(l)));
    }
    spec.opponent_sets = field<std::vector<std::vector<ReplicationVector>>>(in, "opponent_sets", where);
    spec.r_max = field<int>(in, "r_max", where);
    for (const auto& r : in.at("runs")) spec.runs.push_back({r.at("T").get<std::int64_t>(), r.at("policy").get<PolicySpec>()});
    spec.alpha = field<double>(in, "alpha", where);
    spec.model = field<RewardModel>(in, "model", where);
    spec.conditional_on_opponents = field<bool>(in, "conditional", where);
    auto mode = field<EvalMode>(in, "mode", where);
    mode.threads = threads;
    return check_replication_proof(spec, mode);
  }
  if (c == "pull-bound")
    return check_etc_pull_bound(field<std::vector<double>>(in, "means", where), field<std::int64_t>(in, "m", where),
                                field<std::int64_t>(in, "T", where), field<std::int64_t>(in, "reps", where),
                                field<std::uint64_t>(in, "seed", where), field<RewardModel>(in, "model", where), threads);
  if (c == "misselect")
    return check_misselect_bound(field<double>(in, "mu_star", where), field<double>(in, "mu_a", where),
                                 field<std::int64_t>(in, "m", where), field<std::int64_t>(in, "reps", where),
                                 field<std::uint64_t>(in, "seed", where), field<RewardModel>(in, "model", where), threads);
  if (c == "scaling") {
    ScalingSpec spec;
    spec.means = field<std::vector<std::vector<double>>>(in, "means", where);
    spec.model = field<RewardModel>(in, "model", where);
    spec.gap = field<double>(in, "gap", where);
    spec.horizons = field<std::vector<std::int64_t>>(in, "T_grid", where);
    spec.reps = field<std::int64_t>(in, "reps", where);
    spec.seed = field<std::uint64_t>(in, "seed", where);
    spec.slack = field<double>(in, "slack", where);
    spec.threads = threads;
    return check_hetc_regret_scaling(spec);
  }
  if (c == "eps-closed-form")
    return check_eps_greedy_closed_form(field<double>(in, "mu1", where), field<double>(in, "mu2", where),
                                        field<EpsSchedule>(in, "schedule", where), field<std::int64_t>(in, "T", where),
                                        field<std::int64_t>(in, "reps", where), field<std::uint64_t>(in, "seed", where),
                                        field<RewardModel>(in, "model", where), threads);
  if (c == "ucb-failure")
    return ucb_failure_certificate(BonusConfig{field<double>(in, "c", where)}, field<double>(in, "alpha", where),
                                   field<std::int64_t>(in, "horizon_cap", where));
  if (c == "hucb-failure") {
    HucbSearchSpec spec;
    spec.high = field<double>(in, "high", where);
    spec.grid_step = field<double>(in, "grid_step", where);
    spec.horizon_cap = field<std::int64_t>(in, "horizon_cap", where);
    spec.alpha = field<double>(in, "alpha", where);
    spec.bonus.c = field<double>(in, "c", where);
    spec.threads = threads;
    return hucb_failure_search(spec);
  }
  throw ConfigError("certificate names unknown check '" + c + "'");
}

// ---------------------------------------------------------------------------

int cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.means.empty()) throw ConfigError("config: missing key 'instance'");
  if (!cfg.horizon) throw ConfigError("config: missing key 'T'");
  const auto policy = at_horizon(require_policy(cfg), *cfg.horizon);
  policy.validate();
  const auto run = make_run(build_multi_agent_instance(cfg.means, cfg.replication, cfg.reward_model), policy, *cfg.horizon);
  const auto traj = run_episode(run, RewardTape(cfg.seed));
  const auto utilities = agent_utilities(traj, cfg.alpha);

  const fs::path dir(cfg.out_dir);
  if (cfg.format == "csv")
    write_text(dir / "trajectory.csv", trajectory_csv(traj));
  else
    write_text(dir / "trajectory.json", trajectory_json(traj).dump(2) + "\n");
  json summary{{"T", *cfg.horizon},
               {"seed", cfg.seed},
               {"policy", policy},
               {"reward_model", cfg.reward_model},
               {"instance", {{"means", cfg.means}, {"replication", cfg.replication}}},
               {"regret", expost_regret(traj)},
               {"pulls", traj.pulls},
               {"alpha", cfg.alpha},
               {"utilities", utilities.per_agent},
               {"total_reward", utilities.total_reward}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  log << "run: T=" << *cfg.horizon << " regret=" << format_number(expost_regret(traj)) << '\n';
  return kExitExpected;
}

int cmd_check(const std::string& name, const ExperimentConfig& cfg, std::ostream& log) {
  const auto cert = run_check(name, cfg);
  write_text(fs::path(cfg.out_dir) / (name + ".json"), json(cert).dump(2) + "\n");
  const auto expected = cfg.expect ? certificate_kind_from_string(*cfg.expect) : default_expectation(name);
  const int code = verdict_exit_code(cert, expected);
  log << "check " << name << ": " << to_string(cert.kind) << " (" << to_string(cert.outcome) << "), expected "
      << to_string(expected) << '\n';
  return code;
}

int cmd_recheck(const std::string& certificate_path, int threads, std::ostream& log) {
  const json doc = load_structured_file(certificate_path);
  Certificate original;
  try {
    original = doc.get<Certificate>();
  } catch (const json::exception& e) {
    throw ConfigError(certificate_path + ": " + e.what());
  }
  const auto again = recheck(original, threads);
  const bool same = again.kind == original.kind && again.outcome == original.outcome && json(again) == json(original);
  log << "recheck " << original.check << ": " << (same ? "reproduced" : "differs") << '\n';
  return same ? kExitExpected : kExitContrary;
}

int cmd_counterexample(const std::string& kind, const ExperimentConfig& cfg, std::ostream& log) {
  const json& s = cfg.counterexample;
  const fs::path dir(cfg.out_dir);
  const std::string where = "counterexample";
  if (kind == "ucb") {
    require_known_keys(s, {"c", "i_max", "horizon_cap"}, where);
    const BonusConfig bonus{field_or<double>(s, "c", 1.0, where)};
    const auto schedule = ucb_run_lengths(field_or<int>(s, "i_max", 2, where), bonus);
    std::ostringstream sched;
    sched << "i,s\n";
    for (std::size_t i = 0; i < schedule.s.size(); ++i) sched << i + 1 << ',' << schedule.s[i] << '\n';
    write_text(dir / "ucb_schedule.csv", sched.str());
    Certificate cert;
    try {
      cert = ucb_failure_certificate(bonus, cfg.alpha, field_or<std::int64_t>(s, "horizon_cap", 100'000, where));
    } catch (const SearchExhausted& e) {
      json report{{"check", "ucb-failure"}, {"status", "search-exhausted"}, {"message", e.what()}, {"c", bonus.c},
                  {"schedule", schedule.s}};
      write_text(dir / "ucb.json", report.dump(2) + "\n");
      log << "counterexample ucb: " << e.what() << '\n';
      return kExitContrary;
    }
    write_text(dir / "ucb.json", json(cert).dump(2) + "\n");
    const auto T = cert.payload["result"]["T"].get<std::int64_t>();
    const std::pair<const char*, ReplicationVector> traces[] = {
        {"A", ReplicationVector({0, 0})}, {"B", ReplicationVector({1, 0})}, {"C", ReplicationVector({0, 1})}};
    for (const auto& [name, r] : traces) {
      const auto run = make_run(build_registered_instance(std::vector<double>{1.0, 0.0}, r, RewardModel::Deterministic),
                                PolicySpec::ucb(bonus.c), T);
      write_text(dir / (std::string("ucb_trace_") + name + ".csv"), trajectory_csv(run_deterministic_trace(run)));
    }
    log << "counterexample ucb: T=" << T << " regrets " << cert.payload["result"]["regret"].dump() << '\n';
    const auto expected = cfg.expect ? certificate_kind_from_string(*cfg.expect) : CertificateKind::BestResponseDeviation;
    return cert.outcome == Outcome::Holds ? verdict_exit_code(cert, expected) : kExitContrary;
  }
  if (kind == "hucb") {
    require_known_keys(s, {"high", "grid_step", "horizon_cap", "c"}, where);
    HucbSearchSpec spec;
    spec.high = field_or<double>(s, "high", 1.0, where);
    spec.grid_step = field_or<double>(s, "grid_step", 0.01, where);
    spec.horizon_cap = field_or<std::int64_t>(s, "horizon_cap", 10'000, where);
    spec.alpha = cfg.alpha;
    spec.bonus.c = field_or<double>(s, "c", 2.0, where);
    spec.threads = cfg.threads;
    const auto cert = hucb_failure_search(spec);
    write_text(dir / "hucb.json", json(cert).dump(2) + "\n");
    log << "counterexample hucb: " << to_string(cert.kind) << ' ' << cert.payload["result"].dump() << '\n';
    if (cfg.expect) return verdict_exit_code(cert, certificate_kind_from_string(*cfg.expect));
    return kExitExpected;  // NoneFound is a valid answer
  }
  throw ConfigError("unknown counterexample kind '" + kind + "' (expected ucb or hucb)");
}

namespace {

std::string svg_plot(const std::vector<std::string>& labels,
                     const std::vector<std::vector<std::pair<double, double>>>& series) {
  constexpr double W = 640, H = 420, left = 70, right = 20, top = 20, bottom = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (const auto& [x, y] : s) {
      if (x <= 0 || y <= 0) continue;
      xmin = std::min(xmin, std::log10(x));
      xmax = std::max(xmax, std::log10(x));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">log10 T</text>\n";
  out << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15," << H / 2
      << ")\" text-anchor=\"middle\">log10 regret</text>\n";
  if (std::isfinite(xmin)) {
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return left + (std::log10(x) - xmin) / (xmax - xmin) * (W - left - right); };
    auto py = [&](double y) { return H - bottom - (std::log10(y) - ymin) / (ymax - ymin) * (H - top - bottom); };
    out << "<text x=\"" << left << "\" y=\"" << H - bottom + 15 << "\">" << format_number(xmin) << "</text>\n";
    out << "<text x=\"" << W - right << "\" y=\"" << H - bottom + 15 << "\" text-anchor=\"end\">" << format_number(xmax)
        << "</text>\n";
    out << "<text x=\"" << left - 5 << "\" y=\"" << H - bottom << "\" text-anchor=\"end\">" << format_number(ymin)
        << "</text>\n";
    out << "<text x=\"" << left - 5 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << format_number(ymax)
        << "</text>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    for (std::size_t i = 0; i < series.size(); ++i) {
      const char* color = colors[i % 6];
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& [x, y] : series[i])
        if (x > 0 && y > 0) out << px(x) << ',' << py(y) << ' ';
      out << "\"/>\n";
      out << "<text x=\"" << left + 10 << "\" y=\"" << top + 15 * (i + 1) << "\" fill=\"" << color << "\">"
          << labels[i] << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  const json& s = cfg.sweep;
  const std::string where = "sweep";
  require_known_keys(s, {"policies", "T_grid", "svg"}, where);
  const auto grid = s.contains("T_grid") ? field<std::vector<std::int64_t>>(s, "T_grid", where) : cfg.horizon_grid;
  if (grid.empty()) throw ConfigError(where + ": the T grid is empty");
  if (cfg.means.empty()) throw ConfigError("config: missing key 'instance'");
  if (cfg.reps < 2) throw ConfigError("reps: a sweep needs at least 2 replications");
  const auto instance = build_multi_agent_instance(cfg.means, cfg.replication, cfg.reward_model);

  // entries: {"policy": {...}, "label": "..", "hetc_gap": g} or a bare policy object
  struct Entry {
    std::string label;
    std::optional<PolicySpec> policy;
    double hetc_gap = 0.0;
  };
  std::vector<Entry> entries;
  if (s.contains("policies")) {
    for (const auto& p : s.at("policies")) {
      Entry e;
      if (p.contains("policy") || p.contains("hetc_gap")) {
        require_known_keys(p, {"policy", "label", "hetc_gap"}, where + ".policies[]");
        if (p.contains("policy")) e.policy = p.at("policy").get<PolicySpec>();
        e.hetc_gap = field_or<double>(p, "hetc_gap", 0.0, where);
        e.label = field_or<std::string>(p, "label", "", where);
      } else {
        e.policy = p.get<PolicySpec>();
      }
      if (!e.policy && e.hetc_gap <= 0.0) throw ConfigError(where + ".policies[]: needs 'policy' or 'hetc_gap'");
      if (e.label.empty()) e.label = e.policy ? to_string(e.policy->kind) : "hetc";
      entries.push_back(std::move(e));
    }
  } else {
    entries.push_back({to_string(require_policy(cfg).kind), require_policy(cfg), 0.0});
  }
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (entries[i].label == entries[j].label) entries[i].label += "#" + std::to_string(i);

  std::ostringstream csv;
  csv << "policy,T,regret_mean,ci\n";
  json rows = json::array();
  std::vector<std::vector<std::pair<double, double>>> series(entries.size());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::int64_t T = grid[i];
      const PolicySpec policy = entries[e].policy
                                    ? at_horizon(*entries[e].policy, T)
                                    : hetc_scaling_policy(static_cast<std::size_t>(instance.max_originals_per_agent()),
                                                          static_cast<std::size_t>(instance.num_agents()),
                                                          entries[e].hetc_gap, T);
      // the same seed per horizon for every policy: the runs are coupled
      const auto est = estimate_expectation(make_run(instance, policy, T), expost_regret, cfg.reps,
                                            derive_seed(cfg.seed, i), cfg.threads);
      csv << entries[e].label << ',' << T << ',' << format_number(est.mean) << ',' << format_number(est.half_width_95)
          << '\n';
      rows.push_back({{"policy", entries[e].label}, {"T", T}, {"regret_mean", est.mean}, {"ci", est.half_width_95}});
      series[e].emplace_back(static_cast<double>(T), est.mean);
    }
  }
  const fs::path dir(cfg.out_dir);
  if (cfg.format == "csv")
    write_text(dir / "sweep.csv", csv.str());
  else
    write_text(dir / "sweep.json", rows.dump(2) + "\n");
  if (field_or<bool>(s, "svg", true, where)) {
    std::vector<std::string> labels;
    for (const auto& e : entries) labels.push_back(e.label);
    write_text(dir / "sweep.svg", svg_plot(labels, series));
  }
  log << "sweep: " << entries.size() << " policies x " << grid.size() << " horizons\n";
  return kExitExpected;
}

// ---------------------------------------------------------------------------

int run_cli(int argc, char** argv) {
  CLI::App app{"Replication-proof bandit laboratory"};
  app.require_subcommand(1);
  GlobalOptions flags;
  std::string config_path, out, format;
  std::uint64_t seed = 0;
  std::int64_t reps = 0;
  int threads = 0;
  auto* o_config = app.add_option("--config", config_path, "experiment file (YAML or JSON)");
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_reps = app.add_option("--reps", reps, "Monte-Carlo replications");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_format = app.add_option("--format", format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));
  auto* o_threads = app.add_option("--threads", threads, "worker threads (env RPB_THREADS)");
  app.fallthrough();

  auto* run = app.add_subcommand("run", "simulate one episode");
  auto* check = app.add_subcommand("check", "run a checker and emit its certificate");
  std::string check_name, certificate;
  check->add_option("name", check_name, "trp|pi|rp|pull-bound|misselect|scaling|eps-closed-form");
  check->add_option("--certificate", certificate, "re-verify a saved certificate instead");
  auto* cx = app.add_subcommand("counterexample", "construct a failure certificate");
  std::string cx_kind;
  cx->add_option("kind", cx_kind, "ucb|hucb")->required();
  auto* sweep = app.add_subcommand("sweep", "regret over a horizon grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitExpected : kExitConfigError;
  }

  try {
    if (*o_config) flags.config = config_path;
    if (*o_seed) flags.seed = seed;
    if (*o_reps) flags.reps = reps;
    if (*o_out) flags.out = out;
    if (*o_format) flags.format = format;
    if (*o_threads) flags.threads = threads;

    if (check->parsed() && !certificate.empty())
      return cmd_recheck(certificate, flags.threads.value_or(0), std::cout);

    const json doc = flags.config ? load_structured_file(*flags.config) : json::object();
    const auto cfg = parse_config(doc, flags);
    if (run->parsed()) return cmd_run(cfg, std::cout);
    if (check->parsed()) {
      if (check_name.empty()) throw ConfigError("check: give a check name or --certificate");
      return cmd_check(check_name, cfg, std::cout);
    }
    if (cx->parsed()) return cmd_counterexample(cx_kind, cfg, std::cout);
    if (sweep->parsed()) return cmd_sweep(cfg, std::cout);
  } catch (const SearchExhausted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitContrary;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const BudgetError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace rpb::cli
