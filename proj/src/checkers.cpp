#include "rpb/checkers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

namespace rpb {

namespace {

constexpr std::array<std::pair<CertificateKind, const char*>, 12> kKindNames{{
    {CertificateKind::TRPViolation, "TRPViolation"},
    {CertificateKind::TRPHolds, "TRPHolds"},
    {CertificateKind::PIHolds, "PIHolds"},
    {CertificateKind::PIViolation, "PIViolation"},
    {CertificateKind::BestResponseDeviation, "BestResponseDeviation"},
    {CertificateKind::NoDeviationFound, "NoDeviationFound"},
    {CertificateKind::BoundSatisfied, "BoundSatisfied"},
    {CertificateKind::BoundViolated, "BoundViolated"},
    {CertificateKind::ScalingReport, "ScalingReport"},
    {CertificateKind::ClosedFormMatch, "ClosedFormMatch"},
    {CertificateKind::ClosedFormMismatch, "ClosedFormMismatch"},
    {CertificateKind::NoneFound, "NoneFound"},
}};

// Tolerance for comparing sums of doubles that are equal in exact arithmetic.
double exact_tol(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

// Claim "value <= bound" judged with a 3-sigma band.
Outcome judge_upper(double value, double se, double bound) {
  if (value <= bound) return Outcome::Holds;
  if (value - kSigmaMargin * se <= bound) return Outcome::Inconclusive;
  return Outcome::Violated;
}

// Folds per-item outcomes: any violation wins, then any inconclusive.
Outcome fold(Outcome acc, Outcome next) {
  if (acc == Outcome::Violated || next == Outcome::Violated) return Outcome::Violated;
  if (acc == Outcome::Inconclusive || next == Outcome::Inconclusive) return Outcome::Inconclusive;
  return Outcome::Holds;
}

json estimate_json(const EstimateCI& e) {
  return json{{"mean", e.mean}, {"std_error", e.std_error}, {"ci95", e.half_width_95}, {"reps", e.reps}};
}

// Smallest positive difference between distinct values.
double min_positive_gap(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[i - 1]) gap = std::min(gap, values[i] - values[i - 1]);
  return gap;
}

}  // namespace

std::string to_string(CertificateKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

CertificateKind certificate_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n) return k;
  throw ConfigError("unknown certificate kind '" + name + "'");
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Holds: return "holds";
    case Outcome::Violated: return "violated";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "?";
}

Outcome outcome_from_string(const std::string& name) {
  if (name == "holds") return Outcome::Holds;
  if (name == "violated") return Outcome::Violated;
  if (name == "inconclusive") return Outcome::Inconclusive;
  throw ConfigError("unknown outcome '" + name + "'");
}

void to_json(json& j, const Certificate& c) {
  j = json{{"check", c.check}, {"kind", to_string(c.kind)}, {"outcome", to_string(c.outcome)}, {"payload", c.payload}};
}

void from_json(const json& j, Certificate& c) {
  require_known_keys(j, {"check", "kind", "outcome", "payload"}, "certificate");
  c.check = j.at("check").get<std::string>();
  c.kind = certificate_kind_from_string(j.at("kind").get<std::string>());
  c.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  c.payload = j.value("payload", json::object());
}

// ---------------------------------------------------------------------------

Certificate check_trp(const PolicySpec& policy, const std::vector<double>& original_means,
                      const std::vector<ReplicationVector>& strategies, RewardModel model, std::int64_t horizon,
                      const EvalMode& mode) {
  const std::size_t l = original_means.size();
  const auto truthful = ReplicationVector::truthful(l);
  if (std::find(strategies.begin(), strategies.end(), truthful) == strategies.end())
    throw ConfigError("strategy set must contain the truthful (zero) vector");
  for (const auto& r : strategies)
    if (r.size() != l) throw ConfigError("strategy " + to_string(r) + " has the wrong length");

  Certificate cert;
  cert.check = "trp";
  cert.payload["inputs"] = {{"policy", policy}, {"means", original_means}, {"strategies", strategies},
                            {"model", model},   {"T", horizon},          {"mode", mode}};

  const auto base = rp_regret(original_means, truthful, policy, model, horizon, mode);
  json rows = json::array();
  Outcome outcome = Outcome::Holds;
  double worst = std::numeric_limits<double>::infinity();
  json worst_r;
  for (const auto& r : strategies) {
    if (r.is_truthful()) continue;
    const auto est = rp_regret(original_means, r, policy, model, horizon, mode);
    const double margin = est.value - base.value;  // >= 0 when truthful is no worse
    const double se = std::hypot(base.std_error, est.std_error);
    Outcome o;
    if (mode.is_exact())
      o = margin < -exact_tol(base.value) ? Outcome::Violated : Outcome::Holds;
    else
      o = judge_upper(-margin, se, 0.0);
    outcome = fold(outcome, o);
    json row{{"r", r}, {"rp_regret", est}, {"margin", margin}, {"outcome", to_string(o)}};
    if (!mode.is_exact()) row["margin_std_error"] = se;
    rows.push_back(row);
    if (margin < worst) {
      worst = margin;
      worst_r = r;
    }
  }
  cert.outcome = outcome;
  cert.kind = outcome == Outcome::Violated ? CertificateKind::TRPViolation : CertificateKind::TRPHolds;
  cert.payload["result"] = {{"truthful", base}, {"strategies", rows}};
  if (!rows.empty()) cert.payload["result"]["worst"] = {{"r", worst_r}, {"margin", worst}};
  return cert;
}

std::vector<PiCase> random_pi_cases(std::size_t arms, std::size_t count, std::uint64_t seed) {
  std::vector<PiCase> cases;
  for (std::size_t i = 0; i < count; ++i)
    cases.push_back({random_permutation(arms, derive_seed(seed, 2 * i)), derive_seed(seed, 2 * i + 1)});
  return cases;
}

Certificate check_permutation_invariance(const PolicySpec& policy, const BanditInstance& instance,
                                         const std::vector<PiCase>& cases, std::int64_t horizon) {
  Certificate cert;
  cert.check = "pi";
  json cases_json = json::array();
  for (const auto& c : cases) cases_json.push_back({{"sigma", c.sigma}, {"seed", c.seed}});
  json arms = json::array();
  for (const auto& arm : instance.arms())
    arms.push_back({{"mean", arm.mean}, {"model", arm.reward_model}, {"owner", arm.owner},
                    {"original", arm.original_index}, {"replica", arm.replica_ordinal}});
  cert.payload["inputs"] = {{"policy", policy}, {"arms", arms}, {"cases", cases_json}, {"T", horizon}};

  const auto base = make_run(instance, policy, horizon);
  const auto pri = Priorities::identity(instance);
  json rows = json::array();
  bool all_related = true;
  for (const auto& c : cases) {
    if (c.sigma.size() != instance.size()) throw ConfigError("permutation size differs from the instance");
    std::vector<ArmSpec> moved(instance.size());
    for (std::size_t a = 0; a < instance.size(); ++a)
      moved[static_cast<std::size_t>(c.sigma(static_cast<int>(a)))] = instance.arm(a);
    RunSpec permuted = make_run(BanditInstance(std::move(moved)), policy, horizon);
    permuted.priorities = Priorities{pri.arms.relabelled(c.sigma), pri.agents};
    const RewardTape tape(c.seed);
    const auto p1 = run_pull_counts(base, tape);
    const auto p2 = run_pull_counts(permuted, tape);
    bool related = true;
    for (std::size_t a = 0; a < p1.size(); ++a)
      related = related && p2[static_cast<std::size_t>(c.sigma(static_cast<int>(a)))] == p1[a];
    all_related = all_related && related;
    rows.push_back({{"sigma", c.sigma}, {"seed", c.seed}, {"pulls", p1}, {"permuted_pulls", p2}, {"related", related}});
  }
  cert.outcome = all_related ? Outcome::Holds : Outcome::Violated;
  cert.kind = all_related ? CertificateKind::PIHolds : CertificateKind::PIViolation;
  cert.payload["result"] = {{"cases", rows}};
  return cert;
}

// ---------------------------------------------------------------------------

namespace {

json rp_inputs_json(const MultiAgentRpSpec& spec, const EvalMode& mode) {
  json agents = json::array();
  for (const auto& a : spec.agents) agents.push_back({{"prior", a.prior}, {"l", a.num_originals}});
  json runs = json::array();
  for (const auto& run : spec.runs) runs.push_back({{"T", run.horizon}, {"policy", run.policy}});
  return json{{"agents", agents},      {"opponent_sets", spec.opponent_sets},
              {"r_max", spec.r_max},   {"runs", runs},
              {"alpha", spec.alpha},   {"model", spec.model},
              {"conditional", spec.conditional_on_opponents}, {"mode", mode}};
}

// Every combination of the non-focal agents' strategies.
std::vector<std::vector<ReplicationVector>> opponent_profiles(const MultiAgentRpSpec& spec, std::size_t focal) {
  std::vector<std::vector<ReplicationVector>> profiles{{}};
  for (std::size_t j = 0; j < spec.agents.size(); ++j) {
    std::vector<ReplicationVector> options;
    if (j == focal)
      options.push_back(ReplicationVector::truthful(static_cast<std::size_t>(spec.agents[j].num_originals)));
    else if (j < spec.opponent_sets.size() && !spec.opponent_sets[j].empty())
      options = spec.opponent_sets[j];
    else
      options.push_back(ReplicationVector::truthful(static_cast<std::size_t>(spec.agents[j].num_originals)));
    std::vector<std::vector<ReplicationVector>> next;
    for (const auto& prefix : profiles)
      for (const auto& r : options) {
        auto p = prefix;
        p.push_back(r);
        next.push_back(std::move(p));
      }
    profiles = std::move(next);
  }
  return profiles;
}

// Every realization of the non-focal agents' means (focal entry left empty).
std::vector<std::vector<std::vector<double>>> opponent_realizations(const std::vector<AgentSpec>& agents,
                                                                    std::size_t focal) {
  std::vector<std::vector<std::vector<double>>> out{std::vector<std::vector<double>>(agents.size())};
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (j == focal) continue;
    for (int a = 0; a < agents[j].num_originals; ++a) {
      std::vector<std::vector<std::vector<double>>> next;
      for (const auto& partial : out)
        for (double v : agents[j].prior.support()) {
          auto p = partial;
          p[j].push_back(v);
          next.push_back(std::move(p));
        }
      out = std::move(next);
      if (out.size() > static_cast<std::size_t>(kMaxRealizations))
        throw BudgetError("opponent realizations exceed the enumeration budget");
    }
  }
  return out;
}

}  // namespace

Certificate check_replication_proof(const MultiAgentRpSpec& spec, const EvalMode& mode) {
  if (spec.agents.empty()) throw ConfigError("no agents");
  if (spec.r_max < 0) throw ConfigError("r_max must be non-negative");
  if (spec.runs.empty()) throw ConfigError("horizon set is empty");
  for (std::size_t j = 0; j < spec.opponent_sets.size() && j < spec.agents.size(); ++j)
    for (const auto& r : spec.opponent_sets[j])
      if (r.size() != static_cast<std::size_t>(spec.agents[j].num_originals))
        throw ConfigError("opponent strategy " + to_string(r) + " has the wrong length");

  Certificate cert;
  cert.check = "rp";
  cert.payload["inputs"] = rp_inputs_json(spec, mode);

  json comparisons = json::array();
  Outcome outcome = Outcome::Holds;
  double best_gain = -std::numeric_limits<double>::infinity();
  json best;
  std::int64_t evaluated = 0;

  for (const auto& run : spec.runs) {
    for (std::size_t focal = 0; focal < spec.agents.size(); ++focal) {
      const auto strategies =
          enumerate_strategies(static_cast<std::size_t>(spec.agents[focal].num_originals), spec.r_max);
      for (const auto& profile : opponent_profiles(spec, focal)) {
        std::vector<std::vector<std::vector<double>>> conditions;
        if (spec.conditional_on_opponents && spec.agents.size() > 1)
          conditions = opponent_realizations(spec.agents, focal);
        conditions.insert(conditions.begin(), std::vector<std::vector<double>>{});  // marginal first

        for (const auto& realized : conditions) {
          const bool marginal = realized.empty();
          auto utility = [&](const ReplicationVector& r) {
            std::vector<AgentSpec> agents;
            for (std::size_t j = 0; j < spec.agents.size(); ++j)
              agents.emplace_back(spec.agents[j].prior, spec.agents[j].num_originals, j == focal ? r : profile[j]);
            ++evaluated;
            return marginal ? ex_ante_utility(agents, static_cast<int>(focal), run.policy, spec.model, run.horizon,
                                              spec.alpha, mode)
                            : ex_ante_utility_given(agents, static_cast<int>(focal), realized, run.policy, spec.model,
                                                    run.horizon, spec.alpha, mode);
          };
          const auto truthful = utility(strategies.front());
          for (std::size_t s = 1; s < strategies.size(); ++s) {
            const auto dev = utility(strategies[s]);
            const double gain = dev.value - truthful.value;
            const double se = std::hypot(dev.std_error, truthful.std_error);
            const Outcome o = mode.is_exact() ? (gain > exact_tol(truthful.value) ? Outcome::Violated : Outcome::Holds)
                                              : judge_upper(gain, se, 0.0);
            outcome = fold(outcome, o);
            json row{{"T", run.horizon},
                     {"focal", focal},
                     {"opponents", profile},
                     {"r", strategies[s]},
                     {"truthful_utility", truthful.value},
                     {"utility", dev.value},
                     {"gain", gain},
                     {"outcome", to_string(o)}};
            if (!marginal) row["opponent_means"] = realized;
            if (!mode.is_exact()) row["gain_std_error"] = se;
            if (gain > best_gain) {
              best_gain = gain;
              best = row;
            }
            comparisons.push_back(std::move(row));
          }
        }
      }
    }
  }
  cert.outcome = outcome;
  cert.kind = outcome == Outcome::Violated ? CertificateKind::BestResponseDeviation : CertificateKind::NoDeviationFound;
  cert.payload["result"] = {{"comparisons", comparisons}, {"evaluations", evaluated}};
  if (!best.is_null()) cert.payload["result"]["best"] = best;
  cert.payload["result"]["scope"] = outcome == Outcome::Violated
                                        ? "a strategy strictly beats truthful registration"
                                        : "no deviation within budget |r|_1 <= r_max at the listed horizons";
  return cert;
}

Certificate check_replication_proof(const DiscretePrior& prior, int l, int r_max,
                                    const std::vector<HorizonPolicy>& runs, double alpha, RewardModel model,
                                    const EvalMode& mode) {
  MultiAgentRpSpec spec;
  spec.agents.emplace_back(prior, l, ReplicationVector::truthful(static_cast<std::size_t>(l)));
  spec.r_max = r_max;
  spec.runs = runs;
  spec.alpha = alpha;
  spec.model = model;
  return check_replication_proof(spec, mode);
}

// ---------------------------------------------------------------------------

Certificate check_etc_pull_bound(const std::vector<double>& means, std::int64_t m, std::int64_t horizon,
                                 std::int64_t reps, std::uint64_t seed, RewardModel model, int threads) {
  const std::size_t l = means.size();
  if (l == 0) throw ConfigError("no arms");
  if (m < 1) throw ConfigError("exploration length m must be at least 1");
  if (horizon < m * static_cast<std::int64_t>(l)) throw ConfigError("horizon must be at least m * k");
  const double gap = min_positive_gap(means);
  const bool has_suboptimal = std::isfinite(gap);
  if (has_suboptimal && m < etc_theorem_m(l, gap, horizon))
    throw ConfigError("m is below (2 l / gap^2) ln(2T) = " + std::to_string(etc_theorem_m(l, gap, horizon)));

  Certificate cert;
  cert.check = "pull-bound";
  cert.payload["inputs"] = {{"means", means}, {"m", m},       {"T", horizon},
                            {"reps", reps},   {"seed", seed}, {"model", model}};

  RunSpec run = make_run(build_registered_instance(means, ReplicationVector::truthful(l), model), PolicySpec::etc(m),
                         horizon);
  const bool exact = run.instance->effectively_deterministic();
  const std::int64_t n = exact ? 1 : reps;
  if (!exact && reps < 2) throw ConfigError("at least 2 replications are required");
  std::vector<std::vector<std::int64_t>> pulls(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](std::int64_t r) {
    pulls[static_cast<std::size_t>(r)] = run_pull_counts(run, RewardTape(derive_seed(seed, static_cast<std::uint64_t>(r))));
  });

  const double best = *std::max_element(means.begin(), means.end());
  Outcome outcome = Outcome::Holds;
  json arms = json::array();
  double regret_bound = 0.0;
  std::vector<double> regrets;
  for (const auto& p : pulls) regrets.push_back(regret_from_counts(*run.instance, p));
  for (std::size_t a = 0; a < l; ++a) {
    if (!(means[a] < best)) continue;
    std::vector<double> na;
    for (const auto& p : pulls) na.push_back(static_cast<double>(p[a]));
    const auto est = summarize(na);
    const double bound = static_cast<double>(m + 1);
    const Outcome o = judge_upper(est.mean, est.std_error, bound);
    outcome = fold(outcome, o);
    const double delta = best - means[a];
    regret_bound += 2.0 * delta * static_cast<double>(l) * std::log(2.0 * static_cast<double>(horizon)) / (gap * gap) + 1.0;
    arms.push_back({{"arm", a}, {"delta", delta}, {"pulls", estimate_json(est)}, {"bound", bound}, {"outcome", to_string(o)}});
  }
  const auto reg = summarize(regrets);
  const Outcome reg_outcome = judge_upper(reg.mean, reg.std_error, regret_bound);
  outcome = fold(outcome, reg_outcome);

  cert.outcome = outcome;
  cert.kind = outcome == Outcome::Violated ? CertificateKind::BoundViolated : CertificateKind::BoundSatisfied;
  cert.payload["result"] = {{"exact", exact},
                            {"gap", has_suboptimal ? json(gap) : json(nullptr)},
                            {"arms", arms},
                            {"regret", estimate_json(reg)},
                            {"regret_bound", regret_bound},
                            {"regret_outcome", to_string(reg_outcome)}};
  return cert;
}

Certificate check_misselect_bound(double mu_star, double mu_a, std::int64_t m, std::int64_t reps, std::uint64_t seed,
                                  RewardModel model, int threads) {
  if (!(mu_star > mu_a)) throw ConfigError("the optimal mean must exceed the other mean");
  if (m < 1) throw ConfigError("exploration length m must be at least 1");

  Certificate cert;
  cert.check = "misselect";
  cert.payload["inputs"] = {{"mu_star", mu_star}, {"mu_a", mu_a}, {"m", m},
                            {"reps", reps},       {"seed", seed}, {"model", model}};

  // ETC's exploration phase over 2m rounds pulls each arm exactly m times, so
  // the per-arm reward sums are m times the empirical means.
  const std::vector<double> means{mu_star, mu_a};
  RunSpec run = make_run(build_registered_instance(means, ReplicationVector::truthful(2), model), PolicySpec::etc(m),
                         2 * m);
  const bool exact = run.instance->effectively_deterministic();
  const auto freq_stat = [](const Trajectory& traj) { return traj.reward_by_arm[1] >= traj.reward_by_arm[0] ? 1.0 : 0.0; };
  EstimateCI est;
  if (exact) {
    est.mean = freq_stat(run_episode(run, RewardTape(seed)));
    est.reps = 1;
  } else {
    if (reps < 2) throw ConfigError("at least 2 replications are required");
    est = estimate_expectation(run, freq_stat, reps, seed, threads);
  }
  const double delta = mu_star - mu_a;
  const double bound = 2.0 * std::exp(-delta * delta * static_cast<double>(m) / 2.0);
  cert.outcome = judge_upper(est.mean, est.std_error, bound);
  cert.kind = cert.outcome == Outcome::Violated ? CertificateKind::BoundViolated : CertificateKind::BoundSatisfied;
  cert.payload["result"] = {{"exact", exact}, {"frequency", estimate_json(est)}, {"bound", bound}};
  return cert;
}

// ---------------------------------------------------------------------------

PolicySpec hetc_scaling_policy(std::size_t max_arms, std::size_t agents, double gap, std::int64_t horizon) {
  const std::int64_t m = etc_theorem_m(max_arms, gap, horizon);
  const double t = static_cast<double>(horizon);
  const auto root = static_cast<std::int64_t>(std::ceil(std::sqrt(t * std::log(t))));
  const std::int64_t M = std::max<std::int64_t>(m * static_cast<std::int64_t>(max_arms), root);
  return PolicySpec::hetc(M, m, M * static_cast<std::int64_t>(agents));
}

Certificate check_hetc_regret_scaling(const ScalingSpec& spec) {
  if (spec.horizons.empty()) throw ConfigError("horizon grid is empty");
  if (spec.means.empty()) throw ConfigError("no agents");
  if (spec.reps < 2) throw ConfigError("at least 2 replications are required");
  std::size_t max_arms = 0;
  for (const auto& a : spec.means) max_arms = std::max(max_arms, a.size());

  Certificate cert;
  cert.check = "scaling";
  cert.payload["inputs"] = {{"means", spec.means}, {"model", spec.model}, {"gap", spec.gap},
                            {"T_grid", spec.horizons}, {"reps", spec.reps}, {"seed", spec.seed},
                            {"slack", spec.slack}};

  std::vector<ReplicationVector> truthful;
  for (const auto& a : spec.means) truthful.push_back(ReplicationVector::truthful(a.size()));
  const auto instance = build_multi_agent_instance(spec.means, truthful, spec.model);

  json rows = json::array();
  double rho_min = std::numeric_limits<double>::infinity(), rho_max = 0.0;
  double prev_rate = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  for (std::size_t i = 0; i < spec.horizons.size(); ++i) {
    const std::int64_t T = spec.horizons[i];
    const auto policy = hetc_scaling_policy(max_arms, spec.means.size(), spec.gap, T);
    const auto est = estimate_expectation(make_run(instance, policy, T), expost_regret, spec.reps,
                                          derive_seed(spec.seed, i), spec.threads);
    const double t = static_cast<double>(T);
    const double rho = est.mean / std::sqrt(t * std::log(t));
    const double rate = est.mean / t;
    rho_min = std::min(rho_min, rho);
    rho_max = std::max(rho_max, rho);
    decreasing = decreasing && rate < prev_rate;
    prev_rate = rate;
    rows.push_back({{"T", T}, {"policy", policy}, {"regret", estimate_json(est)}, {"rho", rho}, {"regret_per_round", rate}});
  }
  const double spread = rho_min > 0.0 ? rho_max / rho_min : std::numeric_limits<double>::infinity();
  const bool bounded = rho_max == 0.0 || spread <= spec.slack;
  cert.kind = CertificateKind::ScalingReport;
  cert.outcome = bounded && decreasing ? Outcome::Holds : Outcome::Violated;
  cert.payload["result"] = {{"rows", rows},
                            {"rho_spread", rho_max == 0.0 ? json(1.0) : json(spread)},
                            {"rho_bounded", bounded},
                            {"regret_per_round_decreasing", decreasing}};
  return cert;
}

// ---------------------------------------------------------------------------

namespace {

EpsSchedule at_horizon(EpsSchedule s, std::int64_t horizon) {
  s.horizon = horizon;
  return s;
}

// sum_{t=k+1}^T eps_t: the expected number of exploration rounds.
double expected_exploration_rounds(const EpsSchedule& schedule, std::size_t k, std::int64_t horizon) {
  double total = 0.0;
  for (std::int64_t t = static_cast<std::int64_t>(k) + 1; t <= horizon; ++t) total += schedule.epsilon(t, k);
  return total;
}

}  // namespace

double eps_greedy_closed_form(const std::vector<double>& means, const EpsSchedule& schedule, std::int64_t horizon) {
  if (means.empty()) throw ConfigError("no arms");
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  for (double v : means)
    if (v != *lo && v != *hi) throw DomainError("closed form needs a two-valued instance");
  const std::size_t k = means.size();
  if (horizon < static_cast<std::int64_t>(k)) throw ConfigError("horizon must be at least the number of arms");
  const double delta = *hi - *lo;
  if (delta == 0.0) return 0.0;
  const auto low = static_cast<double>(std::count(means.begin(), means.end(), *lo));
  const auto s = at_horizon(schedule, horizon);
  return delta * low + delta * (low / static_cast<double>(k)) * expected_exploration_rounds(s, k, horizon);
}

Certificate check_eps_greedy_closed_form(double mu1, double mu2, const EpsSchedule& schedule, std::int64_t horizon,
                                         std::int64_t reps, std::uint64_t seed, RewardModel model, int threads) {
  if (!(mu1 > mu2)) throw ConfigError("mu1 must exceed mu2");
  if (reps < 2) throw ConfigError("at least 2 replications are required");
  const auto s = at_horizon(schedule, horizon);
  s.validate();

  Certificate cert;
  cert.check = "eps-closed-form";
  cert.payload["inputs"] = {{"mu1", mu1},   {"mu2", mu2},   {"schedule", s},    {"T", horizon},
                            {"reps", reps}, {"seed", seed}, {"model", model}};

  const std::vector<std::vector<double>> instances{{mu1, mu2}, {mu1, mu2, mu1}, {mu1, mu2, mu2}};
  const char* names[] = {"A", "B", "C"};
  Outcome outcome = Outcome::Holds;
  json rows = json::array();
  std::vector<double> closed;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto inst = build_registered_instance(instances[i], ReplicationVector::truthful(instances[i].size()), model);
    if (!inst.effectively_deterministic()) throw DomainError("the closed form applies to deterministic arms only");
    const double cf = eps_greedy_closed_form(instances[i], s, horizon);
    PolicySpec policy = PolicySpec::eps_greedy(s);
    const auto est = estimate_expectation(make_run(std::move(inst), policy, horizon), expost_regret, reps,
                                          derive_seed(seed, i), threads);
    const double diff = std::abs(est.mean - cf);
    const Outcome o = diff <= std::max(kSigmaMargin * est.std_error, exact_tol(cf)) ? Outcome::Holds : Outcome::Violated;
    outcome = fold(outcome, o);
    closed.push_back(cf);
    rows.push_back({{"instance", names[i]}, {"means", instances[i]}, {"closed_form", cf},
                    {"simulated", estimate_json(est)}, {"outcome", to_string(o)}});
  }
  // (R_B + R_C)/2 - R_A from the closed forms and from its symbolic reduction
  // 1/2 Delta + 1/2 Delta (E[T^3_R] - E[T^2_R]).
  const double delta = mu1 - mu2;
  const double e2 = expected_exploration_rounds(s, 2, horizon);
  const double e3 = expected_exploration_rounds(s, 3, horizon);
  const double numeric_gap = (closed[1] + closed[2]) / 2.0 - closed[0];
  const double symbolic_gap = 0.5 * delta + 0.5 * delta * (e3 - e2);
  const bool inequality = symbolic_gap >= 0.0 && numeric_gap >= -exact_tol(symbolic_gap) &&
                          std::abs(numeric_gap - symbolic_gap) <= exact_tol(symbolic_gap);
  if (!inequality) outcome = Outcome::Violated;

  cert.outcome = outcome;
  cert.kind = outcome == Outcome::Holds ? CertificateKind::ClosedFormMatch : CertificateKind::ClosedFormMismatch;
  cert.payload["result"] = {{"instances", rows},
                            {"expected_exploration", {{"k2", e2}, {"k3", e3}}},
                            {"replication_gap", numeric_gap},
                            {"replication_gap_symbolic", symbolic_gap},
                            {"replication_inequality", inequality}};
  return cert;
}

}  // namespace rpb
