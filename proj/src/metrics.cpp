#include "rpb/metrics.hpp"

#include <cmath>
#include <numeric>
#include <optional>

namespace rpb {

double regret_from_counts(const BanditInstance& instance, std::span<const std::int64_t> pulls) {
  if (pulls.size() != instance.size()) throw ConfigError("pull counts differ in length from the instance");
  const double best = instance.benchmark_mean();
  double regret = 0.0;
  for (std::size_t a = 0; a < pulls.size(); ++a)
    regret += static_cast<double>(pulls[a]) * (best - instance.arm(a).mean);
  return regret;
}

double expost_regret(const Trajectory& traj) { return regret_from_counts(*traj.instance, traj.pulls); }

std::vector<double> cumulative_regret(const Trajectory& traj) {
  const double best = traj.instance->benchmark_mean();
  std::vector<double> out;
  out.reserve(traj.rounds.size());
  double acc = 0.0;
  for (const auto& round : traj.rounds) {
    acc += best - traj.instance->arm(static_cast<std::size_t>(round.arm)).mean;
    out.push_back(acc);
  }
  return out;
}

std::vector<double> cumulative_agent_reward(const Trajectory& traj, int agent) {
  std::vector<double> out;
  out.reserve(traj.rounds.size());
  double acc = 0.0;
  for (const auto& round : traj.rounds) {
    if (round.agent == agent) acc += round.reward;
    out.push_back(acc);
  }
  return out;
}

UtilityReport agent_utilities(const Trajectory& traj, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  UtilityReport report;
  report.per_agent.assign(static_cast<std::size_t>(traj.instance->num_agents()), 0.0);
  report.horizon = traj.horizon;
  report.alpha = alpha;
  for (std::size_t a = 0; a < traj.reward_by_arm.size(); ++a) {
    report.per_agent[static_cast<std::size_t>(traj.instance->arm(a).owner)] += traj.reward_by_arm[a];
    report.total_reward += traj.reward_by_arm[a];
  }
  for (auto& u : report.per_agent) u *= alpha;
  return report;
}

EvalMode EvalMode::monte_carlo(std::int64_t reps, std::uint64_t seed, int threads) {
  EvalMode mode;
  mode.kind = Kind::MonteCarlo;
  mode.reps = reps;
  mode.seed = seed;
  mode.threads = threads;
  return mode;
}

namespace {

void require_exact_eligible(const BanditInstance& inst, const PolicySpec& policy) {
  if (!inst.effectively_deterministic())
    throw DomainError("exact evaluation needs deterministic arms (or Bernoulli arms with mean 0 or 1)");
  if (policy.randomized()) throw DomainError("exact evaluation needs a policy without internal randomness");
}

}  // namespace

ValueEstimate rp_regret(std::span<const double> original_means, const ReplicationVector& r,
                        const PolicySpec& policy, RewardModel model, std::int64_t horizon,
                        const EvalMode& mode) {
  const std::size_t l = original_means.size();
  if (r.size() != l) throw ConfigError("means and replication vector differ in length");

  std::vector<Permutation> perms;
  const bool sampled = mode.permutation_samples > 0;
  if (sampled) {
    if (mode.is_exact()) throw ConfigError("sampled permutations are only available in Monte-Carlo mode");
    for (std::int64_t s = 0; s < mode.permutation_samples; ++s)
      perms.push_back(random_permutation(l, derive_seed(mode.seed ^ 0xa5a5a5a5ULL, static_cast<std::uint64_t>(s))));
  } else {
    perms = enumerate_permutations(l);
  }

  ValueEstimate out;
  out.exact = mode.is_exact();
  out.instances = static_cast<std::int64_t>(perms.size());
  std::vector<double> per_perm(perms.size(), 0.0);
  double var_sum = 0.0;
  for (std::size_t p = 0; p < perms.size(); ++p) {
    std::vector<int> counts(l);
    for (std::size_t a = 0; a < l; ++a) counts[a] = r[static_cast<std::size_t>(perms[p](static_cast<int>(a)))];
    RunSpec run = make_run(build_registered_instance(original_means, ReplicationVector(counts), model), policy, horizon);
    if (mode.is_exact()) {
      require_exact_eligible(*run.instance, policy);
      per_perm[p] = regret_from_counts(*run.instance, run_pull_counts(run, RewardTape(0)));
    } else {
      const auto est = estimate_expectation(run, expost_regret, mode.reps, derive_seed(mode.seed, p), mode.threads);
      per_perm[p] = est.mean;
      var_sum += est.std_error * est.std_error;
    }
  }
  out.value = std::accumulate(per_perm.begin(), per_perm.end(), 0.0) / static_cast<double>(perms.size());
  if (!mode.is_exact()) {
    out.std_error = sampled ? summarize(per_perm).std_error
                            : std::sqrt(var_sum) / static_cast<double>(perms.size());
  }
  return out;
}

std::int64_t realization_count(const std::vector<AgentSpec>& agents) {
  std::int64_t count = 1;
  for (const auto& agent : agents)
    for (int a = 0; a < agent.num_originals; ++a) {
      count *= static_cast<std::int64_t>(agent.prior.size());
      if (count > kMaxRealizations) return count;
    }
  return count;
}

namespace {

// `fixed[i]`, when set, pins agent i's realized means instead of drawing them from its prior.
ValueEstimate ex_ante_impl(const std::vector<AgentSpec>& agents, int focal,
                           const std::vector<std::optional<std::vector<double>>>& fixed, const PolicySpec& policy,
                           RewardModel model, std::int64_t horizon, double alpha, const EvalMode& mode) {
  if (agents.empty()) throw ConfigError("no agents");
  if (focal < 0 || static_cast<std::size_t>(focal) >= agents.size()) throw ConfigError("focal agent out of range");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");

  // odometer over the free arms; digit j indexes the support of its owner's prior
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (agent, arm)
  std::int64_t total = 1;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (fixed[i]) {
      if (fixed[i]->size() != static_cast<std::size_t>(agents[i].num_originals))
        throw ConfigError("fixed realization has the wrong number of arms");
      continue;
    }
    for (int a = 0; a < agents[i].num_originals; ++a) {
      slots.emplace_back(i, static_cast<std::size_t>(a));
      total *= static_cast<std::int64_t>(agents[i].prior.size());
      if (total > kMaxRealizations) throw BudgetError("prior realizations exceed the exact enumeration budget");
    }
  }
  std::vector<std::size_t> digit(slots.size(), 0);

  std::vector<ReplicationVector> replication;
  for (const auto& agent : agents) replication.push_back(agent.replication);

  ValueEstimate out;
  out.exact = mode.is_exact();
  out.instances = total;
  double var_sum = 0.0;
  for (std::int64_t v = 0; v < total; ++v) {
    std::vector<std::vector<double>> means(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (fixed[i]) means[i] = *fixed[i];
    double prob = 1.0;
    for (std::size_t j = 0; j < slots.size(); ++j) {
      const auto& prior = agents[slots[j].first].prior;
      means[slots[j].first].push_back(prior.support()[digit[j]]);
      prob *= prior.probs()[digit[j]];
    }
    if (prob > 0.0) {
      RunSpec run = make_run(build_multi_agent_instance(means, replication, model), policy, horizon);
      if (mode.is_exact()) {
        require_exact_eligible(*run.instance, policy);
        const auto pulls = run_pull_counts(run, RewardTape(0));
        double reward = 0.0;
        for (std::size_t a = 0; a < pulls.size(); ++a)
          if (run.instance->arm(a).owner == focal) reward += static_cast<double>(pulls[a]) * run.instance->arm(a).mean;
        out.value += prob * alpha * reward;
      } else {
        const auto est = estimate_expectation(
            run, [&](const Trajectory& traj) { return agent_utilities(traj, alpha).per_agent[static_cast<std::size_t>(focal)]; },
            mode.reps, derive_seed(mode.seed, static_cast<std::uint64_t>(v)), mode.threads);
        out.value += prob * est.mean;
        var_sum += prob * prob * est.std_error * est.std_error;
      }
    }
    for (std::size_t j = 0; j < digit.size(); ++j) {
      if (++digit[j] < agents[slots[j].first].prior.size()) break;
      digit[j] = 0;
    }
  }
  out.std_error = std::sqrt(var_sum);
  return out;
}

}  // namespace

ValueEstimate ex_ante_utility(const std::vector<AgentSpec>& agents, int focal, const PolicySpec& policy,
                              RewardModel model, std::int64_t horizon, double alpha, const EvalMode& mode) {
  return ex_ante_impl(agents, focal, std::vector<std::optional<std::vector<double>>>(agents.size()), policy, model,
                      horizon, alpha, mode);
}

ValueEstimate ex_ante_utility_given(const std::vector<AgentSpec>& agents, int focal,
                                    const std::vector<std::vector<double>>& realized, const PolicySpec& policy,
                                    RewardModel model, std::int64_t horizon, double alpha, const EvalMode& mode) {
  if (realized.size() != agents.size()) throw ConfigError("one realization per agent is required");
  std::vector<std::optional<std::vector<double>>> fixed(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (static_cast<int>(i) != focal) fixed[i] = realized[i];
  return ex_ante_impl(agents, focal, fixed, policy, model, horizon, alpha, mode);
}

ValueEstimate ex_ante_utility(const DiscretePrior& prior, int l, const ReplicationVector& r,
                              const PolicySpec& policy, RewardModel model, std::int64_t horizon, double alpha,
                              const EvalMode& mode) {
  return ex_ante_utility({AgentSpec(prior, l, r)}, 0, policy, model, horizon, alpha, mode);
}

}  // namespace rpb
