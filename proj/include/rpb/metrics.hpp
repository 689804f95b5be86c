#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rpb/core.hpp"
#include "rpb/engine.hpp"
#include "rpb/policies.hpp"

namespace rpb {

/// Pseudo-regret sum_a n_a (mu* - mu_a) with mu* taken over original arms.
double regret_from_counts(const BanditInstance& instance, std::span<const std::int64_t> pulls);

double expost_regret(const Trajectory& traj);

/// Pseudo-regret after each prefix: element t-1 is the regret of rounds 1..t.
std::vector<double> cumulative_regret(const Trajectory& traj);

/// Realized reward collected on `agent`'s arms after each prefix.
std::vector<double> cumulative_agent_reward(const Trajectory& traj, int agent);

struct UtilityReport {
  std::vector<double> per_agent;  // alpha-share of realized rewards on each agent's arms
  double total_reward = 0.0;
  std::int64_t horizon = 0;
  double alpha = 0.0;
};

UtilityReport agent_utilities(const Trajectory& traj, double alpha);

struct EvalMode {
  enum class Kind { Exact, MonteCarlo };
  Kind kind = Kind::Exact;
  std::int64_t reps = 0;                 // per instance (MC)
  std::uint64_t seed = 0;
  std::int64_t permutation_samples = 0;  // 0: enumerate all permutations
  int threads = 0;

  static EvalMode exact() { return {}; }
  static EvalMode monte_carlo(std::int64_t reps, std::uint64_t seed, int threads = 0);
  bool is_exact() const { return kind == Kind::Exact; }
};

struct ValueEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 in exact mode
  bool exact = true;
  std::int64_t instances = 0;  // permutations or realizations evaluated
};

inline constexpr std::int64_t kMaxRealizations = 1'000'000;

/// Average regret over every permutation of the replication vector across the
/// given (sorted) means: the arm with mean mu_a is replicated r_{sigma(a)} times.
ValueEstimate rp_regret(std::span<const double> original_means, const ReplicationVector& r,
                        const PolicySpec& policy, RewardModel model, std::int64_t horizon,
                        const EvalMode& mode);

/// Ex-ante utility of agent `focal`, marginalized over every agent's prior
/// realization (all agents' strategies fixed in `agents`). In MC mode each
/// realization gets `mode.reps` replications and the strata are combined with
/// their exact probabilities.
ValueEstimate ex_ante_utility(const std::vector<AgentSpec>& agents, int focal, const PolicySpec& policy,
                              RewardModel model, std::int64_t horizon, double alpha, const EvalMode& mode);

/// Same, but conditioned on the other agents' realized means (`realized[focal]`
/// is ignored): only the focal agent's own arms are drawn from its prior.
ValueEstimate ex_ante_utility_given(const std::vector<AgentSpec>& agents, int focal,
                                    const std::vector<std::vector<double>>& realized, const PolicySpec& policy,
                                    RewardModel model, std::int64_t horizon, double alpha, const EvalMode& mode);

/// Single-agent convenience overload.
ValueEstimate ex_ante_utility(const DiscretePrior& prior, int l, const ReplicationVector& r,
                              const PolicySpec& policy, RewardModel model, std::int64_t horizon, double alpha,
                              const EvalMode& mode);

/// Number of mean-vector realizations the agents' priors induce.
std::int64_t realization_count(const std::vector<AgentSpec>& agents);

}  // namespace rpb
