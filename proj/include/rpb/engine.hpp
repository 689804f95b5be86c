#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rpb/core.hpp"
#include "rpb/policies.hpp"

namespace rpb {

struct Round {
  std::int64_t t = 0;
  int agent = 0;
  int arm = 0;
  double reward = 0.0;
};

struct Trajectory {
  std::shared_ptr<const BanditInstance> instance;
  std::int64_t horizon = 0;
  std::vector<Round> rounds;
  std::vector<std::int64_t> pulls;     // per arm, after the last round
  std::vector<double> reward_by_arm;   // realized reward per arm
};

struct Priorities {
  TieBreakPriority arms;
  TieBreakPriority agents;

  static Priorities identity(const BanditInstance& instance);
};

/// Everything needed to run one episode, except the tape.
struct RunSpec {
  std::shared_ptr<const BanditInstance> instance;
  PolicySpec policy;
  std::int64_t horizon = 0;
  std::optional<Priorities> priorities;  // identity when empty

  Priorities resolved_priorities() const;
};

RunSpec make_run(BanditInstance instance, PolicySpec policy, std::int64_t horizon);

/// Bernoulli arms pay 1 iff the tape draw at (arm identity, pull index) is
/// below the mean; deterministic arms pay their mean.
Trajectory run_episode(const RunSpec& spec, const RewardTape& tape);

/// Tape-free trace for effectively deterministic arms and a policy without internal randomness.
Trajectory run_deterministic_trace(const RunSpec& spec);

/// Pull counts only; avoids materializing the per-round record.
std::vector<std::int64_t> run_pull_counts(const RunSpec& spec, const RewardTape& tape);

struct EstimateCI {
  double mean = 0.0;
  double std_error = 0.0;      // sample std / sqrt(reps)
  double half_width_95 = 0.0;  // 1.96 * std_error
  std::int64_t reps = 0;
};

EstimateCI summarize(const std::vector<double>& samples);

using Statistic = std::function<double(const Trajectory&)>;

/// Default worker count: RPB_THREADS if set, else hardware concurrency.
int default_threads();

/// Replication r uses the tape seeded with derive_seed(master_seed, r); the
/// reduction runs in replication order so the result is independent of `threads`.
EstimateCI estimate_expectation(const RunSpec& spec, const Statistic& statistic, std::int64_t reps,
                                std::uint64_t master_seed, int threads = 0);

/// Same as estimate_expectation but returns the per-replication values.
std::vector<double> sample_statistic(const RunSpec& spec, const Statistic& statistic, std::int64_t reps,
                                     std::uint64_t master_seed, int threads = 0);

struct PairedEstimate {
  EstimateCI a;
  EstimateCI b;
  EstimateCI difference;  // a - b, per replication on a shared tape
};

/// Both runs of a replication read the same tape, so arms with the same
/// identity in the two instances see the same reward draws.
PairedEstimate coupled_runs(const RunSpec& a, const RunSpec& b, const Statistic& statistic, std::int64_t reps,
                            std::uint64_t master_seed, int threads = 0);

/// Runs `body(i)` for i in [0, count) on up to `threads` workers.
void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& body);

}  // namespace rpb
