#include "rpb/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>

namespace rpb {

Priorities Priorities::identity(const BanditInstance& instance) {
  return {TieBreakPriority::identity(instance.size()),
          TieBreakPriority::identity(static_cast<std::size_t>(instance.num_agents()))};
}

Priorities RunSpec::resolved_priorities() const {
  return priorities ? *priorities : Priorities::identity(*instance);
}

RunSpec make_run(BanditInstance instance, PolicySpec policy, std::int64_t horizon) {
  RunSpec spec;
  spec.instance = std::make_shared<const BanditInstance>(std::move(instance));
  spec.policy = policy;
  spec.horizon = horizon;
  return spec;
}

namespace {

void check_runnable(const RunSpec& spec) {
  if (!spec.instance) throw ConfigError("run has no instance");
  if (spec.horizon < 1) throw DomainError("horizon must be at least 1");
  if (!spec.instance->realized()) throw DomainError("instance means are not realized");
}

// Drives one episode; `on_round` sees every (t, arm, reward).
template <typename OnRound>
void drive(const RunSpec& spec, const RewardTape& tape, std::vector<std::int64_t>& pulls, OnRound on_round) {
  check_runnable(spec);
  const auto& inst = *spec.instance;
  const auto pri = spec.resolved_priorities();
  auto policy = make_policy(spec.policy, inst, pri.arms, pri.agents);
  pulls.assign(inst.size(), 0);
  for (std::int64_t t = 1; t <= spec.horizon; ++t) {
    const int a = policy->select(tape);
    const auto& arm = inst.arm(static_cast<std::size_t>(a));
    auto& n = pulls[static_cast<std::size_t>(a)];
    double reward = arm.mean;
    if (arm.reward_model == RewardModel::Bernoulli)
      reward = tape.arm_draw(arm.identity(), static_cast<std::uint64_t>(n)) < arm.mean ? 1.0 : 0.0;
    ++n;
    policy->observe(a, reward);
    on_round(t, a, reward);
  }
}

}  // namespace

Trajectory run_episode(const RunSpec& spec, const RewardTape& tape) {
  Trajectory traj;
  traj.instance = spec.instance;
  traj.horizon = spec.horizon;
  check_runnable(spec);
  traj.rounds.reserve(static_cast<std::size_t>(spec.horizon));
  traj.reward_by_arm.assign(spec.instance->size(), 0.0);
  drive(spec, tape, traj.pulls, [&](std::int64_t t, int a, double reward) {
    traj.rounds.push_back({t, spec.instance->arm(static_cast<std::size_t>(a)).owner, a, reward});
    traj.reward_by_arm[static_cast<std::size_t>(a)] += reward;
  });
  return traj;
}

Trajectory run_deterministic_trace(const RunSpec& spec) {
  check_runnable(spec);
  if (!spec.instance->effectively_deterministic())
    throw DomainError("deterministic trace needs deterministic arms (or Bernoulli arms with mean 0 or 1)");
  if (spec.policy.randomized()) throw DomainError("policy uses internal randomness");
  return run_episode(spec, RewardTape(0));
}

std::vector<std::int64_t> run_pull_counts(const RunSpec& spec, const RewardTape& tape) {
  std::vector<std::int64_t> pulls;
  drive(spec, tape, pulls, [](std::int64_t, int, double) {});
  return pulls;
}

EstimateCI summarize(const std::vector<double>& samples) {
  EstimateCI ci;
  ci.reps = static_cast<std::int64_t>(samples.size());
  if (samples.empty()) return ci;
  double sum = 0.0;
  for (double x : samples) sum += x;
  ci.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - ci.mean) * (x - ci.mean);
    const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    ci.std_error = sd / std::sqrt(static_cast<double>(samples.size()));
    ci.half_width_95 = 1.96 * ci.std_error;
  }
  return ci;
}

int default_threads() {
  if (const char* env = std::getenv("RPB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& body) {
  if (threads <= 0) threads = default_threads();
  threads = static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(count, 1)));
  if (threads <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::int64_t i = w; i < count; i += threads) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> sample_statistic(const RunSpec& spec, const Statistic& statistic, std::int64_t reps,
                                     std::uint64_t master_seed, int threads) {
  if (reps < 1) throw DomainError("at least one replication is required");
  check_runnable(spec);
  std::vector<double> values(static_cast<std::size_t>(reps));
  parallel_for(reps, threads, [&](std::int64_t r) {
    const RewardTape tape(derive_seed(master_seed, static_cast<std::uint64_t>(r)));
    values[static_cast<std::size_t>(r)] = statistic(run_episode(spec, tape));
  });
  return values;
}

EstimateCI estimate_expectation(const RunSpec& spec, const Statistic& statistic, std::int64_t reps,
                                std::uint64_t master_seed, int threads) {
  if (reps < 2) throw DomainError("estimating an expectation needs at least 2 replications");
  return summarize(sample_statistic(spec, statistic, reps, master_seed, threads));
}

PairedEstimate coupled_runs(const RunSpec& a, const RunSpec& b, const Statistic& statistic, std::int64_t reps,
                            std::uint64_t master_seed, int threads) {
  if (reps < 2) throw DomainError("estimating an expectation needs at least 2 replications");
  check_runnable(a);
  check_runnable(b);
  std::map<ArmIdentity, const ArmSpec*> by_identity;
  for (const auto& arm : a.instance->arms()) by_identity[arm.identity()] = &arm;
  for (const auto& arm : b.instance->arms()) {
    auto it = by_identity.find(arm.identity());
    if (it != by_identity.end() &&
        (it->second->mean != arm.mean || it->second->reward_model != arm.reward_model))
      throw ConfigError("coupled runs map one arm identity to different arms");
  }
  std::vector<double> va(static_cast<std::size_t>(reps)), vb(static_cast<std::size_t>(reps));
  parallel_for(reps, threads, [&](std::int64_t r) {
    const RewardTape tape(derive_seed(master_seed, static_cast<std::uint64_t>(r)));
    va[static_cast<std::size_t>(r)] = statistic(run_episode(a, tape));
    vb[static_cast<std::size_t>(r)] = statistic(run_episode(b, tape));
  });
  std::vector<double> diff(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) diff[i] = va[i] - vb[i];
  return {summarize(va), summarize(vb), summarize(diff)};
}

}  // namespace rpb
