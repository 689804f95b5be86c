#include "rpb/policies.hpp"

#include <algorithm>
#include <cmath>

namespace rpb {

namespace {

// Best index among `candidates` by score; exact ties go to the priority-first index.
template <typename Score>
int argbest(const std::vector<int>& candidates, const TieBreakPriority& priority, Score score) {
  int best = -1;
  double best_score = 0.0;
  for (int a : candidates) {
    const double s = score(a);
    if (best < 0 || s > best_score || (s == best_score && priority.prefers(a, best))) {
      best = a;
      best_score = s;
    }
  }
  return best;
}

std::vector<int> iota_indices(std::size_t n) {
  std::vector<int> out(n);
  for (std::size_t a = 0; a < n; ++a) out[a] = static_cast<int>(a);
  return out;
}

int priority_first(const std::vector<int>& candidates, const TieBreakPriority& priority) {
  return argbest(candidates, priority, [](int) { return 0.0; });
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration types

double BonusConfig::bonus(double log_argument, std::int64_t pulls) const {
  return std::sqrt(c * std::log(log_argument) / static_cast<double>(pulls));
}

void BonusConfig::validate() const {
  if (!(c > 0.0)) throw ConfigError("bonus scale c must be positive");
}

double EpsSchedule::epsilon(std::int64_t round, std::size_t arms) const {
  const double denom = mode == EpsDenominator::OverT ? static_cast<double>(horizon) : static_cast<double>(round);
  return std::min(1.0, c * static_cast<double>(arms) / (d * d * denom));
}

void EpsSchedule::validate() const {
  if (!(c > 0.0)) throw ConfigError("epsilon schedule constant c must be positive");
  if (!(d > 0.0)) throw ConfigError("epsilon schedule constant d must be positive");
  if (mode == EpsDenominator::OverT && horizon < 1)
    throw ConfigError("epsilon schedule over T needs the horizon");
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Ucb: return "ucb";
    case PolicyKind::Etc: return "etc";
    case PolicyKind::EpsGreedy: return "eps-greedy";
    case PolicyKind::PidEtc: return "pid-etc";
    case PolicyKind::Hucb: return "hucb";
    case PolicyKind::Hetc: return "hetc";
  }
  return "?";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  for (auto k : {PolicyKind::Ucb, PolicyKind::Etc, PolicyKind::EpsGreedy, PolicyKind::PidEtc,
                 PolicyKind::Hucb, PolicyKind::Hetc})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown policy '" + name + "'");
}

PolicySpec PolicySpec::ucb(double c) {
  PolicySpec s;
  s.kind = PolicyKind::Ucb;
  s.bonus.c = c;
  return s;
}

PolicySpec PolicySpec::etc(std::int64_t m) {
  PolicySpec s;
  s.kind = PolicyKind::Etc;
  s.m = m;
  return s;
}

PolicySpec PolicySpec::eps_greedy(EpsSchedule schedule) {
  PolicySpec s;
  s.kind = PolicyKind::EpsGreedy;
  s.eps = schedule;
  return s;
}

PolicySpec PolicySpec::pid_etc() {
  PolicySpec s;
  s.kind = PolicyKind::PidEtc;
  return s;
}

PolicySpec PolicySpec::hucb(double c) {
  PolicySpec s;
  s.kind = PolicyKind::Hucb;
  s.bonus.c = c;
  return s;
}

PolicySpec PolicySpec::hetc(std::int64_t M, std::int64_t m, std::int64_t tau) {
  PolicySpec s;
  s.kind = PolicyKind::Hetc;
  s.M = M;
  s.m = m;
  s.tau = tau;
  return s;
}

void PolicySpec::validate() const {
  switch (kind) {
    case PolicyKind::Ucb:
    case PolicyKind::Hucb: bonus.validate(); break;
    case PolicyKind::Etc:
      if (m < 1) throw ConfigError("ETC exploration length m must be at least 1");
      break;
    case PolicyKind::EpsGreedy: eps.validate(); break;
    case PolicyKind::PidEtc: break;
    case PolicyKind::Hetc:
      if (m < 1) throw ConfigError("H-ETC exploration length m must be at least 1");
      if (M < 1) throw ConfigError("H-ETC agent exploration length M must be at least 1");
      if (tau < 0) throw ConfigError("H-ETC restart round must be non-negative");
      break;
  }
}

// ---------------------------------------------------------------------------
// Flat policies

FlatPolicyState::FlatPolicyState(std::size_t arms) : pulls(arms, 0), sums(arms, 0.0) {}

double FlatPolicyState::mean(int a) const {
  const auto i = static_cast<std::size_t>(a);
  return pulls[i] == 0 ? 0.0 : sums[i] / static_cast<double>(pulls[i]);
}

void FlatPolicyState::record(int a, double reward) {
  const auto i = static_cast<std::size_t>(a);
  ++pulls[i];
  sums[i] += reward;
  ++t;
}

void FlatPolicyState::reset() {
  std::fill(pulls.begin(), pulls.end(), 0);
  std::fill(sums.begin(), sums.end(), 0.0);
  t = 0;
  committed.reset();
}

int ucb1_step(const FlatPolicyState& state, const BonusConfig& cfg, const TieBreakPriority& priority) {
  if (state.arms() == 0) throw DomainError("no arms to select from");
  std::vector<int> unpulled;
  for (std::size_t a = 0; a < state.arms(); ++a)
    if (state.pulls[a] == 0) unpulled.push_back(static_cast<int>(a));
  if (!unpulled.empty()) return priority_first(unpulled, priority);
  const double round = static_cast<double>(state.t + 1);
  return argbest(iota_indices(state.arms()), priority, [&](int a) {
    return state.mean(a) + cfg.bonus(round, state.pulls[static_cast<std::size_t>(a)]);
  });
}

int etc_step(FlatPolicyState& state, std::int64_t m, const TieBreakPriority& priority) {
  if (state.arms() == 0) throw DomainError("no arms to select from");
  if (state.committed) return *state.committed;
  std::vector<int> exploring;
  for (std::size_t a = 0; a < state.arms(); ++a)
    if (state.pulls[a] < m) exploring.push_back(static_cast<int>(a));
  if (!exploring.empty())
    return argbest(exploring, priority, [&](int a) { return -static_cast<double>(state.pulls[static_cast<std::size_t>(a)]); });
  state.committed = argbest(iota_indices(state.arms()), priority, [&](int a) { return state.mean(a); });
  return *state.committed;
}

int eps_greedy_step(const FlatPolicyState& state, const EpsSchedule& schedule, EpsDraw draw,
                    const TieBreakPriority& priority) {
  const std::size_t k = state.arms();
  if (k == 0) throw DomainError("no arms to select from");
  std::vector<int> unpulled;
  for (std::size_t a = 0; a < k; ++a)
    if (state.pulls[a] == 0) unpulled.push_back(static_cast<int>(a));
  if (!unpulled.empty()) return priority_first(unpulled, priority);

  auto pick_from = [&](std::vector<int> candidates) {
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) { return priority.prefers(a, b); });
    auto pos = static_cast<std::size_t>(draw.pick * static_cast<double>(candidates.size()));
    return candidates[std::min(pos, candidates.size() - 1)];
  };
  if (draw.explore < schedule.epsilon(state.t + 1, k)) return pick_from(iota_indices(k));

  double best = -1.0;
  for (std::size_t a = 0; a < k; ++a) best = std::max(best, state.mean(static_cast<int>(a)));
  std::vector<int> leaders;
  for (std::size_t a = 0; a < k; ++a)
    if (state.mean(static_cast<int>(a)) == best) leaders.push_back(static_cast<int>(a));
  return pick_from(std::move(leaders));
}

std::int64_t pid_etc_exploration_length(std::int64_t epoch_horizon) {
  const double l = std::log(static_cast<double>(epoch_horizon));
  const auto m = static_cast<std::int64_t>(std::floor(l * l * l * l));
  return std::max<std::int64_t>(1, m);
}

void PidEtcState::record(int a, double reward) {
  stats.record(a, reward);
  ++round;
}

int pid_etc_step(PidEtcState& state, const TieBreakPriority& priority) {
  if (state.epoch == 0 || state.round >= state.epoch_end) {
    ++state.epoch;
    state.epoch_end = std::int64_t{1} << state.epoch;
    state.m = pid_etc_exploration_length(state.epoch_end);
    state.stats.reset();
  }
  return etc_step(state.stats, state.m, priority);
}

// ---------------------------------------------------------------------------
// Hierarchical policies

HierPolicyState::HierPolicyState(const BanditInstance& instance)
    : arm_agent(instance.size(), 0),
      arm_pulls(instance.size(), 0),
      arm_sums(instance.size(), 0.0) {
  const int n = instance.num_agents();
  for (int i = 0; i < n; ++i) {
    agent_arms.push_back(instance.arms_of(i));
    if (agent_arms.back().empty()) throw ConfigError("agent " + std::to_string(i) + " registered no arms");
    for (int a : agent_arms.back()) arm_agent[static_cast<std::size_t>(a)] = i;
  }
  agent_pulls.assign(static_cast<std::size_t>(n), 0);
  agent_sums.assign(static_cast<std::size_t>(n), 0.0);
  committed_arm.assign(static_cast<std::size_t>(n), std::nullopt);
}

double HierPolicyState::agent_mean(int agent) const {
  const auto i = static_cast<std::size_t>(agent);
  return agent_pulls[i] == 0 ? 0.0 : agent_sums[i] / static_cast<double>(agent_pulls[i]);
}

double HierPolicyState::arm_mean(int arm) const {
  const auto a = static_cast<std::size_t>(arm);
  return arm_pulls[a] == 0 ? 0.0 : arm_sums[a] / static_cast<double>(arm_pulls[a]);
}

void HierPolicyState::record(int arm, double reward) {
  const auto a = static_cast<std::size_t>(arm);
  const auto i = static_cast<std::size_t>(arm_agent[a]);
  ++arm_pulls[a];
  arm_sums[a] += reward;
  ++agent_pulls[i];
  agent_sums[i] += reward;
  ++t;
}

void HierPolicyState::restart_arms() {
  std::fill(arm_pulls.begin(), arm_pulls.end(), 0);
  std::fill(arm_sums.begin(), arm_sums.end(), 0.0);
  std::fill(committed_arm.begin(), committed_arm.end(), std::nullopt);
}

ArmChoice hucb_step(const HierPolicyState& state, const BonusConfig& cfg,
                    const TieBreakPriority& agent_priority, const TieBreakPriority& arm_priority) {
  const auto agents = iota_indices(state.agent_arms.size());
  if (agents.empty()) throw DomainError("no agents to select from");
  std::vector<int> unexplored;
  for (int i : agents)
    if (state.agent_pulls[static_cast<std::size_t>(i)] == 0) unexplored.push_back(i);
  int agent;
  if (!unexplored.empty()) {
    agent = priority_first(unexplored, agent_priority);
  } else {
    const double round = static_cast<double>(state.t + 1);
    agent = argbest(agents, agent_priority, [&](int i) {
      return state.agent_mean(i) + cfg.bonus(round, state.agent_pulls[static_cast<std::size_t>(i)]);
    });
  }

  const auto& arms = state.agent_arms[static_cast<std::size_t>(agent)];
  std::vector<int> unpulled;
  for (int a : arms)
    if (state.arm_pulls[static_cast<std::size_t>(a)] == 0) unpulled.push_back(a);
  if (!unpulled.empty()) return {agent, priority_first(unpulled, arm_priority)};
  // The agent's own round index (its pull count including this one) drives
  // the log term, so a lone agent plays exactly like flat UCB.
  const double local_round = static_cast<double>(state.agent_pulls[static_cast<std::size_t>(agent)] + 1);
  const int arm = argbest(arms, arm_priority, [&](int a) {
    return state.arm_mean(a) + cfg.bonus(local_round, state.arm_pulls[static_cast<std::size_t>(a)]);
  });
  return {agent, arm};
}

ArmChoice hetc_step(HierPolicyState& state, std::int64_t M, std::int64_t m, std::int64_t tau,
                    const TieBreakPriority& agent_priority, const TieBreakPriority& arm_priority) {
  if (state.t == tau && !state.restarted) {
    state.restart_arms();
    state.restarted = true;
  }
  const auto agents = iota_indices(state.agent_arms.size());
  if (agents.empty()) throw DomainError("no agents to select from");

  int agent;
  if (state.committed_agent) {
    agent = *state.committed_agent;
  } else {
    std::vector<int> exploring;
    for (int i : agents)
      if (state.agent_pulls[static_cast<std::size_t>(i)] < M) exploring.push_back(i);
    if (!exploring.empty()) {
      agent = priority_first(exploring, agent_priority);
    } else {
      agent = argbest(agents, agent_priority, [&](int i) { return state.agent_mean(i); });
      state.committed_agent = agent;
    }
  }

  auto& committed = state.committed_arm[static_cast<std::size_t>(agent)];
  if (committed) return {agent, *committed};
  const auto& arms = state.agent_arms[static_cast<std::size_t>(agent)];
  std::vector<int> exploring;
  for (int a : arms)
    if (state.arm_pulls[static_cast<std::size_t>(a)] < m) exploring.push_back(a);
  if (!exploring.empty()) return {agent, priority_first(exploring, arm_priority)};
  committed = argbest(arms, arm_priority, [&](int a) { return state.arm_mean(a); });
  return {agent, *committed};
}

// ---------------------------------------------------------------------------
// Policy objects

namespace {

class UcbPolicy final : public Policy {
 public:
  UcbPolicy(std::size_t k, BonusConfig cfg, TieBreakPriority pri) : state_(k), cfg_(cfg), pri_(std::move(pri)) {}
  int select(const RewardTape&) override { return ucb1_step(state_, cfg_, pri_); }
  void observe(int arm, double reward) override { state_.record(arm, reward); }

 private:
  FlatPolicyState state_;
  BonusConfig cfg_;
  TieBreakPriority pri_;
};

class EtcPolicy final : public Policy {
 public:
  EtcPolicy(std::size_t k, std::int64_t m, TieBreakPriority pri) : state_(k), m_(m), pri_(std::move(pri)) {}
  int select(const RewardTape&) override { return etc_step(state_, m_, pri_); }
  void observe(int arm, double reward) override { state_.record(arm, reward); }

 private:
  FlatPolicyState state_;
  std::int64_t m_;
  TieBreakPriority pri_;
};

class EpsGreedyPolicy final : public Policy {
 public:
  EpsGreedyPolicy(std::size_t k, EpsSchedule schedule, TieBreakPriority pri)
      : state_(k), schedule_(schedule), pri_(std::move(pri)) {}
  int select(const RewardTape& tape) override {
    const auto round = static_cast<std::uint64_t>(state_.t + 1);
    return eps_greedy_step(state_, schedule_, {tape.policy_draw(round, 0), tape.policy_draw(round, 1)}, pri_);
  }
  void observe(int arm, double reward) override { state_.record(arm, reward); }

 private:
  FlatPolicyState state_;
  EpsSchedule schedule_;
  TieBreakPriority pri_;
};

class PidEtcPolicy final : public Policy {
 public:
  PidEtcPolicy(std::size_t k, TieBreakPriority pri) : state_(k), pri_(std::move(pri)) {}
  int select(const RewardTape&) override { return pid_etc_step(state_, pri_); }
  void observe(int arm, double reward) override { state_.record(arm, reward); }

 private:
  PidEtcState state_;
  TieBreakPriority pri_;
};

class HucbPolicy final : public Policy {
 public:
  HucbPolicy(const BanditInstance& inst, BonusConfig cfg, TieBreakPriority arms, TieBreakPriority agents)
      : state_(inst), cfg_(cfg), arm_pri_(std::move(arms)), agent_pri_(std::move(agents)) {}
  int select(const RewardTape&) override { return hucb_step(state_, cfg_, agent_pri_, arm_pri_).arm; }
  void observe(int arm, double reward) override { state_.record(arm, reward); }

 private:
  HierPolicyState state_;
  BonusConfig cfg_;
  TieBreakPriority arm_pri_, agent_pri_;
};

class HetcPolicy final : public Policy {
 public:
  HetcPolicy(const BanditInstance& inst, const PolicySpec& spec, TieBreakPriority arms, TieBreakPriority agents)
      : state_(inst), M_(spec.M), m_(spec.m), tau_(spec.tau), arm_pri_(std::move(arms)), agent_pri_(std::move(agents)) {}
  int select(const RewardTape&) override { return hetc_step(state_, M_, m_, tau_, agent_pri_, arm_pri_).arm; }
  void observe(int arm, double reward) override { state_.record(arm, reward); }

 private:
  HierPolicyState state_;
  std::int64_t M_, m_, tau_;
  TieBreakPriority arm_pri_, agent_pri_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const BanditInstance& instance,
                                    const TieBreakPriority& arm_priority,
                                    const TieBreakPriority& agent_priority) {
  spec.validate();
  const std::size_t k = instance.size();
  if (k == 0) throw DomainError("instance has no arms");
  if (arm_priority.size() != k) throw ConfigError("arm priority size differs from the number of arms");
  if (spec.hierarchical() && agent_priority.size() != static_cast<std::size_t>(instance.num_agents()))
    throw ConfigError("agent priority size differs from the number of agents");
  switch (spec.kind) {
    case PolicyKind::Ucb: return std::make_unique<UcbPolicy>(k, spec.bonus, arm_priority);
    case PolicyKind::Etc: return std::make_unique<EtcPolicy>(k, spec.m, arm_priority);
    case PolicyKind::EpsGreedy: return std::make_unique<EpsGreedyPolicy>(k, spec.eps, arm_priority);
    case PolicyKind::PidEtc: return std::make_unique<PidEtcPolicy>(k, arm_priority);
    case PolicyKind::Hucb: return std::make_unique<HucbPolicy>(instance, spec.bonus, arm_priority, agent_priority);
    case PolicyKind::Hetc: {
      // Phase-2 exploration of every original must fit in one agent's phase-1 budget.
      const auto L = static_cast<std::int64_t>(instance.max_originals_per_agent());
      if (spec.M < spec.m * L)
        throw ConfigError("H-ETC needs M >= m * L (L = most original arms held by one agent)");
      return std::make_unique<HetcPolicy>(instance, spec, arm_priority, agent_priority);
    }
  }
  throw ConfigError("unsupported policy");
}

// ---------------------------------------------------------------------------

std::int64_t etc_theorem_m(std::size_t l, double gap, std::int64_t horizon) {
  if (!(gap > 0.0) || !std::isfinite(gap)) throw DomainError("gap must be positive and finite");
  if (horizon < 1) throw DomainError("horizon must be positive");
  const double m = 2.0 * static_cast<double>(l) / (gap * gap) * std::log(2.0 * static_cast<double>(horizon));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(m)));
}

std::int64_t smallest_consistent_m(std::size_t l, double gap,
                                   const std::function<std::int64_t(std::int64_t)>& horizon_of_m) {
  for (std::int64_t m = 1; m < (std::int64_t{1} << 40); ++m)
    if (m >= etc_theorem_m(l, gap, horizon_of_m(m))) return m;
  throw SearchExhausted("no self-consistent exploration length found");
}

}  // namespace rpb
