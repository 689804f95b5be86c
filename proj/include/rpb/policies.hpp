#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rpb/core.hpp"

namespace rpb {

/// Exploration bonus sqrt(c * ln(x) / n).
struct BonusConfig {
  double c = 2.0;

  double bonus(double log_argument, std::int64_t pulls) const;
  void validate() const;
};

enum class EpsDenominator { OverT, OverRound };

/// epsilon_t = min{1, c k / (d^2 D)} with D the horizon (OverT) or the round (OverRound).
struct EpsSchedule {
  EpsDenominator mode = EpsDenominator::OverT;
  double c = 11.0;
  double d = 0.9;
  std::int64_t horizon = 0;  // used by OverT only

  double epsilon(std::int64_t round, std::size_t arms) const;
  void validate() const;
};

enum class PolicyKind { Ucb, Etc, EpsGreedy, PidEtc, Hucb, Hetc };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::Ucb;
  BonusConfig bonus;
  std::int64_t m = 1;    // ETC / H-ETC arm-level exploration length
  std::int64_t M = 1;    // H-ETC agent-level exploration length
  std::int64_t tau = 0;  // H-ETC restart round
  EpsSchedule eps;

  static PolicySpec ucb(double c = 2.0);
  static PolicySpec etc(std::int64_t m);
  static PolicySpec eps_greedy(EpsSchedule schedule);
  static PolicySpec pid_etc();
  static PolicySpec hucb(double c = 2.0);
  static PolicySpec hetc(std::int64_t M, std::int64_t m, std::int64_t tau);

  bool randomized() const { return kind == PolicyKind::EpsGreedy; }
  bool hierarchical() const { return kind == PolicyKind::Hucb || kind == PolicyKind::Hetc; }
  void validate() const;
};

// ---------------------------------------------------------------------------
// Flat (single-level) policies

struct FlatPolicyState {
  std::vector<std::int64_t> pulls;
  std::vector<double> sums;
  std::int64_t t = 0;  // completed rounds
  std::optional<int> committed;

  explicit FlatPolicyState(std::size_t arms = 0);

  std::size_t arms() const { return pulls.size(); }
  double mean(int a) const;
  void record(int a, double reward);
  void reset();
};

int ucb1_step(const FlatPolicyState& state, const BonusConfig& cfg, const TieBreakPriority& priority);

/// Round-robin exploration in priority order until every arm has m pulls, then
/// the empirical best at that moment is frozen in `state.committed`.
int etc_step(FlatPolicyState& state, std::int64_t m, const TieBreakPriority& priority);

/// Two uniforms in [0,1): `explore` is compared with epsilon_t, `pick` selects
/// a position in the priority-ordered candidate list.
struct EpsDraw {
  double explore = 0.0;
  double pick = 0.0;
};

int eps_greedy_step(const FlatPolicyState& state, const EpsSchedule& schedule, EpsDraw draw,
                    const TieBreakPriority& priority);

/// max(1, floor(ln^4 T)) for the epoch ending at round T.
std::int64_t pid_etc_exploration_length(std::int64_t epoch_horizon);

struct PidEtcState {
  FlatPolicyState stats;
  int epoch = 0;              // i, with the epoch ending at round 2^i
  std::int64_t epoch_end = 0;
  std::int64_t m = 0;
  std::int64_t round = 0;     // completed rounds over all epochs

  explicit PidEtcState(std::size_t arms = 0) : stats(arms) {}
  void record(int a, double reward);
};

int pid_etc_step(PidEtcState& state, const TieBreakPriority& priority);

// ---------------------------------------------------------------------------
// Hierarchical policies: an agent first, then one of its arms.

struct HierPolicyState {
  std::vector<std::vector<int>> agent_arms;  // global arm indices per agent
  std::vector<int> arm_agent;
  std::vector<std::int64_t> agent_pulls;
  std::vector<double> agent_sums;
  std::vector<std::int64_t> arm_pulls;
  std::vector<double> arm_sums;
  std::int64_t t = 0;
  std::optional<int> committed_agent;
  std::vector<std::optional<int>> committed_arm;
  bool restarted = false;

  explicit HierPolicyState(const BanditInstance& instance);

  double agent_mean(int agent) const;
  double arm_mean(int arm) const;
  void record(int arm, double reward);
  /// Zeroes every intra-agent statistic; agent statistics are kept.
  void restart_arms();
};

struct ArmChoice {
  int agent = 0;
  int arm = 0;  // global arm index
};

ArmChoice hucb_step(const HierPolicyState& state, const BonusConfig& cfg,
                    const TieBreakPriority& agent_priority, const TieBreakPriority& arm_priority);

/// Hierarchical ETC with a restart of the intra-agent statistics at round tau + 1.
ArmChoice hetc_step(HierPolicyState& state, std::int64_t M, std::int64_t m, std::int64_t tau,
                    const TieBreakPriority& agent_priority, const TieBreakPriority& arm_priority);

// ---------------------------------------------------------------------------
// Uniform interface used by the engine.

class Policy {
 public:
  virtual ~Policy() = default;
  /// Arm to pull in the next round. `tape` supplies the policy's own random bits.
  virtual int select(const RewardTape& tape) = 0;
  virtual void observe(int arm, double reward) = 0;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const BanditInstance& instance,
                                    const TieBreakPriority& arm_priority,
                                    const TieBreakPriority& agent_priority);

// ---------------------------------------------------------------------------
// Parameter helpers

/// ceil((2 l / gap^2) ln(2T)): the ETC exploration length that makes
/// misselection o(1/T).
std::int64_t etc_theorem_m(std::size_t l, double gap, std::int64_t horizon);

/// Smallest m >= 1 with m >= etc_theorem_m(l, gap, horizon_of_m(m)), for
/// set-ups whose horizon is itself a function of m.
std::int64_t smallest_consistent_m(std::size_t l, double gap,
                                   const std::function<std::int64_t(std::int64_t)>& horizon_of_m);

}  // namespace rpb
