#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rpb/core.hpp"
#include "rpb/engine.hpp"
#include "rpb/metrics.hpp"
#include "rpb/policies.hpp"
#include "rpb/serialization.hpp"

namespace rpb {

enum class CertificateKind {
  TRPViolation,
  TRPHolds,
  PIHolds,
  PIViolation,
  BestResponseDeviation,
  NoDeviationFound,
  BoundSatisfied,
  BoundViolated,
  ScalingReport,
  ClosedFormMatch,
  ClosedFormMismatch,
  NoneFound,
};

std::string to_string(CertificateKind kind);
CertificateKind certificate_kind_from_string(const std::string& name);

/// Whether the check's claim stood. Statistical checks report Inconclusive when
/// the estimate lands on the wrong side of the claim but within 3 standard errors.
enum class Outcome { Holds, Violated, Inconclusive };

std::string to_string(Outcome outcome);
Outcome outcome_from_string(const std::string& name);

/// `payload["inputs"]` holds every argument of the producing call (seeds
/// included), so re-running the check from it reproduces `payload["result"]`.
struct Certificate {
  std::string check;
  CertificateKind kind = CertificateKind::NoneFound;
  Outcome outcome = Outcome::Holds;
  json payload;
};

void to_json(json& j, const Certificate& c);
void from_json(const json& j, Certificate& c);

inline constexpr double kSigmaMargin = 3.0;

// ---------------------------------------------------------------------------

/// RP-Regret of the truthful strategy against every other strategy in the set,
/// which must contain the zero vector.
Certificate check_trp(const PolicySpec& policy, const std::vector<double>& original_means,
                      const std::vector<ReplicationVector>& strategies, RewardModel model, std::int64_t horizon,
                      const EvalMode& mode);

struct PiCase {
  Permutation sigma;  // over global arm indices
  std::uint64_t seed = 0;
};

/// Runs the instance and its sigma-relabelled copy (arms keep their tape
/// identities, the arm priority is relabelled) and compares pull counts.
Certificate check_permutation_invariance(const PolicySpec& policy, const BanditInstance& instance,
                                         const std::vector<PiCase>& cases, std::int64_t horizon);

/// `count` random permutations of the instance's arms, each with its own tape seed.
std::vector<PiCase> random_pi_cases(std::size_t arms, std::size_t count, std::uint64_t seed);

/// Policy used at one horizon (exploration lengths often depend on T).
struct HorizonPolicy {
  std::int64_t horizon = 0;
  PolicySpec policy;
};

/// Single agent: every r with |r|_1 <= r_max against truthful at each horizon.
Certificate check_replication_proof(const DiscretePrior& prior, int l, int r_max,
                                    const std::vector<HorizonPolicy>& runs, double alpha, RewardModel model,
                                    const EvalMode& mode);

struct MultiAgentRpSpec {
  std::vector<AgentSpec> agents;                               // priors and l_i; replication ignored
  std::vector<std::vector<ReplicationVector>> opponent_sets;   // candidate strategies per agent when not focal
  int r_max = 0;
  std::vector<HorizonPolicy> runs;
  double alpha = 0.5;
  RewardModel model = RewardModel::Bernoulli;
  /// When set, also requires truthful to be a best response for every fixed
  /// realization of the opponents' means, not just in expectation over them.
  bool conditional_on_opponents = false;
};

/// Every agent in turn is focal; opponents range over their strategy sets.
Certificate check_replication_proof(const MultiAgentRpSpec& spec, const EvalMode& mode);

/// Expected pulls of every sub-optimal arm under ETC against m + 1, and the
/// regret against sum_a (2 delta_a l ln(2T) / gap^2 + 1).
Certificate check_etc_pull_bound(const std::vector<double>& means, std::int64_t m, std::int64_t horizon,
                                 std::int64_t reps, std::uint64_t seed, RewardModel model = RewardModel::Bernoulli,
                                 int threads = 0);

/// Frequency of mu_hat_a(m) >= mu_hat_star(m) against 2 exp(-delta^2 m / 2).
Certificate check_misselect_bound(double mu_star, double mu_a, std::int64_t m, std::int64_t reps,
                                  std::uint64_t seed, RewardModel model = RewardModel::Bernoulli, int threads = 0);

struct ScalingSpec {
  std::vector<std::vector<double>> means;  // per agent, originals only
  RewardModel model = RewardModel::Bernoulli;
  double gap = 0.5;
  std::vector<std::int64_t> horizons;
  std::int64_t reps = 100;
  std::uint64_t seed = 0;
  double slack = 4.0;  // allowed max/min ratio of rho over the grid
  int threads = 0;
};

/// H-ETC with m = ceil(2 L ln(2T) / gap^2), M = max(mL, sqrt(T ln T)), tau = Mn.
PolicySpec hetc_scaling_policy(std::size_t max_arms, std::size_t agents, double gap, std::int64_t horizon);

Certificate check_hetc_regret_scaling(const ScalingSpec& spec);

/// Delta |A_2| + Delta (|A_2| / k) sum_{t=k+1}^T eps_t for a deterministic
/// two-valued instance (A_2: arms at the lower mean).
double eps_greedy_closed_form(const std::vector<double>& means, const EpsSchedule& schedule, std::int64_t horizon);

/// Instances A = (mu1, mu2), B = (mu1, mu2, mu1), C = (mu1, mu2, mu2).
Certificate check_eps_greedy_closed_form(double mu1, double mu2, const EpsSchedule& schedule, std::int64_t horizon,
                                         std::int64_t reps, std::uint64_t seed,
                                         RewardModel model = RewardModel::Deterministic, int threads = 0);

}  // namespace rpb
