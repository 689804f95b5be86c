#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rpb/errors.hpp"

namespace rpb {

enum class RewardModel { Deterministic, Bernoulli };

std::string to_string(RewardModel model);
RewardModel reward_model_from_string(const std::string& name);

/// Finite-support distribution over arm means.
class DiscretePrior {
 public:
  DiscretePrior(std::vector<double> support, std::vector<double> probs);

  static DiscretePrior uniform(std::vector<double> support);
  static DiscretePrior point_mass(double value);

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return support_.size(); }

  /// Smallest difference between adjacent support points; +inf for a point mass.
  double min_gap() const;

  bool operator==(const DiscretePrior&) const = default;

 private:
  std::vector<double> support_;
  std::vector<double> probs_;
};

/// Per-original-arm replica counts; all zeros is the truthful strategy.
class ReplicationVector {
 public:
  ReplicationVector() = default;
  explicit ReplicationVector(std::vector<int> counts);

  static ReplicationVector truthful(std::size_t l) { return ReplicationVector(std::vector<int>(l, 0)); }

  std::size_t size() const { return counts_.size(); }
  int operator[](std::size_t a) const { return counts_[a]; }
  const std::vector<int>& counts() const { return counts_; }

  int l1() const;
  bool is_truthful() const { return l1() == 0; }
  std::size_t registered_arms() const { return size() + static_cast<std::size_t>(l1()); }

  bool operator==(const ReplicationVector&) const = default;

 private:
  std::vector<int> counts_;
};

std::string to_string(const ReplicationVector& r);

/// Every replication vector of length l whose entries sum to at most budget,
/// ordered by total then lexicographically descending. The zero vector comes first.
std::vector<ReplicationVector> enumerate_strategies(std::size_t l, int budget);

/// Tape address of an arm: replicas carry their own ordinal so each one is an
/// independent stochastic copy of the original.
struct ArmIdentity {
  int owner = 0;
  int original_index = 0;
  int replica_ordinal = 0;  // 0 for the original arm

  bool operator==(const ArmIdentity&) const = default;
  auto operator<=>(const ArmIdentity&) const = default;
};

struct ArmSpec {
  double mean = 0.0;
  RewardModel reward_model = RewardModel::Deterministic;
  int owner = 0;
  int original_index = 0;
  int replica_ordinal = 0;

  bool is_original() const { return replica_ordinal == 0; }
  ArmIdentity identity() const { return {owner, original_index, replica_ordinal}; }
};

struct AgentSpec {
  DiscretePrior prior;
  int num_originals = 1;
  ReplicationVector replication;

  AgentSpec(DiscretePrior p, int l, ReplicationVector r);
};

class BanditInstance {
 public:
  BanditInstance() = default;
  BanditInstance(std::vector<ArmSpec> arms, bool realized = true);

  const std::vector<ArmSpec>& arms() const { return arms_; }
  const ArmSpec& arm(std::size_t a) const { return arms_[a]; }
  std::size_t size() const { return arms_.size(); }
  bool realized() const { return realized_; }

  int num_agents() const;
  /// Global indices of the arms registered by `agent`, in instance order.
  std::vector<int> arms_of(int agent) const;
  /// Largest count of original arms held by a single agent.
  int max_originals_per_agent() const;

  /// Best mean among original arms; replicas never raise the benchmark.
  double benchmark_mean() const;
  std::vector<double> means() const;
  bool all_deterministic() const;

  /// Deterministic in effect: every arm is Deterministic or Bernoulli with mean 0 or 1.
  bool effectively_deterministic() const;

 private:
  std::vector<ArmSpec> arms_;
  bool realized_ = true;
};

/// Originals in the given order, then the replicas of each original grouped
/// in original order.
BanditInstance build_registered_instance(std::span<const double> original_means,
                                         const ReplicationVector& r, RewardModel model,
                                         int owner = 0);

/// Concatenates the registered arm lists of several agents, agent 0 first.
BanditInstance build_multi_agent_instance(const std::vector<std::vector<double>>& means,
                                          const std::vector<ReplicationVector>& replication,
                                          RewardModel model);

struct DictionaryEntry {
  double mean = 0.0;
  int count = 0;
  bool operator==(const DictionaryEntry&) const = default;
};

/// (mean : multiplicity) pairs with strictly decreasing means.
struct DictionaryForm {
  std::vector<DictionaryEntry> entries;

  int total_arms() const;
  bool operator==(const DictionaryForm&) const = default;
};

DictionaryForm dictionary_form(const BanditInstance& instance);

/// Expands each entry into `count` distinct original arms of a single agent.
BanditInstance instance_from_dictionary(const DictionaryForm& d, RewardModel model);

/// Bijection on {0..l-1}; `apply(a)` is the image of a.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> map);

  static Permutation identity(std::size_t l);

  std::size_t size() const { return map_.size(); }
  int apply(int a) const { return map_[static_cast<std::size_t>(a)]; }
  int operator()(int a) const { return apply(a); }
  const std::vector<int>& map() const { return map_; }

  Permutation inverse() const;
  /// (this ∘ other)(a) = this(other(a))
  Permutation compose(const Permutation& other) const;
  bool is_identity() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<int> map_;
};

inline constexpr std::size_t kMaxEnumeratedPermutationSize = 8;

/// All l! permutations in lexicographic order of their maps.
std::vector<Permutation> enumerate_permutations(std::size_t l);

/// Uniformly random permutation (Fisher-Yates on a splitmix64 stream), a pure function of the seed.
Permutation random_permutation(std::size_t l, std::uint64_t seed);

/// Entry a of the result keeps mean a and takes the count of entry sigma(a).
DictionaryForm permute_instance(const DictionaryForm& d, const Permutation& sigma);

/// Priority order over indices: order()[0] wins every tie.
class TieBreakPriority {
 public:
  TieBreakPriority() = default;
  explicit TieBreakPriority(std::vector<int> order);

  static TieBreakPriority identity(std::size_t n);

  std::size_t size() const { return order_.size(); }
  const std::vector<int>& order() const { return order_; }
  int rank(int index) const { return rank_[static_cast<std::size_t>(index)]; }
  bool prefers(int a, int b) const { return rank(a) < rank(b); }

  /// Priority for an instance relabelled by sigma: index sigma(a) inherits a's rank.
  TieBreakPriority relabelled(const Permutation& sigma) const;

 private:
  std::vector<int> order_;
  std::vector<int> rank_;
};

/// Counter-based uniform source: every draw is a pure function of (seed, key).
class RewardTape {
 public:
  explicit RewardTape(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Draw for the pull_index-th pull (0-based) of an arm.
  double arm_draw(const ArmIdentity& arm, std::uint64_t pull_index) const;
  /// Draw for a policy's own randomness at round t, slot j.
  double policy_draw(std::uint64_t round, std::uint64_t slot) const;

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Stateless derivation of child seeds; used for per-replication seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace rpb
