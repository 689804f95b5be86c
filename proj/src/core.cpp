#include "rpb/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace rpb {

std::string to_string(RewardModel model) {
  return model == RewardModel::Deterministic ? "deterministic" : "bernoulli";
}

RewardModel reward_model_from_string(const std::string& name) {
  if (name == "deterministic") return RewardModel::Deterministic;
  if (name == "bernoulli") return RewardModel::Bernoulli;
  throw ConfigError("unknown reward model '" + name + "'");
}

// ---------------------------------------------------------------------------
// DiscretePrior

DiscretePrior::DiscretePrior(std::vector<double> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.empty()) throw DomainError("prior support is empty");
  if (support_.size() != probs_.size())
    throw ConfigError("prior support and probabilities differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!(support_[i] >= 0.0 && support_[i] <= 1.0))
      throw DomainError("prior support value outside [0,1]");
    if (i > 0 && !(support_[i] > support_[i - 1]))
      throw DomainError("prior support must be strictly increasing");
    if (!(probs_[i] >= 0.0)) throw DomainError("prior probability is negative");
    total += probs_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("prior probabilities do not sum to 1");
}

DiscretePrior DiscretePrior::uniform(std::vector<double> support) {
  const double p = 1.0 / static_cast<double>(support.size());
  std::vector<double> probs(support.size(), p);
  return DiscretePrior(std::move(support), std::move(probs));
}

DiscretePrior DiscretePrior::point_mass(double value) { return DiscretePrior({value}, {1.0}); }

double DiscretePrior::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < support_.size(); ++i) gap = std::min(gap, support_[i] - support_[i - 1]);
  return gap;
}

// ---------------------------------------------------------------------------
// ReplicationVector

ReplicationVector::ReplicationVector(std::vector<int> counts) : counts_(std::move(counts)) {
  for (int c : counts_)
    if (c < 0) throw DomainError("replica counts must be non-negative");
}

int ReplicationVector::l1() const { return std::accumulate(counts_.begin(), counts_.end(), 0); }

std::string to_string(const ReplicationVector& r) {
  std::ostringstream os;
  os << '(';
  for (std::size_t a = 0; a < r.size(); ++a) os << (a ? "," : "") << r[a];
  os << ')';
  return os.str();
}

std::vector<ReplicationVector> enumerate_strategies(std::size_t l, int budget) {
  if (l == 0) throw DomainError("strategy space needs at least one original arm");
  if (budget < 0) throw DomainError("replication budget must be non-negative");
  std::vector<ReplicationVector> out;
  std::vector<int> cur(l, 0);
  for (int total = 0; total <= budget; ++total) {
    // compositions of `total` into l parts, first coordinate largest first
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
      if (pos + 1 == l) {
        cur[pos] = left;
        out.emplace_back(cur);
        return;
      }
      for (int v = left; v >= 0; --v) {
        cur[pos] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, total);
  }
  return out;
}

// ---------------------------------------------------------------------------
// AgentSpec / BanditInstance

AgentSpec::AgentSpec(DiscretePrior p, int l, ReplicationVector r)
    : prior(std::move(p)), num_originals(l), replication(std::move(r)) {
  if (l < 1) throw DomainError("an agent needs at least one original arm");
  if (replication.size() != static_cast<std::size_t>(l))
    throw ConfigError("replication vector length differs from the number of originals");
}

BanditInstance::BanditInstance(std::vector<ArmSpec> arms, bool realized)
    : arms_(std::move(arms)), realized_(realized) {
  std::map<std::pair<int, int>, double> original_mean;
  std::set<ArmIdentity> seen;
  for (const auto& arm : arms_) {
    if (!(arm.mean >= 0.0 && arm.mean <= 1.0)) throw DomainError("arm mean outside [0,1]");
    if (arm.owner < 0 || arm.original_index < 0 || arm.replica_ordinal < 0)
      throw ConfigError("negative arm label");
    if (!seen.insert(arm.identity()).second) throw ConfigError("duplicate arm identity");
    if (arm.is_original()) original_mean[{arm.owner, arm.original_index}] = arm.mean;
  }
  for (const auto& arm : arms_) {
    if (arm.is_original()) continue;
    auto it = original_mean.find({arm.owner, arm.original_index});
    if (it == original_mean.end()) throw ConfigError("replica without a registered original");
    if (it->second != arm.mean) throw DomainError("replica mean differs from its original");
  }
}

int BanditInstance::num_agents() const {
  int n = 0;
  for (const auto& arm : arms_) n = std::max(n, arm.owner + 1);
  return n;
}

std::vector<int> BanditInstance::arms_of(int agent) const {
  std::vector<int> out;
  for (std::size_t a = 0; a < arms_.size(); ++a)
    if (arms_[a].owner == agent) out.push_back(static_cast<int>(a));
  return out;
}

int BanditInstance::max_originals_per_agent() const {
  std::vector<int> count(static_cast<std::size_t>(num_agents()), 0);
  for (const auto& arm : arms_)
    if (arm.is_original()) ++count[static_cast<std::size_t>(arm.owner)];
  return count.empty() ? 0 : *std::max_element(count.begin(), count.end());
}

double BanditInstance::benchmark_mean() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& arm : arms_)
    if (arm.is_original()) best = std::max(best, arm.mean);
  return best;
}

std::vector<double> BanditInstance::means() const {
  std::vector<double> out;
  out.reserve(arms_.size());
  for (const auto& arm : arms_) out.push_back(arm.mean);
  return out;
}

bool BanditInstance::all_deterministic() const {
  return std::all_of(arms_.begin(), arms_.end(),
                     [](const ArmSpec& a) { return a.reward_model == RewardModel::Deterministic; });
}

bool BanditInstance::effectively_deterministic() const {
  return std::all_of(arms_.begin(), arms_.end(), [](const ArmSpec& a) {
    return a.reward_model == RewardModel::Deterministic || a.mean == 0.0 || a.mean == 1.0;
  });
}

BanditInstance build_registered_instance(std::span<const double> original_means,
                                         const ReplicationVector& r, RewardModel model, int owner) {
  if (original_means.size() != r.size())
    throw ConfigError("means and replication vector differ in length");
  std::vector<ArmSpec> arms;
  arms.reserve(r.registered_arms());
  for (std::size_t a = 0; a < original_means.size(); ++a) {
    const double mu = original_means[a];
    if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("arm mean outside [0,1]");
    arms.push_back({mu, model, owner, static_cast<int>(a), 0});
  }
  for (std::size_t a = 0; a < original_means.size(); ++a)
    for (int c = 1; c <= r[a]; ++c) arms.push_back({original_means[a], model, owner, static_cast<int>(a), c});
  return BanditInstance(std::move(arms));
}

BanditInstance build_multi_agent_instance(const std::vector<std::vector<double>>& means,
                                          const std::vector<ReplicationVector>& replication,
                                          RewardModel model) {
  if (means.size() != replication.size())
    throw ConfigError("one replication vector per agent is required");
  std::vector<ArmSpec> arms;
  for (std::size_t i = 0; i < means.size(); ++i) {
    auto part = build_registered_instance(means[i], replication[i], model, static_cast<int>(i));
    arms.insert(arms.end(), part.arms().begin(), part.arms().end());
  }
  return BanditInstance(std::move(arms));
}

// ---------------------------------------------------------------------------
// Dictionary form

int DictionaryForm::total_arms() const {
  int total = 0;
  for (const auto& e : entries) total += e.count;
  return total;
}

DictionaryForm dictionary_form(const BanditInstance& instance) {
  if (!instance.realized()) throw DomainError("dictionary form needs a realized instance");
  std::map<double, int, std::greater<>> counts;
  for (const auto& arm : instance.arms()) ++counts[arm.mean];
  DictionaryForm d;
  for (const auto& [mean, count] : counts) d.entries.push_back({mean, count});
  return d;
}

BanditInstance instance_from_dictionary(const DictionaryForm& d, RewardModel model) {
  std::vector<ArmSpec> arms;
  int index = 0;
  for (const auto& e : d.entries)
    for (int c = 0; c < e.count; ++c) arms.push_back({e.mean, model, 0, index++, 0});
  return BanditInstance(std::move(arms));
}

// ---------------------------------------------------------------------------
// Permutations

Permutation::Permutation(std::vector<int> map) : map_(std::move(map)) {
  std::vector<char> hit(map_.size(), 0);
  for (int v : map_) {
    if (v < 0 || static_cast<std::size_t>(v) >= map_.size() || hit[static_cast<std::size_t>(v)])
      throw DomainError("permutation map is not a bijection");
    hit[static_cast<std::size_t>(v)] = 1;
  }
}

Permutation Permutation::identity(std::size_t l) {
  std::vector<int> map(l);
  std::iota(map.begin(), map.end(), 0);
  return Permutation(std::move(map));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(map_.size());
  for (std::size_t a = 0; a < map_.size(); ++a) inv[static_cast<std::size_t>(map_[a])] = static_cast<int>(a);
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.size() != size()) throw DomainError("composing permutations of different arity");
  std::vector<int> out(size());
  for (std::size_t a = 0; a < size(); ++a) out[a] = apply(other.apply(static_cast<int>(a)));
  return Permutation(std::move(out));
}

bool Permutation::is_identity() const {
  for (std::size_t a = 0; a < map_.size(); ++a)
    if (map_[a] != static_cast<int>(a)) return false;
  return true;
}

Permutation random_permutation(std::size_t l, std::uint64_t seed) {
  std::vector<int> map(l);
  std::iota(map.begin(), map.end(), 0);
  std::uint64_t state = seed;
  for (std::size_t i = l; i > 1; --i) {
    state = splitmix64(state);
    std::swap(map[i - 1], map[static_cast<std::size_t>(state % i)]);
  }
  return Permutation(std::move(map));
}

std::vector<Permutation> enumerate_permutations(std::size_t l) {
  if (l < 1) throw DomainError("permutation arity must be positive");
  if (l > kMaxEnumeratedPermutationSize)
    throw BudgetError("exact permutation enumeration is capped at l = 8; use sampled permutations");
  std::vector<int> map(l);
  std::iota(map.begin(), map.end(), 0);
  std::vector<Permutation> out;
  do {
    out.emplace_back(map);
  } while (std::next_permutation(map.begin(), map.end()));
  return out;
}

DictionaryForm permute_instance(const DictionaryForm& d, const Permutation& sigma) {
  if (sigma.size() != d.entries.size()) throw ConfigError("permutation arity differs from dictionary size");
  DictionaryForm out = d;
  for (std::size_t a = 0; a < d.entries.size(); ++a)
    out.entries[a].count = d.entries[static_cast<std::size_t>(sigma(static_cast<int>(a)))].count;
  return out;
}

// ---------------------------------------------------------------------------
// TieBreakPriority

TieBreakPriority::TieBreakPriority(std::vector<int> order) : order_(std::move(order)) {
  rank_.assign(order_.size(), -1);
  for (std::size_t pos = 0; pos < order_.size(); ++pos) {
    const int v = order_[pos];
    if (v < 0 || static_cast<std::size_t>(v) >= order_.size() || rank_[static_cast<std::size_t>(v)] != -1)
      throw DomainError("tie-break priority is not a permutation");
    rank_[static_cast<std::size_t>(v)] = static_cast<int>(pos);
  }
}

TieBreakPriority TieBreakPriority::identity(std::size_t n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  return TieBreakPriority(std::move(order));
}

TieBreakPriority TieBreakPriority::relabelled(const Permutation& sigma) const {
  if (sigma.size() != size()) throw ConfigError("permutation arity differs from priority size");
  std::vector<int> order(order_.size());
  for (std::size_t pos = 0; pos < order_.size(); ++pos) order[pos] = sigma(order_[pos]);
  return TieBreakPriority(std::move(order));
}

// ---------------------------------------------------------------------------
// Counter-based draws

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t absorb(std::uint64_t state, std::uint64_t word) { return splitmix64(state ^ splitmix64(word)); }

double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

constexpr std::uint64_t kArmDomain = 0x41524d5f54415045ULL;     // "ARM_TAPE"
constexpr std::uint64_t kPolicyDomain = 0x504f4c5f54415045ULL;  // "POL_TAPE"

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return absorb(absorb(0x5eed5eed5eed5eedULL, master), index);
}

double RewardTape::arm_draw(const ArmIdentity& arm, std::uint64_t pull_index) const {
  std::uint64_t h = absorb(seed_, kArmDomain);
  h = absorb(h, static_cast<std::uint64_t>(arm.owner));
  h = absorb(h, static_cast<std::uint64_t>(arm.original_index));
  h = absorb(h, static_cast<std::uint64_t>(arm.replica_ordinal));
  return to_unit(absorb(h, pull_index));
}

double RewardTape::policy_draw(std::uint64_t round, std::uint64_t slot) const {
  std::uint64_t h = absorb(seed_, kPolicyDomain);
  h = absorb(h, round);
  return to_unit(absorb(h, slot));
}

}  // namespace rpb
