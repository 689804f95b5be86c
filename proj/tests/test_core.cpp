#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "rpb/core.hpp"

using namespace rpb;

TEST_CASE("prior validation") {
  CHECK_THROWS_AS(DiscretePrior({0.2, 0.4}, {0.5, 0.4}), DomainError);    // does not sum to 1
  CHECK_THROWS_AS(DiscretePrior({0.2, 1.4}, {0.5, 0.5}), DomainError);    // support outside [0,1]
  CHECK_THROWS_AS(DiscretePrior({0.2, 0.4}, {1.2, -0.2}), DomainError);   // negative mass
  CHECK_THROWS_AS(DiscretePrior({0.2, 0.2}, {0.5, 0.5}), DomainError);    // repeated support point
  CHECK_THROWS_AS(DiscretePrior({0.2}, {0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(DiscretePrior({}, {}), DomainError);

  CHECK(DiscretePrior::uniform({0.0, 0.25, 1.0}).min_gap() == doctest::Approx(0.25));
  CHECK(std::isinf(DiscretePrior::point_mass(0.3).min_gap()));
  const auto u = DiscretePrior::uniform({0.0, 1.0});
  CHECK(u.probs() == std::vector<double>{0.5, 0.5});
}

TEST_CASE("replication vectors") {
  CHECK_THROWS_AS(ReplicationVector({1, -1}), DomainError);
  const ReplicationVector r({2, 0, 1});
  CHECK(r.l1() == 3);
  CHECK(r.registered_arms() == 6);
  CHECK_FALSE(r.is_truthful());
  CHECK(ReplicationVector::truthful(4).is_truthful());
}

TEST_CASE("strategy enumeration matches a brute-force count") {
  for (std::size_t l = 1; l <= 4; ++l)
    for (int budget = 0; budget <= 4; ++budget) {
      // brute force over the box [0, budget]^l
      std::size_t expected = 0;
      std::vector<int> v(l, 0);
      while (true) {
        int s = 0;
        for (int x : v) s += x;
        if (s <= budget) ++expected;
        std::size_t i = 0;
        while (i < l && ++v[i] > budget) v[i++] = 0;
        if (i == l) break;
      }
      const auto all = enumerate_strategies(l, budget);
      CHECK(all.size() == expected);
      CHECK(all.front().is_truthful());
      std::set<std::vector<int>> distinct;
      for (const auto& r : all) {
        CHECK(r.l1() <= budget);
        distinct.insert(r.counts());
      }
      CHECK(distinct.size() == all.size());
      for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].l1() <= all[i].l1());
    }
  CHECK_THROWS_AS(enumerate_strategies(2, -1), DomainError);
}

TEST_CASE("registered instance ordering") {
  const std::vector<double> means{1.0, 0.0};
  const auto b = build_registered_instance(means, ReplicationVector({1, 0}), RewardModel::Deterministic);
  REQUIRE(b.size() == 3);
  CHECK(b.means() == std::vector<double>{1.0, 0.0, 1.0});
  CHECK(b.arm(2).replica_ordinal == 1);
  CHECK(b.arm(2).original_index == 0);
  CHECK(b.arm(0).is_original());

  const auto c = build_registered_instance(means, ReplicationVector({0, 2}), RewardModel::Bernoulli, 3);
  CHECK(c.means() == std::vector<double>{1.0, 0.0, 0.0, 0.0});
  CHECK(c.arm(3).identity() == ArmIdentity{3, 1, 2});
  CHECK(c.benchmark_mean() == 1.0);

  const std::vector<double> bad{0.5, 1.5};
  CHECK_THROWS_AS(build_registered_instance(bad, ReplicationVector({0, 0}), RewardModel::Bernoulli), DomainError);
  CHECK_THROWS_AS(build_registered_instance(means, ReplicationVector({0}), RewardModel::Bernoulli), ConfigError);
}

TEST_CASE("multi-agent instance") {
  const auto inst = build_multi_agent_instance({{0.9, 0.1}, {0.5}},
                                               {ReplicationVector({1, 0}), ReplicationVector({0})},
                                               RewardModel::Bernoulli);
  CHECK(inst.size() == 4);
  CHECK(inst.num_agents() == 2);
  CHECK(inst.arms_of(0) == std::vector<int>{0, 1, 2});
  CHECK(inst.arms_of(1) == std::vector<int>{3});
  CHECK(inst.max_originals_per_agent() == 2);
  CHECK_FALSE(inst.effectively_deterministic());
  CHECK(build_multi_agent_instance({{1.0, 0.0}}, {ReplicationVector({0, 0})}, RewardModel::Bernoulli)
            .effectively_deterministic());
}

TEST_CASE("dictionary form") {
  const std::vector<double> means{0.9, 0.5, 0.1};
  const auto inst = build_registered_instance(means, ReplicationVector({2, 0, 1}), RewardModel::Deterministic);
  const auto d = dictionary_form(inst);
  CHECK(d == DictionaryForm{{{0.9, 3}, {0.5, 1}, {0.1, 2}}});
  CHECK(d.total_arms() == 6);
  CHECK(dictionary_form(instance_from_dictionary(d, RewardModel::Deterministic)) == d);
}

TEST_CASE("permuting a dictionary") {
  const DictionaryForm d{{{1.0, 2}, {0.0, 1}}};
  const Permutation swap({1, 0});
  CHECK(permute_instance(d, swap) == DictionaryForm{{{1.0, 1}, {0.0, 2}}});
  CHECK(permute_instance(d, Permutation::identity(2)) == d);
  CHECK_THROWS_AS(permute_instance(d, Permutation::identity(3)), ConfigError);
}

TEST_CASE("permutation group laws") {
  CHECK_THROWS_AS(Permutation({0, 0}), DomainError);
  CHECK_THROWS_AS(Permutation({0, 2}), DomainError);
  for (std::size_t l = 1; l <= 6; ++l) {
    const auto all = enumerate_permutations(l);
    std::size_t fact = 1;
    for (std::size_t i = 2; i <= l; ++i) fact *= i;
    CHECK(all.size() == fact);
    CHECK(all.front().is_identity());
    CHECK(std::is_sorted(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.map() < b.map(); }));
    for (std::size_t i = 0; i < std::min<std::size_t>(all.size(), 30); ++i) {
      const auto& p = all[i];
      CHECK(p.compose(p.inverse()).is_identity());
      CHECK(p.inverse().compose(p).is_identity());
      const auto& q = all[(i * 7 + 3) % all.size()];
      const auto& s = all[(i * 11 + 1) % all.size()];
      CHECK(p.compose(q).compose(s) == p.compose(q.compose(s)));
    }
  }
  CHECK_THROWS_AS(enumerate_permutations(9), BudgetError);
}

TEST_CASE("permute_instance is a group action") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t l = 2 + trial % 4;
    DictionaryForm d;
    for (std::size_t a = 0; a < l; ++a) d.entries.push_back({1.0 - 0.1 * static_cast<double>(a), 1 + int(gen() % 4)});
    const auto s = random_permutation(l, gen());
    const auto t = random_permutation(l, gen());
    // entry a takes count of entry s(a): applying t then s gives entry a the count of t(s(a))
    CHECK(permute_instance(permute_instance(d, t), s) == permute_instance(d, t.compose(s)));
    CHECK(permute_instance(permute_instance(d, s), s.inverse()) == d);
  }
}

TEST_CASE("random permutations") {
  CHECK(random_permutation(5, 42) == random_permutation(5, 42));
  std::set<std::vector<int>> seen;
  for (std::uint64_t s = 0; s < 2000; ++s) seen.insert(random_permutation(3, s).map());
  CHECK(seen.size() == 6);
}

TEST_CASE("tie-break priority") {
  const TieBreakPriority p({2, 0, 1});
  CHECK(p.rank(2) == 0);
  CHECK(p.prefers(0, 1));
  CHECK_FALSE(p.prefers(1, 2));
  // sigma(a) inherits a's rank
  const Permutation sigma({1, 2, 0});
  const auto q = p.relabelled(sigma);
  for (int a = 0; a < 3; ++a) CHECK(q.rank(sigma(a)) == p.rank(a));
  CHECK_THROWS_AS(TieBreakPriority({0, 0}), DomainError);
}

TEST_CASE("reward tape is a pure function of its key") {
  const RewardTape tape(99);
  const ArmIdentity a{0, 1, 0};
  CHECK(tape.arm_draw(a, 17) == RewardTape(99).arm_draw(a, 17));
  CHECK(tape.arm_draw(a, 17) != tape.arm_draw(a, 18));
  CHECK(tape.arm_draw(a, 17) != tape.arm_draw({0, 1, 1}, 17));
  CHECK(tape.arm_draw(a, 17) != RewardTape(100).arm_draw(a, 17));
  CHECK(derive_seed(5, 1) != derive_seed(5, 2));
}

TEST_CASE("reward tape uniformity (chi-square)") {
  const RewardTape tape(12345);
  constexpr int kBins = 10;
  constexpr int kDraws = 100000;
  std::vector<int> counts(kBins, 0);
  std::vector<int> joint(16, 0);
  for (int i = 0; i < kDraws; ++i) {
    const double u = tape.arm_draw({0, 0, 0}, static_cast<std::uint64_t>(i));
    const double v = tape.arm_draw({0, 0, 1}, static_cast<std::uint64_t>(i));
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    ++counts[static_cast<int>(u * kBins)];
    ++joint[static_cast<int>(u * 4) * 4 + static_cast<int>(v * 4)];
  }
  auto chi2 = [](const std::vector<int>& c, double expected) {
    double s = 0.0;
    for (int x : c) s += (x - expected) * (x - expected) / expected;
    return s;
  };
  // 99.9% quantiles: 27.9 (9 dof), 37.7 (15 dof)
  CHECK(chi2(counts, kDraws / double(kBins)) < 27.9);
  CHECK(chi2(joint, kDraws / 16.0) < 37.7);  // replica draws independent of the original's
}

TEST_CASE("benchmark ignores replicas") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> means(1 + trial % 4);
    for (auto& m : means) m = unif(gen);
    std::vector<int> r(means.size());
    for (auto& x : r) x = int(gen() % 3);
    const auto base = build_registered_instance(means, ReplicationVector::truthful(means.size()), RewardModel::Bernoulli);
    const auto inst = build_registered_instance(means, ReplicationVector(r), RewardModel::Bernoulli);
    CHECK(inst.benchmark_mean() == base.benchmark_mean());
    CHECK(inst.benchmark_mean() == *std::max_element(means.begin(), means.end()));
    for (const auto& arm : inst.arms()) CHECK(arm.mean == means[static_cast<std::size_t>(arm.original_index)]);
  }
}
