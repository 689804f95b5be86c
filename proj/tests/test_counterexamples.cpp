#include <doctest.h>

#include <cmath>

#include "rpb/counterexamples.hpp"
#include "rpb/metrics.hpp"

using namespace rpb;

namespace {

// Independent scan: smallest s >= 1 with 1 + sqrt(c ln(s+i)/s) < sqrt(c ln(s+i)/i).
std::int64_t scan(int i, double c) {
  for (std::int64_t s = 1;; ++s) {
    const double lg = std::log(double(s + i));
    if (1.0 + std::sqrt(c * lg / double(s)) < std::sqrt(c * lg / double(i))) return s;
  }
}

}  // namespace

TEST_CASE("run-length schedule") {
  const auto s1 = ucb_run_lengths(5, {1.0});
  REQUIRE(s1.s.size() == 5);
  CHECK(s1.at(1) == 1);
  for (int i = 2; i <= 5; ++i) CHECK(s1.at(i) == scan(i, 1.0));
  CHECK(s1.at(2) == 33);
  CHECK(ucb_run_lengths(2, {2.0}).at(2) == scan(2, 2.0));
  for (int i = 2; i <= 5; ++i) {
    CHECK(s1.at(i) > s1.at(i - 1));
    CHECK(s1.at(i) >= i);
    CHECK_FALSE(run_length_inequality(s1.at(i) - 1, i, 1.0));
    CHECK(run_length_inequality(s1.at(i), i, 1.0));
  }
  CHECK_THROWS_AS(ucb_run_lengths(1, {1.0}), ConfigError);
  CHECK_THROWS_AS(ucb_run_lengths(3, {0.0}), ConfigError);
}

TEST_CASE("observed run lengths come from the trace") {
  // arm-1 blocks of UCB(c=1) on (1,0), read off a reference replay
  CHECK(ucb_observed_run_lengths({1.0}, 4) == std::vector<std::int64_t>{1, 8, 24, 55});
  CHECK(ucb_observed_run_lengths({2.0}, 2) == std::vector<std::int64_t>{1, 4});
}

TEST_CASE("trace conformance with the run-length schedule" * doctest::should_fail()) {
  // The schedule's inequality uses ln(s_i + i) with s_i the current run
  // length; UCB's index uses the round number and the cumulative count, so
  // the observed blocks (1, 8, 24, 55, ...) do not follow (1, 33, 89, 213, ...).
  const auto sched = ucb_run_lengths(4, {1.0});
  CHECK(ucb_observed_run_lengths({1.0}, 4) == sched.s);
}

TEST_CASE("regret triple") {
  const auto c2 = ucb_regret_triple({2.0}, 7);
  CHECK(c2.a == 2.0);
  CHECK(c2.b == 1.0);
  CHECK(c2.c == 2.0);
  CHECK(c2.violates());

  const auto s = ucb_run_lengths(2, {1.0});
  const auto c1 = ucb_regret_triple({1.0}, s.at(1) + s.at(2) + 2);
  CHECK_FALSE(c1.violates());  // A = (1,0) already pulled the zero arm a third time
}

TEST_CASE("replication gain") {
  // uniform {0,1}: only the (1,0) realization differs, by one pull of the 1-arm
  CHECK(ucb_replication_gain({2.0}, 7, 0.4) == doctest::Approx(0.25 * 0.4));
  CHECK(ucb_replication_gain({2.0}, 1, 0.5) == 0.0);
}

TEST_CASE("failure certificate for c=2") {
  const auto cert = ucb_failure_certificate({2.0}, 0.4, 1000);
  CHECK(cert.kind == CertificateKind::BestResponseDeviation);
  CHECK(cert.outcome == Outcome::Holds);
  const auto& r = cert.payload["result"];
  CHECK(r["T"].get<int>() == 7);
  CHECK(r["regret"] == json({{"A", 2.0}, {"B", 1.0}, {"C", 2.0}}));
  CHECK(r["ex_ante_gain_per_alpha"].get<double>() == doctest::Approx(0.25));
}

TEST_CASE("no witness for c=1 within a small cap") {
  CHECK_THROWS_AS(ucb_failure_certificate({1.0}, 0.5, 2000), SearchExhausted);
}

TEST_CASE("h-ucb search") {
  HucbSearchSpec spec;
  spec.horizon_cap = 200;
  const auto cert = hucb_failure_search(spec);
  REQUIRE(cert.kind == CertificateKind::BestResponseDeviation);
  CHECK(cert.outcome == Outcome::Holds);
  CHECK(cert.payload["result"]["gain"].get<double>() > 0.0);

  HucbSearchSpec coarse;
  coarse.horizon_cap = 3;
  coarse.grid_step = 0.25;
  CHECK(hucb_failure_search(coarse).kind == CertificateKind::NoneFound);
  CHECK_THROWS_AS(hucb_failure_search({0.0}), DomainError);
}

TEST_CASE("h-ucb: realizations (c,c) and (0,0) gain nothing from a replica") {
  const auto policy = PolicySpec::hucb(2.0);
  for (double c : {0.0, 0.3, 1.0})
    for (double mu : {0.2, 0.7})
      for (std::int64_t T : {10, 57, 300}) {
        auto u = [&](const ReplicationVector& r) {
          const auto inst = build_multi_agent_instance({{c, c}, {mu}}, {r, ReplicationVector({0})}, RewardModel::Deterministic);
          return agent_utilities(run_deterministic_trace(make_run(inst, policy, T)), 0.5).per_agent[0];
        };
        CHECK(u(ReplicationVector({1, 0})) == doctest::Approx(u(ReplicationVector({0, 0}))));
      }
}

TEST_CASE("h-ucb: against a mean-1 opponent a replica stops paying once play settles") {
  const auto policy = PolicySpec::hucb(2.0);
  const auto prior = DiscretePrior::uniform({0.0, 1.0});
  auto gain = [&](std::int64_t T) {
    auto u = [&](const ReplicationVector& r) {
      std::vector<AgentSpec> agents{AgentSpec(prior, 2, r), AgentSpec(DiscretePrior::point_mass(1.0), 1, ReplicationVector({0}))};
      return ex_ante_utility(agents, 0, policy, RewardModel::Deterministic, T, 0.5, EvalMode::exact()).value;
    };
    return u(ReplicationVector({1, 0})) - u(ReplicationVector({0, 0}));
  };
  // early rounds still leave room for a small gain
  CHECK(gain(20) > 0.0);
  for (std::int64_t T : {500, 1000, 2000, 5000}) CHECK(gain(T) < 0.0);
}
