#pragma once

#include <cstdint>
#include <vector>

#include "rpb/checkers.hpp"
#include "rpb/policies.hpp"

namespace rpb {

/// Arm-1 run lengths s_1 = 1, s_2, ... of UCB on the instance (1, 0).
struct RunLengthSchedule {
  double c = 1.0;
  std::vector<std::int64_t> s;  // s[0] is s_1

  std::int64_t at(int i) const { return s.at(static_cast<std::size_t>(i - 1)); }
};

inline constexpr std::int64_t kRunLengthScanCap = 10'000'000;

/// 1 + sqrt(c ln(s+i) / s) < sqrt(c ln(s+i) / i)
bool run_length_inequality(std::int64_t s, int i, double c);

/// Minimal s_i for i = 2..i_max by an upward integer scan.
RunLengthSchedule ucb_run_lengths(int i_max, const BonusConfig& bonus);

/// Lengths of the first `runs` maximal blocks of pulls of the mean-1 arm when
/// UCB runs on (1, 0), read off an actual trace.
std::vector<std::int64_t> ucb_observed_run_lengths(const BonusConfig& bonus, int runs);

/// Regrets of A = (1,0), B = (1,0,1'), C = (1,0,0') at horizon T (exact traces).
struct RegretTriple {
  double a = 0.0, b = 0.0, c = 0.0;
  bool violates() const { return a > (b + c) / 2.0; }
};

RegretTriple ucb_regret_triple(const BonusConfig& bonus, std::int64_t horizon);

/// Exact ex-ante utility gain of r = (1,0) over truthful, prior uniform{0,1}, l = 2.
double ucb_replication_gain(const BonusConfig& bonus, std::int64_t horizon, double alpha);

/// Certificate that UCB is not replication-proof. Tries T = s_1 + s_2 + 2 first,
/// then scans T = 1..horizon_cap for the first horizon with both a violated
/// regret triple and a strictly positive ex-ante gain. Throws SearchExhausted
/// if there is none.
Certificate ucb_failure_certificate(const BonusConfig& bonus, double alpha = 0.5,
                                    std::int64_t horizon_cap = 100'000);

struct HucbSearchSpec {
  double high = 1.0;        // agent 1's prior is uniform on {0, high}
  double grid_step = 0.01;  // agent 2's mean ranges over step, 2 step, ... < 1
  std::int64_t horizon_cap = 10'000;
  double alpha = 0.5;
  BonusConfig bonus{2.0};
  int threads = 0;
};

/// First (mu, T) in scan order (mu ascending, then T) at which replicating
/// agent 1's first arm strictly raises its exact ex-ante utility under H-UCB.
/// Returns a NoneFound certificate when the grid has no such point.
Certificate hucb_failure_search(const HucbSearchSpec& spec);

}  // namespace rpb
