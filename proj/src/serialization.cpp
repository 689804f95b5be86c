#include "rpb/serialization.hpp"

#include <charconv>

namespace rpb {

void require_known_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

namespace {

template <typename T>
T get_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get_field<T>(j, key, where) : fallback;
}

}  // namespace

void to_json(json& j, RewardModel model) { j = to_string(model); }

void from_json(const json& j, RewardModel& model) {
  if (!j.is_string()) throw ConfigError("reward_model: expected a string");
  model = reward_model_from_string(j.get<std::string>());
}

void to_json(json& j, const ReplicationVector& r) { j = r.counts(); }
void from_json(const json& j, ReplicationVector& r) { r = ReplicationVector(j.get<std::vector<int>>()); }

void to_json(json& j, const Permutation& p) { j = p.map(); }
void from_json(const json& j, Permutation& p) { p = Permutation(j.get<std::vector<int>>()); }

void to_json(json& j, const EpsSchedule& s) {
  j = json{{"denominator", s.mode == EpsDenominator::OverT ? "T" : "round"}, {"c", s.c}, {"d", s.d}};
  if (s.mode == EpsDenominator::OverT) j["horizon"] = s.horizon;
}

void from_json(const json& j, EpsSchedule& s) {
  const std::string where = "policy.eps";
  require_known_keys(j, {"denominator", "c", "d", "horizon"}, where);
  const auto denom = get_or<std::string>(j, "denominator", "T", where);
  if (denom == "T")
    s.mode = EpsDenominator::OverT;
  else if (denom == "round")
    s.mode = EpsDenominator::OverRound;
  else
    throw ConfigError(where + ".denominator: expected 'T' or 'round'");
  s.c = get_or<double>(j, "c", 11.0, where);
  s.d = get_or<double>(j, "d", 0.9, where);
  s.horizon = get_or<std::int64_t>(j, "horizon", 0, where);
}

void to_json(json& j, const PolicySpec& spec) {
  j = json{{"name", to_string(spec.kind)}};
  switch (spec.kind) {
    case PolicyKind::Ucb:
    case PolicyKind::Hucb: j["c"] = spec.bonus.c; break;
    case PolicyKind::Etc: j["m"] = spec.m; break;
    case PolicyKind::EpsGreedy: j["eps"] = spec.eps; break;
    case PolicyKind::PidEtc: break;
    case PolicyKind::Hetc:
      j["M"] = spec.M;
      j["m"] = spec.m;
      j["tau"] = spec.tau;
      break;
  }
}

void from_json(const json& j, PolicySpec& spec) {
  const std::string where = "policy";
  require_known_keys(j, {"name", "c", "m", "M", "tau", "eps"}, where);
  try {
    spec.kind = policy_kind_from_string(get_field<std::string>(j, "name", where));
  } catch (const ConfigError& e) {
    throw ConfigError(where + ".name: " + e.what());
  }
  spec.bonus.c = get_or<double>(j, "c", 2.0, where);
  spec.m = get_or<std::int64_t>(j, "m", 1, where);
  spec.M = get_or<std::int64_t>(j, "M", 1, where);
  spec.tau = get_or<std::int64_t>(j, "tau", 0, where);
  if (j.contains("eps")) spec.eps = j.at("eps").get<EpsSchedule>();
}

void to_json(json& j, const EvalMode& mode) {
  j = json{{"kind", mode.is_exact() ? "exact" : "mc"}};
  if (!mode.is_exact()) {
    j["reps"] = mode.reps;
    j["seed"] = mode.seed;
    if (mode.permutation_samples > 0) j["permutation_samples"] = mode.permutation_samples;
  }
}

void from_json(const json& j, EvalMode& mode) {
  const std::string where = "mode";
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "exact") {
      mode = EvalMode::exact();
      return;
    }
    if (s == "mc") {
      mode = EvalMode::monte_carlo(0, 0);
      return;
    }
    throw ConfigError(where + ": expected 'exact' or 'mc'");
  }
  require_known_keys(j, {"kind", "reps", "seed", "permutation_samples"}, where);
  const auto kind = get_field<std::string>(j, "kind", where);
  if (kind == "exact")
    mode = EvalMode::exact();
  else if (kind == "mc")
    mode = EvalMode::monte_carlo(get_or<std::int64_t>(j, "reps", 0, where), get_or<std::uint64_t>(j, "seed", 0, where));
  else
    throw ConfigError(where + ".kind: expected 'exact' or 'mc'");
  mode.permutation_samples = get_or<std::int64_t>(j, "permutation_samples", 0, where);
}

void to_json(json& j, const DiscretePrior& prior) { j = json{{"support", prior.support()}, {"probs", prior.probs()}}; }

void to_json(json& j, const AgentSpec& agent) {
  j = json{{"prior", agent.prior}, {"l", agent.num_originals}, {"r", agent.replication}};
}

void to_json(json& j, const ValueEstimate& v) {
  j = json{{"value", v.value}, {"exact", v.exact}, {"instances", v.instances}};
  if (!v.exact) j["std_error"] = v.std_error;
}

DiscretePrior prior_from_json(const json& j) {
  const std::string where = "prior";
  require_known_keys(j, {"support", "probs"}, where);
  auto support = get_field<std::vector<double>>(j, "support", where);
  if (!j.contains("probs")) return DiscretePrior::uniform(std::move(support));
  return DiscretePrior(std::move(support), get_field<std::vector<double>>(j, "probs", where));
}

AgentSpec agent_from_json(const json& j) {
  const std::string where = "agent";
  require_known_keys(j, {"prior", "l", "r"}, where);
  if (!j.contains("prior")) throw ConfigError(where + ": missing key 'prior'");
  auto prior = prior_from_json(j.at("prior"));
  const int l = get_field<int>(j, "l", where);
  const auto r = j.contains("r") ? get_field<ReplicationVector>(j, "r", where)
                                 : ReplicationVector::truthful(static_cast<std::size_t>(l));
  return AgentSpec(std::move(prior), l, r);
}

std::string format_number(double x) {
  if (x == static_cast<double>(static_cast<long long>(x)) && std::abs(x) < 1e15)
    return std::to_string(static_cast<long long>(x));
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace rpb
