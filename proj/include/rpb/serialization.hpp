#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "rpb/core.hpp"
#include "rpb/metrics.hpp"
#include "rpb/policies.hpp"

namespace rpb {

using json = nlohmann::json;

/// Throws ConfigError naming `where` and the first key of `j` outside `allowed`.
void require_known_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where);

void to_json(json& j, RewardModel model);
void from_json(const json& j, RewardModel& model);

void to_json(json& j, const ReplicationVector& r);
void from_json(const json& j, ReplicationVector& r);

void to_json(json& j, const Permutation& p);
void from_json(const json& j, Permutation& p);

void to_json(json& j, const EpsSchedule& s);
void from_json(const json& j, EpsSchedule& s);

/// {"name": "hetc", "M": .., "m": .., "tau": .., "c": .., "eps": {...}}; only the
/// keys the named policy uses are written.
void to_json(json& j, const PolicySpec& spec);
void from_json(const json& j, PolicySpec& spec);

void to_json(json& j, const EvalMode& mode);
void from_json(const json& j, EvalMode& mode);

void to_json(json& j, const DiscretePrior& prior);
void to_json(json& j, const AgentSpec& agent);
void to_json(json& j, const ValueEstimate& v);

DiscretePrior prior_from_json(const json& j);
AgentSpec agent_from_json(const json& j);

/// Number formatting shared by CSV writers: shortest text that round-trips.
std::string format_number(double x);

}  // namespace rpb
