#pragma once

// Population and joint-constraint input documents, and the report
// documents the savings tools emit.

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wi/accounting.hpp"
#include "wi/joint.hpp"
#include "wi/scenario.hpp"

namespace wi {

/// `{"workloads": [{"id", "cores", "hints": {...}, "util": {...}}]}`.
/// Missing hints are the conservative defaults; missing util fields are 0.
std::vector<WorkloadProfile> parse_population(const nlohmann::json& doc);
nlohmann::json population_to_json(std::span<const WorkloadProfile> population);

/// `{"optimizations": [...], "marginals": {name: f}, "pairwise": [{"set", "fraction"}],
/// "scenarios": [{"set", "fraction"}]}`.
JointConstraints parse_constraints(const nlohmann::json& doc);
nlohmann::json constraints_to_json(const JointConstraints& c);

nlohmann::json load_json(const std::string& path);

nlohmann::json to_json(const SavingsReport& r);
SavingsReport savings_from_json(const nlohmann::json& j);
/// `optimization,contribution_pp` rows in attribution order, then `total`.
std::string savings_csv(const SavingsReport& r);

nlohmann::json to_json(const CarbonReport& r);
nlohmann::json to_json(const JointEstimate& e);

}  // namespace wi
