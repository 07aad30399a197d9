#pragma once

// Joint eligibility distribution from partial statistics. Atoms are the
// 2^k subsets of the listed optimizations; constraints fix the mass of all
// atoms containing a given set (one optimization: marginal, two: pairwise,
// more: scenario). Two linear programs bound the total savings.

#include <string>
#include <vector>

#include "wi/accounting.hpp"
#include "wi/lp.hpp"
#include "wi/types.hpp"

namespace wi {

struct SetFraction {
    std::vector<OptimizationId> set;
    double fraction = 0.0;
};

struct JointConstraints {
    std::vector<OptimizationId> optimizations;  // atom bit i <-> optimizations[i]
    std::vector<double> marginals;              // one per optimization
    std::vector<SetFraction> pairwise;
    std::vector<SetFraction> scenarios;
};

struct JointEstimate {
    double min_savings = 0.0;
    double max_savings = 0.0;
    double independence_savings = 0.0;
    std::vector<double> joint;  // feasible atom masses (from the min program)
    std::size_t constraint_rows = 0;

    double width() const { return max_savings - min_savings; }
};

class JointInfeasible : public Error {
public:
    JointInfeasible(std::string message, std::vector<std::string> certificate);
    const std::vector<std::string>& certificate() const { return certificate_; }

private:
    std::vector<std::string> certificate_;
};

/// Savings of an atom: set_savings() of the optimizations in `mask`.
double atom_savings(const std::vector<OptimizationId>& optimizations, std::uint32_t mask);

/// Builds the equality program. Throws Error on malformed input (unknown or
/// duplicate optimizations, fractions outside [0,1]).
lp::Program build_joint_program(const JointConstraints& c);

/// Independence point estimate from the marginals alone.
double independence_savings(const JointConstraints& c);

/// Throws JointInfeasible with the violated combination.
JointEstimate estimate_joint(const JointConstraints& c);

/// Core-weighted eligibility statistics of a population over the ten
/// built-in optimizations: all marginals and pairwise fractions, plus every
/// set of three or more whose mass exceeds `scenario_threshold`.
JointConstraints constraints_from_population(std::span<const WorkloadProfile> population,
                                             double scenario_threshold = 0.05,
                                             const EligibilityThresholds& t = {});

}  // namespace wi
