#pragma once

// Pricing, savings attribution and carbon accounting, per VM and over a
// workload population.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wi/hints.hpp"
#include "wi/optimizers.hpp"
#include "wi/types.hpp"

namespace wi {

// ---------------------------------------------------------------------------
// Pricing

struct PriceBook {
    double base_per_core_hour = 1.0;
    double spot_factor = 0.15;
    double madc_factor = 0.60;
    double oversub_factor = 0.85;
    double nonpreprov_factor = 0.98;
    double underclock_factor = 0.99;
    /// Added per overclocked core-hour, as a fraction of the base rate.
    double overclock_surcharge = 0.15;
};

/// Multiplicative factor for the optimizations priced as a fixed fraction
/// of the regular price; 1.0 for the rest.
double price_factor(const PriceBook& book, OptimizationId id);

struct UsageRecord {
    std::int64_t cores = 1;          // size actually billed (after rightsizing)
    double vm_hours = 1.0;           // hours actually running (after auto-scaling)
    double region_price_factor = 1.0;
    double harvested_core_hours = 0.0;
    double overclocked_core_hours = 0.0;
};

class IncompatibleSet : public Error {
public:
    using Error::Error;
};

/// Optimizations that contend for the same resource; a VM may use at most
/// one member of each group.
struct CompatibilityGroup {
    std::string name;
    OptimizationSet members;
};

const std::vector<CompatibilityGroup>& compatibility_groups();

/// Throws IncompatibleSet when two members of one group are both present.
void check_compatible(OptimizationSet active);

double vm_price(const PriceBook& book, OptimizationSet active, const UsageRecord& usage);

// ---------------------------------------------------------------------------
// Population savings

/// Average fractional cost reduction an owner gets from each optimization.
double owner_benefit(OptimizationId id);

struct WorkloadProfile {
    WorkloadId id;
    std::int64_t cores = 1;
    HintSet hints;
    UtilStats util;
};

/// Keeps the highest-benefit member of each compatibility group (ties go to
/// the lower priority number).
OptimizationSet best_compatible(OptimizationSet eligible);

/// Optimizations in decreasing owner-benefit order, ties by priority.
std::vector<OptimizationId> attribution_order();

/// 1 - prod(1 - benefit) over the best compatible subset.
double set_savings(OptimizationSet eligible);

struct SavingsReport {
    std::map<OptimizationId, double> contribution_pp;  // percentage points
    double total_pct = 0.0;
    double regular_cost = 0.0;
    double discounted_cost = 0.0;
    std::vector<OptimizationId> order;

    double contribution(OptimizationId id) const;
};

SavingsReport savings_breakdown(std::span<const WorkloadProfile> population,
                                const EligibilityThresholds& t = {});

// ---------------------------------------------------------------------------
// Carbon

struct CarbonRegion {
    RegionId id;
    double carbon_g_per_kwh = 0.0;
};

class MissingIntensity : public Error {
public:
    using Error::Error;
};

/// Default table: home region at 546 g/kWh and a 10th-percentile region at
/// 267 g/kWh.
std::vector<CarbonRegion> default_carbon_regions();
inline constexpr const char* kDefaultHomeRegion = "home";

/// Nearest-rank 10th percentile intensity of the table.
double low_carbon_intensity(std::span<const CarbonRegion> regions);

/// Fractional reduction for cores moved from `from` to `to`.
double migration_reduction(double from_g_per_kwh, double to_g_per_kwh);

/// Fraction of core-hours that remains after an optimization that reduces
/// VM count or size (Rightsizing 0.5, AutoScaling 0.81, Oversubscription
/// 0.85); 1.0 for others.
double core_hour_factor(OptimizationId id);

struct CarbonReport {
    double baseline_g = 0.0;
    double optimized_g = 0.0;
    double reduction_pct = 0.0;
    std::map<OptimizationId, double> contribution_pp;
};

CarbonReport carbon_report(std::span<const WorkloadProfile> population, std::span<const CarbonRegion> regions,
                           const RegionId& home_region, const EligibilityThresholds& t = {});

// ---------------------------------------------------------------------------
// Synthetic population from the survey marginals

struct SurveyCategory {
    std::string label;
    double weight = 0.0;  // percent of core usage
};

/// One independent categorical row of the survey.
struct SurveyRow {
    std::string characteristic;
    std::vector<SurveyCategory> categories;
};

const std::vector<SurveyRow>& survey_rows();

/// Utilization bands used when drawing UtilStats: idle, moderate, busy.
struct UtilBand {
    std::string label;
    double weight = 0.0;
    UtilStats util;
};

const std::vector<UtilBand>& util_bands();

/// Draws `n` workloads, each survey row independently. Cores per workload
/// are drawn from {2, 4, 8, 16}.
std::vector<WorkloadProfile> survey_population(std::size_t n, std::uint64_t seed);

}  // namespace wi
