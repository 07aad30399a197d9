#pragma once

// Decision logic of the optimization managers. Each function is a pure
// decision step: it reads hints and platform state and returns claims,
// actions, and the notifications the optimization publishes. Effects are
// applied by the caller after arbitration.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wi/arbiter.hpp"
#include "wi/hints.hpp"
#include "wi/types.hpp"

namespace wi::opt {

// ---------------------------------------------------------------------------
// Frequency levels: -2..+2 map to 0.6, 0.8, 1.0, 1.15, 1.3 x nominal.

inline constexpr int kMinFrequencyLevel = -2;
inline constexpr int kMaxFrequencyLevel = 2;

double frequency_multiplier(int level);

// ---------------------------------------------------------------------------
// Auto-scaling

struct ThresholdPolicy {
    double threshold_pct = 40.0;
    int min_count = 1;
    int max_count = 1'000;
};

struct ScheduleWindow {
    TimeMs start_of_day_ms = 0;  // inclusive
    TimeMs end_of_day_ms = 0;    // exclusive
    int count = 1;
};

struct SchedulePolicy {
    std::vector<ScheduleWindow> windows;
    int default_count = 1;
};

using AutoscalePolicy = std::variant<ThresholdPolicy, SchedulePolicy>;

inline constexpr TimeMs kDayMs = 24LL * 3600 * 1000;

struct ScaleAction {
    int current = 0;
    int target = 0;
    bool via_preprovision_pool = false;

    bool scales_out() const { return target > current; }
};

/// Threshold policies use the mean of `load_series` (CPU %); an empty series
/// keeps the current count. Scale-outs of workloads with strict deployment
/// time are served from the pre-provisioned pool.
ScaleAction autoscale_tick(std::span<const double> load_series, const AutoscalePolicy& policy,
                           int current_count, TimeMs clock_ms, bool strict_deploy_time = false);

// ---------------------------------------------------------------------------
// Spot reclaim

struct SpotCandidate {
    VmId vm_id;
    WorkloadId workload;
    std::int64_t cores = 0;
    TimeMs created_at_ms = 0;
    PreemptionPriority priority = PreemptionPriority::Normal;
};

/// Preemption budget of one workload: at most
/// floor(vm_count * preemptibility_pct / 100) VMs preempted concurrently.
struct WorkloadBudget {
    int vm_count = 0;
    int preemptibility_pct = 0;
    int already_preempted = 0;

    int remaining() const;
};

struct ReclaimPlan {
    std::vector<VmId> evictions;
    std::int64_t freed_cores = 0;
    bool insufficient_capacity = false;
    std::vector<PlatformNotification> notifications;
};

/// Eviction order: Low, Normal, High; youngest first within a class.
/// Candidates whose workload has no budget entry are never evicted.
std::vector<std::size_t> eviction_order(std::span<const SpotCandidate> candidates);

ReclaimPlan spot_reclaim(std::int64_t demanded_cores, std::span<const SpotCandidate> candidates,
                         const std::map<WorkloadId, WorkloadBudget>& budgets, TimeMs now_ms,
                         TimeMs notice_ms = kDefaultEvictionNoticeMs);

// ---------------------------------------------------------------------------
// Harvest VMs

struct HarvestVm {
    VmId vm_id;
    std::int64_t base_cores = 0;
    std::int64_t harvested_cores = 0;
    ScalePreference preference = ScalePreference::Neutral;
};

struct HarvestAction {
    VmId vm_id;
    std::int64_t delta = 0;
    std::int64_t new_cores = 0;
};

struct HarvestPlan {
    std::vector<HarvestAction> actions;
    std::int64_t deficit_cores = 0;      // shrink demand left for spot_reclaim
    std::int64_t unallocated_cores = 0;  // spare nobody wants to grow into
    std::vector<PlatformNotification> notifications;

    std::int64_t net_change() const;
};

/// Grow into `delta_spare` > 0 or give back -`delta_spare` cores.
HarvestPlan harvest_rebalance(std::int64_t delta_spare, std::span<const HarvestVm> vms, TimeMs now_ms);

// ---------------------------------------------------------------------------
// Over- and underclocking. Budgets are in boosted-core-slots: one core at
// +1 for one interval is one slot, +2 is two.

struct FrequencyCandidate {
    VmId vm_id;
    WorkloadId owner;
    std::int64_t cores = 0;
    PreemptionPriority priority = PreemptionPriority::Normal;
    int requested_level = 1;
    double util_pct = 0.0;
    bool eligible = false;
};

struct FrequencyDecision {
    std::vector<ResourceClaim> claims;
    std::vector<PlatformNotification> notifications;
};

/// Boosts High-priority VMs first, then Normal; Low-priority VMs are not
/// boosted. Grants within a class are a fair share of the slot budget.
FrequencyDecision overclock_decide(std::int64_t power_budget_slots, std::int64_t reliability_budget_slots,
                                   std::span<const FrequencyCandidate> candidates, TimeMs now_ms);

struct UnderclockConfig {
    double idle_threshold_pct = 10.0;
    double carbon_idle_threshold_pct = 30.0;
    TimeMs notice_lead_ms = 1'000;
};

FrequencyDecision underclock_decide(bool carbon_pressure, std::span<const FrequencyCandidate> candidates,
                                    TimeMs now_ms, const UnderclockConfig& config = {});

// ---------------------------------------------------------------------------
// Pre-provisioning

struct PreprovisionInput {
    WorkloadId workload;
    std::int64_t deploy_time_ms = 0;
    int forecast_scale_out_vms = 0;
    std::int64_t cores_per_vm = 1;
};

struct PreprovisionDecision {
    int pool_vms = 0;
    std::int64_t pool_cores = 0;
    std::optional<ResourceClaim> claim;
};

PreprovisionDecision preprovision_policy(std::span<const PreprovisionInput> workloads, TimeMs now_ms,
                                         const EligibilityThresholds& t = {});

// ---------------------------------------------------------------------------
// Region-agnostic placement

struct RegionEntry {
    RegionId region_id;
    double price_factor = 1.0;
    double carbon_g_per_kwh = 0.0;
};

struct RegionChoice {
    RegionId region;
    bool moved = false;
    double score = 0.0;
};

class EmptyRegionTable : public Error {
public:
    using Error::Error;
};

/// Minimizes w * normalized price + (1 - w) * normalized carbon, both
/// min-max normalized over the table. Non-eligible workloads stay home.
RegionChoice region_place(bool region_agnostic, const RegionId& home, std::span<const RegionEntry> regions,
                          double price_weight);

// ---------------------------------------------------------------------------
// Oversubscription

struct OversubVm {
    VmId vm_id;
    bool eligible = false;
    PreemptionPriority priority = PreemptionPriority::Normal;
    double cpu_demand_cores = 0.0;
};

struct OversubConfig {
    double cpu_ratio = 1.5;
    double memory_ratio = 1.2;
};

struct ThrottleAction {
    VmId vm_id;
    double cores = 0.0;
};

struct OversubDecision {
    double cpu_ratio = 1.0;
    double memory_ratio = 1.0;
    bool contention = false;
    std::vector<ThrottleAction> throttles;
};

OversubDecision oversub_admit(double physical_cores, std::span<const OversubVm> vms,
                              const OversubConfig& config = {});

// ---------------------------------------------------------------------------
// Rightsizing

struct UtilSample {
    TimeMs time_ms = 0;
    double cpu_pct = 0.0;
    double memory_pct = 0.0;
    double disk_pct = 0.0;
};

struct RightsizeConfig {
    TimeMs window_ms = kDayMs;
    double downsize_below_pct = 50.0;
    double upsize_at_pct = 90.0;
};

struct RightsizeResult {
    bool resize = false;
    std::int64_t new_cores = 0;
    bool automated = false;  // otherwise a recommendation record only
    std::string reason;
};

class InsufficientHistory : public Error {
public:
    using Error::Error;
};

RightsizeResult rightsize_recommend(std::span<const UtilSample> history, std::int64_t current_cores,
                                    const HintSet& hints, const RightsizeConfig& config = {},
                                    const EligibilityThresholds& t = {});

// ---------------------------------------------------------------------------
// Multi-availability datacenter power events.
//
// Power model: a server draws power proportional to the sum over its VMs of
// cores x frequency multiplier. Throttling a VM from level a to b sheds
// cores x (m(a) - m(b)); evicting it sheds cores x m(current level).

struct MadcVm {
    VmId vm_id;
    WorkloadId workload;
    ServerId server;
    std::int64_t cores = 0;
    int level = 0;
    bool madc_eligible = false;  // relaxed availability
    bool preemptible = false;
    PreemptionPriority priority = PreemptionPriority::Normal;
    TimeMs created_at_ms = 0;
};

struct MadcPlan {
    std::vector<ResourceClaim> throttle_claims;
    std::vector<VmId> evictions;
    std::vector<PlatformNotification> notifications;
    double target_shed = 0.0;
    double shed = 0.0;
    int emergency_evictions = 0;
    std::optional<double> shortfall;  // remaining power that could not be shed
};

/// `severity` is the fraction of each server's power to shed, in [0,1].
/// Evictions carry full notice when effective_at_ms - now_ms allows it and
/// are flagged as emergency otherwise.
MadcPlan madc_power_event(double severity, std::span<const MadcVm> vms,
                          const std::map<WorkloadId, WorkloadBudget>& budgets, TimeMs now_ms,
                          TimeMs effective_at_ms, TimeMs notice_ms = kDefaultEvictionNoticeMs);

}  // namespace wi::opt
