#include "wi/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace wi::opt {

namespace {

constexpr std::array<double, 5> kMultipliers = {0.6, 0.8, 1.0, 1.15, 1.3};

PlatformNotification notify(const VmId& vm, NotificationKind kind, TimeMs issued, TimeMs effective,
                            std::int64_t payload, std::string detail = {}) {
    PlatformNotification n;
    n.vm_id = vm;
    n.kind = kind;
    n.issued_at_ms = issued;
    n.effective_at_ms = effective;
    n.payload = payload;
    n.detail = std::move(detail);
    return n;
}

ResourceClaim frequency_claim(OptimizationId opt, const VmId& vm, const WorkloadId& owner,
                              std::int64_t amount, int level, TimeMs now) {
    ResourceClaim c;
    c.optimization = std::string(to_string(opt));
    c.priority = priority_of(opt);
    c.resource = ResourceKind::CpuFrequency;
    c.amount = amount;
    c.owner = owner;
    c.scope = {vm};
    c.timestamp_ms = now;
    c.level = level;
    return c;
}

}  // namespace

double frequency_multiplier(int level) {
    if (level < kMinFrequencyLevel || level > kMaxFrequencyLevel) {
        throw Error("frequency level " + std::to_string(level) + " outside [-2,2]");
    }
    return kMultipliers[static_cast<std::size_t>(level - kMinFrequencyLevel)];
}

// ---------------------------------------------------------------------------

ScaleAction autoscale_tick(std::span<const double> load_series, const AutoscalePolicy& policy,
                           int current_count, TimeMs clock_ms, bool strict_deploy_time) {
    ScaleAction a;
    a.current = current_count;
    a.target = current_count;
    if (const auto* t = std::get_if<ThresholdPolicy>(&policy)) {
        if (!load_series.empty() && t->threshold_pct > 0.0) {
            const double mean =
                std::accumulate(load_series.begin(), load_series.end(), 0.0) / double(load_series.size());
            const double raw = double(current_count) * mean / t->threshold_pct;
            a.target = static_cast<int>(std::ceil(raw - 1e-9));
        }
        a.target = std::clamp(a.target, t->min_count, std::max(t->min_count, t->max_count));
    } else {
        const auto& s = std::get<SchedulePolicy>(policy);
        const TimeMs tod = ((clock_ms % kDayMs) + kDayMs) % kDayMs;
        a.target = s.default_count;
        for (const auto& w : s.windows) {
            if (tod >= w.start_of_day_ms && tod < w.end_of_day_ms) {
                a.target = w.count;
                break;
            }
        }
    }
    a.via_preprovision_pool = strict_deploy_time && a.scales_out();
    return a;
}

// ---------------------------------------------------------------------------

int WorkloadBudget::remaining() const {
    const int cap = vm_count * preemptibility_pct / 100;
    return std::max(0, cap - already_preempted);
}

std::vector<std::size_t> eviction_order(std::span<const SpotCandidate> candidates) {
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = candidates[a];
        const auto& y = candidates[b];
        if (x.priority != y.priority) return x.priority < y.priority;
        if (x.created_at_ms != y.created_at_ms) return x.created_at_ms > y.created_at_ms;
        return x.vm_id < y.vm_id;
    });
    return order;
}

ReclaimPlan spot_reclaim(std::int64_t demanded_cores, std::span<const SpotCandidate> candidates,
                         const std::map<WorkloadId, WorkloadBudget>& budgets, TimeMs now_ms,
                         TimeMs notice_ms) {
    ReclaimPlan plan;
    if (demanded_cores <= 0) return plan;

    std::map<WorkloadId, int> left;
    for (const auto& [w, b] : budgets) left[w] = b.remaining();

    std::vector<std::size_t> chosen;
    std::int64_t freed = 0;
    for (auto idx : eviction_order(candidates)) {
        if (freed >= demanded_cores) break;
        const auto& c = candidates[idx];
        auto it = left.find(c.workload);
        if (it == left.end() || it->second <= 0 || c.cores <= 0) continue;
        --it->second;
        chosen.push_back(idx);
        freed += c.cores;
    }

    if (freed >= demanded_cores) {
        // Drop VMs that later picks made redundant, newest pick first.
        for (auto k = chosen.size(); k-- > 0;) {
            const auto cores = candidates[chosen[k]].cores;
            if (freed - cores >= demanded_cores) {
                freed -= cores;
                chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(k));
            }
        }
    } else {
        plan.insufficient_capacity = true;
    }

    for (auto idx : chosen) {
        const auto& c = candidates[idx];
        plan.evictions.push_back(c.vm_id);
        plan.notifications.push_back(
            notify(c.vm_id, NotificationKind::Preemption, now_ms, now_ms + notice_ms, c.cores, "spot reclaim"));
    }
    plan.freed_cores = freed;
    return plan;
}

// ---------------------------------------------------------------------------

std::int64_t HarvestPlan::net_change() const {
    std::int64_t s = 0;
    for (const auto& a : actions) s += a.delta;
    return s;
}

HarvestPlan harvest_rebalance(std::int64_t delta_spare, std::span<const HarvestVm> vms, TimeMs now_ms) {
    HarvestPlan plan;
    if (delta_spare == 0) return plan;

    auto members = [&](ScalePreference p) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < vms.size(); ++i) {
            if (vms[i].preference == p) out.push_back(i);
        }
        return out;
    };

    std::map<std::size_t, std::int64_t> delta;
    if (delta_spare > 0) {
        auto tier = members(ScalePreference::PreferGrow);
        if (tier.empty()) tier = members(ScalePreference::Neutral);
        if (tier.empty()) {
            plan.unallocated_cores = delta_spare;
        } else {
            std::vector<std::int64_t> demand(tier.size(), delta_spare);
            const auto g = water_fill(std::span<const std::int64_t>(demand), delta_spare);
            for (std::size_t k = 0; k < tier.size(); ++k) delta[tier[k]] += g[k];
        }
    } else {
        std::int64_t need = -delta_spare;
        for (auto pref : {ScalePreference::PreferShrink, ScalePreference::Neutral, ScalePreference::PreferGrow}) {
            if (need == 0) break;
            const auto tier = members(pref);
            std::vector<std::int64_t> demand;
            for (auto i : tier) demand.push_back(std::max<std::int64_t>(vms[i].harvested_cores, 0));
            const auto g = water_fill(std::span<const std::int64_t>(demand), need);
            for (std::size_t k = 0; k < tier.size(); ++k) {
                delta[tier[k]] -= g[k];
                need -= g[k];
            }
        }
        plan.deficit_cores = need;
    }

    for (const auto& [i, d] : delta) {
        if (d == 0) continue;
        const auto& vm = vms[i];
        const auto cores = vm.base_cores + vm.harvested_cores + d;
        plan.actions.push_back({vm.vm_id, d, cores});
        plan.notifications.push_back(notify(vm.vm_id, d > 0 ? NotificationKind::ScaleUp : NotificationKind::ScaleDown,
                                            now_ms, now_ms, cores, "harvest"));
    }
    return plan;
}

// ---------------------------------------------------------------------------

FrequencyDecision overclock_decide(std::int64_t power_budget_slots, std::int64_t reliability_budget_slots,
                                   std::span<const FrequencyCandidate> candidates, TimeMs now_ms) {
    FrequencyDecision d;
    std::int64_t budget = std::max<std::int64_t>(0, std::min(power_budget_slots, reliability_budget_slots));

    for (auto cls : {PreemptionPriority::High, PreemptionPriority::Normal}) {
        if (budget == 0) break;
        std::vector<std::size_t> idx;
        std::vector<ShareDemand> demands;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto& c = candidates[i];
            if (!c.eligible || c.priority != cls || c.cores <= 0) continue;
            const int level = std::clamp(c.requested_level, 0, kMaxFrequencyLevel);
            if (level == 0) continue;
            idx.push_back(i);
            demands.push_back({c.owner, c.cores * level});
        }
        const auto grants = fair_share(demands, budget);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (grants[k] == 0) continue;
            const auto& c = candidates[idx[k]];
            const int level = std::clamp(c.requested_level, 1, kMaxFrequencyLevel);
            budget -= grants[k];
            d.claims.push_back(frequency_claim(OptimizationId::Overclocking, c.vm_id, c.owner, grants[k], level, now_ms));
            d.notifications.push_back(
                notify(c.vm_id, NotificationKind::ScaleUp, now_ms, now_ms, level, "overclock"));
        }
    }
    return d;
}

FrequencyDecision underclock_decide(bool carbon_pressure, std::span<const FrequencyCandidate> candidates,
                                    TimeMs now_ms, const UnderclockConfig& config) {
    FrequencyDecision d;
    const double threshold = carbon_pressure ? config.carbon_idle_threshold_pct : config.idle_threshold_pct;
    for (const auto& c : candidates) {
        if (!c.eligible || c.cores <= 0 || c.util_pct >= threshold) continue;
        d.notifications.push_back(
            notify(c.vm_id, NotificationKind::ScaleDown, now_ms, now_ms + config.notice_lead_ms, -1, "underclock"));
        d.claims.push_back(frequency_claim(OptimizationId::Underclocking, c.vm_id, c.owner, c.cores, -1,
                                           now_ms + config.notice_lead_ms));
    }
    return d;
}

// ---------------------------------------------------------------------------

PreprovisionDecision preprovision_policy(std::span<const PreprovisionInput> workloads, TimeMs now_ms,
                                         const EligibilityThresholds& t) {
    PreprovisionDecision d;
    std::vector<std::string> scope;
    for (const auto& w : workloads) {
        if (w.deploy_time_ms >= t.not_strict_deploy_ms || w.forecast_scale_out_vms <= 0) continue;
        d.pool_vms += w.forecast_scale_out_vms;
        d.pool_cores += std::int64_t{w.forecast_scale_out_vms} * w.cores_per_vm;
        scope.push_back(w.workload);
    }
    if (d.pool_cores > 0) {
        ResourceClaim c;
        c.optimization = std::string(to_string(OptimizationId::NonPreProvision));
        c.priority = priority_of(OptimizationId::NonPreProvision);
        c.resource = ResourceKind::Capacity;
        c.amount = d.pool_cores;
        c.scope = std::move(scope);
        c.timestamp_ms = now_ms;
        d.claim = std::move(c);
    }
    return d;
}

// ---------------------------------------------------------------------------

RegionChoice region_place(bool region_agnostic, const RegionId& home, std::span<const RegionEntry> regions,
                          double price_weight) {
    if (regions.empty()) throw EmptyRegionTable("region table is empty");
    if (!region_agnostic) return {home, false, 0.0};

    auto [pmin, pmax] = std::minmax_element(regions.begin(), regions.end(),
                                            [](auto& a, auto& b) { return a.price_factor < b.price_factor; });
    auto [cmin, cmax] = std::minmax_element(regions.begin(), regions.end(),
                                            [](auto& a, auto& b) { return a.carbon_g_per_kwh < b.carbon_g_per_kwh; });
    const double prange = pmax->price_factor - pmin->price_factor;
    const double crange = cmax->carbon_g_per_kwh - cmin->carbon_g_per_kwh;
    const double w = std::clamp(price_weight, 0.0, 1.0);

    const RegionEntry* best = nullptr;
    double best_score = 0.0;
    for (const auto& r : regions) {
        const double p = prange > 0 ? (r.price_factor - pmin->price_factor) / prange : 0.0;
        const double c = crange > 0 ? (r.carbon_g_per_kwh - cmin->carbon_g_per_kwh) / crange : 0.0;
        const double score = w * p + (1.0 - w) * c;
        if (!best || score < best_score - 1e-12 ||
            (std::abs(score - best_score) <= 1e-12 && r.region_id < best->region_id)) {
            best = &r;
            best_score = score;
        }
    }
    return {best->region_id, best->region_id != home, best_score};
}

// ---------------------------------------------------------------------------

OversubDecision oversub_admit(double physical_cores, std::span<const OversubVm> vms, const OversubConfig& config) {
    OversubDecision d;
    if (vms.empty()) return d;
    const bool all_eligible = std::all_of(vms.begin(), vms.end(), [](const auto& v) { return v.eligible; });
    if (all_eligible) {
        d.cpu_ratio = config.cpu_ratio;
        d.memory_ratio = config.memory_ratio;
    }

    double demand = 0.0;
    for (const auto& v : vms) demand += std::max(v.cpu_demand_cores, 0.0);
    double excess = demand - physical_cores;
    if (excess <= 1e-9) return d;
    d.contention = true;

    std::vector<std::size_t> order(vms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return vms[a].priority < vms[b].priority; });
    for (auto i : order) {
        if (excess <= 1e-9) break;
        const double cut = std::min(std::max(vms[i].cpu_demand_cores, 0.0), excess);
        if (cut <= 0.0) continue;
        d.throttles.push_back({vms[i].vm_id, cut});
        excess -= cut;
    }
    return d;
}

// ---------------------------------------------------------------------------

RightsizeResult rightsize_recommend(std::span<const UtilSample> history, std::int64_t current_cores,
                                    const HintSet& hints, const RightsizeConfig& config,
                                    const EligibilityThresholds& t) {
    if (history.empty()) throw InsufficientHistory("no utilization history");
    const TimeMs first = history.front().time_ms;
    const TimeMs last = history.back().time_ms;
    if (last - first < config.window_ms) {
        throw InsufficientHistory("history spans " + std::to_string(last - first) + " ms, need " +
                                  std::to_string(config.window_ms));
    }

    double cpu = 0.0, mem = 0.0, disk = 0.0;
    for (const auto& s : history) {
        if (s.time_ms < last - config.window_ms) continue;
        cpu = std::max(cpu, s.cpu_pct);
        mem = std::max(mem, s.memory_pct);
        disk = std::max(disk, s.disk_pct);
    }
    const double peak = std::max({cpu, mem, disk});

    RightsizeResult r;
    r.new_cores = current_cores;
    if (peak >= config.upsize_at_pct) {
        r.new_cores = current_cores * 2;
        r.reason = "peak utilization " + std::to_string(peak) + "% at or above upsize threshold";
    } else if (peak < config.downsize_below_pct) {
        r.new_cores = std::max<std::int64_t>(1, current_cores / 2);
        r.reason = "peak utilization " + std::to_string(peak) + "% below downsize threshold";
    } else {
        r.reason = "utilization within band";
    }
    r.resize = r.new_cores != current_cores;
    r.automated = r.resize && hints.preemptibility_pct > 0 && has_relaxed_availability(hints, t);
    return r;
}

// ---------------------------------------------------------------------------

MadcPlan madc_power_event(double severity, std::span<const MadcVm> vms,
                          const std::map<WorkloadId, WorkloadBudget>& budgets, TimeMs now_ms,
                          TimeMs effective_at_ms, TimeMs notice_ms) {
    MadcPlan plan;
    if (!(severity > 0.0)) return plan;
    severity = std::min(severity, 1.0);

    std::map<ServerId, std::vector<std::size_t>> by_server;
    for (std::size_t i = 0; i < vms.size(); ++i) by_server[vms[i].server].push_back(i);

    // Level after phase 1, indexed like `vms`.
    std::vector<int> level(vms.size());
    for (std::size_t i = 0; i < vms.size(); ++i) level[i] = vms[i].level;

    std::map<WorkloadId, int> left;
    for (const auto& [w, b] : budgets) left[w] = b.remaining();

    const bool full_notice = effective_at_ms - now_ms >= notice_ms;
    double total_short = 0.0;

    for (const auto& [server, members] : by_server) {
        double power = 0.0;
        for (auto i : members) power += double(vms[i].cores) * frequency_multiplier(vms[i].level);
        const double target = severity * power;
        plan.target_shed += target;
        double shed = 0.0;

        std::vector<SpotCandidate> cands;
        for (auto i : members) {
            cands.push_back({vms[i].vm_id, vms[i].workload, vms[i].cores, vms[i].created_at_ms, vms[i].priority});
        }
        const auto order = eviction_order(cands);

        // Phase 1: step eligible VMs down one level at a time.
        std::map<std::size_t, int> throttled;
        for (int step : {-1, -2}) {
            for (auto k : order) {
                if (shed >= target - 1e-9) break;
                const auto i = members[k];
                if (!vms[i].madc_eligible || level[i] <= step) continue;
                shed += double(vms[i].cores) * (frequency_multiplier(level[i]) - frequency_multiplier(step));
                level[i] = step;
                throttled[i] = step;
            }
        }

        // Phase 2: evict preemptible VMs within their workload budgets.
        std::set<std::size_t> evicted;
        for (auto k : order) {
            if (shed >= target - 1e-9) break;
            const auto i = members[k];
            if (!vms[i].preemptible) continue;
            auto it = left.find(vms[i].workload);
            if (it == left.end() || it->second <= 0) continue;
            --it->second;
            shed += double(vms[i].cores) * frequency_multiplier(level[i]);
            evicted.insert(i);
            plan.evictions.push_back(vms[i].vm_id);
            auto n = notify(vms[i].vm_id, NotificationKind::Preemption, now_ms, effective_at_ms, vms[i].cores,
                            "power event");
            n.emergency = !full_notice;
            if (n.emergency) ++plan.emergency_evictions;
            plan.notifications.push_back(std::move(n));
        }

        for (const auto& [i, lvl] : throttled) {
            if (evicted.count(i)) continue;
            auto c = frequency_claim(OptimizationId::MADC, vms[i].vm_id, vms[i].workload, vms[i].cores, lvl, now_ms);
            c.scope.insert(c.scope.begin(), server);
            plan.throttle_claims.push_back(std::move(c));
            plan.notifications.push_back(
                notify(vms[i].vm_id, NotificationKind::ScaleDown, now_ms, now_ms, lvl, "power event throttle"));
        }

        plan.shed += shed;
        if (shed < target - 1e-9) total_short += target - shed;
    }
    if (total_short > 0.0) plan.shortfall = total_short;
    return plan;
}

}  // namespace wi::opt
