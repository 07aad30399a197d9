#include "wi/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wi {

double price_factor(const PriceBook& book, OptimizationId id) {
    switch (id) {
        case OptimizationId::SpotVMs: return book.spot_factor;
        case OptimizationId::MADC: return book.madc_factor;
        case OptimizationId::Oversubscription: return book.oversub_factor;
        case OptimizationId::NonPreProvision: return book.nonpreprov_factor;
        case OptimizationId::Underclocking: return book.underclock_factor;
        default: return 1.0;
    }
}

const std::vector<CompatibilityGroup>& compatibility_groups() {
    static const std::vector<CompatibilityGroup> groups = {
        {"SpareCompute", {OptimizationId::SpotVMs, OptimizationId::HarvestVMs, OptimizationId::NonPreProvision}},
        {"Frequency", {OptimizationId::Overclocking, OptimizationId::Underclocking, OptimizationId::MADC}},
    };
    return groups;
}

void check_compatible(OptimizationSet active) {
    for (const auto& g : compatibility_groups()) {
        const auto both = active & g.members;
        if (both.size() > 1) {
            throw IncompatibleSet("optimizations " + to_string(both) + " share the " + g.name +
                                  " group and cannot be combined");
        }
    }
}

double vm_price(const PriceBook& book, OptimizationSet active, const UsageRecord& usage) {
    check_compatible(active);
    if (usage.cores < 0 || usage.vm_hours < 0.0 || usage.region_price_factor <= 0.0) {
        throw Error("usage record has negative cores/hours or non-positive region factor");
    }
    const double core_hours = double(usage.cores) * usage.vm_hours;
    double factor = 1.0;
    for (auto id : active.members()) factor *= price_factor(book, id);
    const bool harvest = active.contains(OptimizationId::HarvestVMs);
    if (harvest) factor *= book.spot_factor;
    if (active.contains(OptimizationId::RegionAgnostic)) factor *= usage.region_price_factor;

    const double rate = book.base_per_core_hour * factor;
    double cost = rate * core_hours;
    if (harvest) cost += rate * usage.harvested_core_hours;
    if (active.contains(OptimizationId::Overclocking)) {
        cost += book.base_per_core_hour * book.overclock_surcharge * usage.overclocked_core_hours;
    }
    return cost;
}

// ---------------------------------------------------------------------------

double owner_benefit(OptimizationId id) {
    switch (id) {
        case OptimizationId::OnDemand: return 0.0;
        case OptimizationId::MADC: return 0.40;
        case OptimizationId::Rightsizing: return 0.50;
        case OptimizationId::Oversubscription: return 0.15;
        case OptimizationId::AutoScaling: return 0.19;
        case OptimizationId::NonPreProvision: return 0.02;
        case OptimizationId::RegionAgnostic: return 0.22;
        case OptimizationId::Underclocking: return 0.01;
        case OptimizationId::Overclocking: return 0.11;
        case OptimizationId::SpotVMs: return 0.85;
        case OptimizationId::HarvestVMs: return 0.91;
    }
    return 0.0;
}

std::vector<OptimizationId> attribution_order() {
    std::vector<OptimizationId> ids(kAllOptimizations.begin() + 1, kAllOptimizations.end());
    std::stable_sort(ids.begin(), ids.end(),
                     [](auto a, auto b) { return owner_benefit(a) > owner_benefit(b); });
    return ids;
}

OptimizationSet best_compatible(OptimizationSet eligible) {
    OptimizationSet out = eligible;
    out.erase(OptimizationId::OnDemand);
    for (const auto& g : compatibility_groups()) {
        const auto members = (out & g.members).members();
        if (members.size() < 2) continue;
        // members() is ascending priority, so the first maximum wins ties.
        auto best = *std::max_element(members.begin(), members.end(), [](auto a, auto b) {
            return owner_benefit(a) < owner_benefit(b);
        });
        for (auto m : members) {
            if (m != best) out.erase(m);
        }
    }
    return out;
}

double set_savings(OptimizationSet eligible) {
    const auto active = best_compatible(eligible);
    double remaining = 1.0;
    for (auto id : active.members()) remaining *= 1.0 - owner_benefit(id);
    return 1.0 - remaining;
}

double SavingsReport::contribution(OptimizationId id) const {
    auto it = contribution_pp.find(id);
    return it == contribution_pp.end() ? 0.0 : it->second;
}

SavingsReport savings_breakdown(std::span<const WorkloadProfile> population, const EligibilityThresholds& t) {
    SavingsReport r;
    r.order = attribution_order();
    std::map<OptimizationId, double> saved;
    for (const auto& w : population) {
        const double cost = double(w.cores);
        const auto active = best_compatible(eligibility(w.hints, w.util, t));
        double remaining = 1.0;
        for (auto id : r.order) {
            if (!active.contains(id)) continue;
            saved[id] += cost * remaining * owner_benefit(id);
            remaining *= 1.0 - owner_benefit(id);
        }
        r.regular_cost += cost;
        r.discounted_cost += cost * remaining;
    }
    if (r.regular_cost > 0.0) {
        for (auto id : r.order) {
            if (saved.count(id)) r.contribution_pp[id] = 100.0 * saved[id] / r.regular_cost;
        }
        r.total_pct = 100.0 * (r.regular_cost - r.discounted_cost) / r.regular_cost;
    }
    return r;
}

// ---------------------------------------------------------------------------

std::vector<CarbonRegion> default_carbon_regions() {
    return {{"green-1", 267.0}, {"green-2", 310.0}, {"mid-1", 380.0}, {"mid-2", 430.0},
            {"mid-3", 480.0},   {kDefaultHomeRegion, 546.0}, {"high-1", 590.0}, {"high-2", 640.0},
            {"high-3", 700.0},  {"high-4", 760.0}};
}

double low_carbon_intensity(std::span<const CarbonRegion> regions) {
    if (regions.empty()) throw MissingIntensity("region table is empty");
    std::vector<double> v;
    for (const auto& r : regions) {
        if (!(r.carbon_g_per_kwh >= 0.0)) throw MissingIntensity("region '" + r.id + "' has no carbon intensity");
        v.push_back(r.carbon_g_per_kwh);
    }
    std::sort(v.begin(), v.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.10 * double(v.size())));
    return v[std::max<std::size_t>(rank, 1) - 1];
}

double migration_reduction(double from_g_per_kwh, double to_g_per_kwh) {
    if (from_g_per_kwh <= 0.0) throw MissingIntensity("source region intensity must be > 0");
    return 1.0 - to_g_per_kwh / from_g_per_kwh;
}

double core_hour_factor(OptimizationId id) {
    switch (id) {
        case OptimizationId::Rightsizing: return 0.50;
        case OptimizationId::AutoScaling: return 0.81;
        case OptimizationId::Oversubscription: return 0.85;
        default: return 1.0;
    }
}

CarbonReport carbon_report(std::span<const WorkloadProfile> population, std::span<const CarbonRegion> regions,
                           const RegionId& home_region, const EligibilityThresholds& t) {
    auto home = std::find_if(regions.begin(), regions.end(), [&](auto& r) { return r.id == home_region; });
    if (home == regions.end()) throw MissingIntensity("no intensity for home region '" + home_region + "'");
    const double home_g = home->carbon_g_per_kwh;
    const double low_g = low_carbon_intensity(regions);

    auto factor = [&](OptimizationId id) {
        switch (id) {
            case OptimizationId::RegionAgnostic: return std::min(low_g, home_g) / home_g;
            case OptimizationId::Overclocking: return opt::frequency_multiplier(1);
            case OptimizationId::Underclocking: return opt::frequency_multiplier(-1);
            default: return core_hour_factor(id);
        }
    };

    CarbonReport r;
    const auto order = attribution_order();
    std::map<OptimizationId, double> saved;
    for (const auto& w : population) {
        const double base = double(w.cores) * home_g;
        const auto active = best_compatible(eligibility(w.hints, w.util, t));
        double remaining = 1.0;
        for (auto id : order) {
            if (!active.contains(id)) continue;
            const double f = factor(id);
            if (f == 1.0) continue;
            saved[id] += base * remaining * (1.0 - f);
            remaining *= f;
        }
        r.baseline_g += base;
        r.optimized_g += base * remaining;
    }
    if (r.baseline_g > 0.0) {
        for (const auto& [id, g] : saved) r.contribution_pp[id] = 100.0 * g / r.baseline_g;
        r.reduction_pct = 100.0 * (r.baseline_g - r.optimized_g) / r.baseline_g;
    }
    return r;
}

// ---------------------------------------------------------------------------

const std::vector<SurveyRow>& survey_rows() {
    static const std::vector<SurveyRow> rows = {
        {"stateless", {{"Stateless", 45.5}, {"Partially stateless", 17.4}, {"Stateful", 37.1}}},
        {"deployment_time", {{"Strict", 28.5}, {"Not strict", 71.5}}},
        {"availability",
         {{"Five Nines", 2.4}, {"Four Nines", 34.5}, {"Three Nines", 58.0}, {"Two Nines", 3.9},
          {"One Nine", 0.5}, {"None", 0.4}}},
        {"preemptibility",
         {{"0%", 39.3}, {"0-20%", 41.1}, {"20-40%", 4.8}, {"40-60%", 6.5}, {"60-80%", 0.3}, {"80-100%", 1.8},
          {"100%", 6.1}}},
        {"delay_tolerance", {{"Delay tolerant", 24.5}, {"Delay sensitive", 75.5}}},
        {"region", {{"Region-agnostic", 47.5}, {"Partially region-agnostic", 13.9}, {"Not region-agnostic", 38.6}}},
    };
    return rows;
}

const std::vector<UtilBand>& util_bands() {
    static const std::vector<UtilBand> bands = {
        {"idle", 3.0, {20.0, 35.0, 40.0, 40.0, 30.0}},
        {"moderate", 28.0, {50.0, 60.0, 70.0, 70.0, 50.0}},
        {"busy", 69.0, {75.0, 85.0, 85.0, 85.0, 60.0}},
    };
    return bands;
}

namespace {

// Hint value for the category index drawn from each survey row.
void apply_category(HintSet& h, std::size_t row, std::size_t cat) {
    static constexpr std::array<int, 6> kNines = {5, 4, 3, 2, 1, 0};
    static constexpr std::array<int, 7> kPreempt = {0, 10, 30, 50, 70, 90, 100};
    switch (row) {
        case 0:
            h.scale_out_in = cat == 0;
            h.scale_up_down = cat != 2;
            break;
        case 1: h.deploy_time_ms = cat == 0 ? 0 : 120'000; break;
        case 2: h.availability_nines = kNines[cat]; break;
        case 3: h.preemptibility_pct = kPreempt[cat]; break;
        case 4: h.delay_tolerance_ms = cat == 0 ? 1'000 : 0; break;
        case 5: h.region_independent = cat == 0; break;
    }
}

}  // namespace

std::vector<WorkloadProfile> survey_population(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::discrete_distribution<std::size_t>> dists;
    for (const auto& row : survey_rows()) {
        std::vector<double> w;
        for (const auto& c : row.categories) w.push_back(c.weight);
        dists.emplace_back(w.begin(), w.end());
    }
    std::vector<double> band_w;
    for (const auto& b : util_bands()) band_w.push_back(b.weight);
    std::discrete_distribution<std::size_t> band_dist(band_w.begin(), band_w.end());
    static constexpr std::array<std::int64_t, 4> kCores = {2, 4, 8, 16};
    std::uniform_int_distribution<std::size_t> core_dist(0, kCores.size() - 1);

    std::vector<WorkloadProfile> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        WorkloadProfile w;
        w.id = "w" + std::to_string(i);
        w.cores = kCores[core_dist(rng)];
        for (std::size_t r = 0; r < dists.size(); ++r) apply_category(w.hints, r, dists[r](rng));
        w.util = util_bands()[band_dist(rng)].util;
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace wi
