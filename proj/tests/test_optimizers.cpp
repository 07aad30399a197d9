#include <doctest.h>

#include "wi/optimizers.hpp"
#include "wi/registry.hpp"

using namespace wi;
using namespace wi::opt;

TEST_CASE("frequency levels") {
    CHECK(frequency_multiplier(-2) == doctest::Approx(0.6));
    CHECK(frequency_multiplier(0) == doctest::Approx(1.0));
    CHECK(frequency_multiplier(2) == doctest::Approx(1.3));
    CHECK_THROWS_AS(frequency_multiplier(3), Error);
}

TEST_CASE("threshold autoscaling") {
    const std::vector<double> load{50.0, 50.0};
    const ThresholdPolicy p{40.0, 2, 10};
    auto a = autoscale_tick(load, p, 4, 0);
    CHECK(a.target == 5);
    CHECK(a.scales_out());
    CHECK_FALSE(a.via_preprovision_pool);
    CHECK(autoscale_tick(load, p, 4, 0, true).via_preprovision_pool);

    const std::vector<double> idle{1.0};
    CHECK(autoscale_tick(idle, p, 4, 0).target == 2);
    const std::vector<double> hot{100.0};
    CHECK(autoscale_tick(hot, p, 8, 0).target == 10);
    CHECK(autoscale_tick(std::vector<double>{}, p, 4, 0).target == 4);
    // Exactly at the threshold keeps the count.
    CHECK(autoscale_tick(std::vector<double>{40.0}, p, 4, 0).target == 4);
}

TEST_CASE("schedule autoscaling uses the time of day") {
    SchedulePolicy s;
    s.default_count = 2;
    s.windows = {{8 * 3600'000LL, 18 * 3600'000LL, 6}};
    CHECK(autoscale_tick({}, s, 2, 9 * 3600'000LL).target == 6);
    CHECK(autoscale_tick({}, s, 2, kDayMs + 9 * 3600'000LL).target == 6);
    CHECK(autoscale_tick({}, s, 6, 18 * 3600'000LL).target == 2);
    CHECK(autoscale_tick({}, s, 6, 0).target == 2);
}

TEST_CASE("preemption budgets") {
    CHECK(WorkloadBudget{10, 30, 0}.remaining() == 3);
    CHECK(WorkloadBudget{3, 50, 0}.remaining() == 1);
    CHECK(WorkloadBudget{10, 30, 5}.remaining() == 0);
}

TEST_CASE("spot reclaim evicts low priority and young VMs first") {
    const std::vector<SpotCandidate> c{
        {"a", "w1", 4, 100, PreemptionPriority::Low},
        {"b", "w1", 4, 200, PreemptionPriority::Normal},
        {"c", "w2", 2, 300, PreemptionPriority::Low},
        {"d", "w3", 8, 400, PreemptionPriority::Low},
    };
    const auto order = eviction_order(c);
    CHECK(order == std::vector<std::size_t>{3, 2, 0, 1});

    const std::map<WorkloadId, WorkloadBudget> budgets{{"w1", {4, 50, 0}}, {"w2", {1, 100, 0}}};
    const auto plan = spot_reclaim(5, c, budgets, 1000);
    CHECK(plan.evictions == std::vector<VmId>{"c", "a"});
    CHECK(plan.freed_cores == 6);
    CHECK_FALSE(plan.insufficient_capacity);
    REQUIRE(plan.notifications.size() == 2);
    CHECK(plan.notifications[0].kind == NotificationKind::Preemption);
    CHECK(plan.notifications[0].effective_at_ms == 1000 + kDefaultEvictionNoticeMs);

    const auto all = spot_reclaim(100, c, budgets, 0);
    CHECK(all.insufficient_capacity);
    CHECK(all.freed_cores == 10);
    CHECK(all.evictions.size() == 3);

    CHECK(spot_reclaim(0, c, budgets, 0).evictions.empty());
}

TEST_CASE("spot reclaim drops picks made redundant") {
    const std::vector<SpotCandidate> c{
        {"x", "w", 1, 300, PreemptionPriority::Low},
        {"y", "w", 4, 100, PreemptionPriority::Low},
    };
    const std::map<WorkloadId, WorkloadBudget> budgets{{"w", {2, 100, 0}}};
    const auto plan = spot_reclaim(4, c, budgets, 0);
    CHECK(plan.evictions == std::vector<VmId>{"y"});
    CHECK(plan.freed_cores == 4);
}

TEST_CASE("harvest grows preferred VMs and shrinks willing ones first") {
    const std::vector<HarvestVm> vms{
        {"g1", 4, 0, ScalePreference::PreferGrow},
        {"g2", 4, 1, ScalePreference::PreferGrow},
        {"n", 4, 4, ScalePreference::Neutral},
        {"s", 4, 2, ScalePreference::PreferShrink},
    };
    const auto grow = harvest_rebalance(6, vms, 0);
    REQUIRE(grow.actions.size() == 2);
    CHECK(grow.actions[0].delta == 3);
    CHECK(grow.actions[0].new_cores == 7);
    CHECK(grow.actions[1].new_cores == 8);
    CHECK(grow.net_change() == 6);
    CHECK(grow.notifications[0].kind == NotificationKind::ScaleUp);

    const auto shrink = harvest_rebalance(-5, vms, 0);
    CHECK(shrink.net_change() == -5);
    CHECK(shrink.deficit_cores == 0);
    for (const auto& a : shrink.actions) {
        if (a.vm_id == "s") CHECK(a.delta == -2);
        if (a.vm_id == "n") CHECK(a.delta == -3);
        CHECK(a.vm_id != "g1");
        CHECK(a.vm_id != "g2");
    }

    const auto deep = harvest_rebalance(-10, vms, 0);
    CHECK(deep.net_change() == -7);
    CHECK(deep.deficit_cores == 3);

    const std::vector<HarvestVm> none{{"s", 4, 0, ScalePreference::PreferShrink}};
    CHECK(harvest_rebalance(5, none, 0).unallocated_cores == 5);
}

TEST_CASE("overclocking boosts high priority first within the tighter budget") {
    const std::vector<FrequencyCandidate> c{
        {"v1", "A", 4, PreemptionPriority::High, 1, 80.0, true},
        {"v2", "B", 4, PreemptionPriority::Normal, 2, 80.0, true},
        {"v3", "C", 4, PreemptionPriority::Low, 1, 80.0, true},
        {"v4", "D", 4, PreemptionPriority::High, 1, 80.0, false},
    };
    const auto d = overclock_decide(10, 6, c, 0);
    REQUIRE(d.claims.size() == 2);
    CHECK(d.claims[0].scope == std::vector<std::string>{"v1"});
    CHECK(d.claims[0].amount == 4);
    CHECK(d.claims[0].level == 1);
    CHECK(d.claims[1].scope == std::vector<std::string>{"v2"});
    CHECK(d.claims[1].amount == 2);
    CHECK(d.claims[1].level == 2);
    CHECK(d.claims[0].priority == priority_of(OptimizationId::Overclocking));
    CHECK(d.claims[0].resource == ResourceKind::CpuFrequency);

    CHECK(overclock_decide(0, 6, c, 0).claims.empty());
}

TEST_CASE("underclocking targets idle VMs, more under carbon pressure") {
    const std::vector<FrequencyCandidate> c{
        {"idle", "A", 4, PreemptionPriority::Normal, 0, 5.0, true},
        {"low", "A", 4, PreemptionPriority::Normal, 0, 20.0, true},
        {"busy", "A", 4, PreemptionPriority::Normal, 0, 70.0, true},
        {"off", "A", 4, PreemptionPriority::Normal, 0, 1.0, false},
    };
    const auto calm = underclock_decide(false, c, 1000);
    REQUIRE(calm.claims.size() == 1);
    CHECK(calm.claims[0].level == -1);
    CHECK(calm.notifications[0].effective_at_ms == 2000);
    CHECK(underclock_decide(true, c, 1000).claims.size() == 2);
}

TEST_CASE("pre-provisioning pools cores for strict deploy time workloads") {
    const std::vector<PreprovisionInput> w{
        {"strict", 0, 2, 4},
        {"slow", 120'000, 3, 4},
        {"idle", 0, 0, 4},
    };
    const auto d = preprovision_policy(w, 500);
    CHECK(d.pool_vms == 2);
    CHECK(d.pool_cores == 8);
    REQUIRE(d.claim);
    CHECK(d.claim->amount == 8);
    CHECK(d.claim->resource == ResourceKind::Capacity);
    CHECK(d.claim->priority == priority_of(OptimizationId::NonPreProvision));
    CHECK(d.claim->scope == std::vector<std::string>{"strict"});

    CHECK_FALSE(preprovision_policy(std::vector<PreprovisionInput>{{"slow", 120'000, 3, 4}}, 0).claim);
}

TEST_CASE("region placement balances price and carbon") {
    const std::vector<RegionEntry> t{{"r1", 1.0, 500}, {"r2", 0.8, 200}, {"r3", 0.6, 600}};
    const auto mid = region_place(true, "r1", t, 0.5);
    CHECK(mid.region == "r2");
    CHECK(mid.moved);
    CHECK(mid.score == doctest::Approx(0.25));
    CHECK(region_place(true, "r1", t, 1.0).region == "r3");
    CHECK(region_place(true, "r2", t, 0.0).region == "r2");
    CHECK_FALSE(region_place(true, "r2", t, 0.0).moved);
    CHECK(region_place(false, "r1", t, 0.5).region == "r1");
    CHECK_THROWS_AS(region_place(true, "r1", std::vector<RegionEntry>{}, 0.5), EmptyRegionTable);
}

TEST_CASE("oversubscription throttles lowest priority under contention") {
    std::vector<OversubVm> vms{
        {"h", true, PreemptionPriority::High, 4.0},
        {"l", true, PreemptionPriority::Low, 4.0},
        {"n", true, PreemptionPriority::Normal, 3.0},
    };
    auto d = oversub_admit(8.0, vms);
    CHECK(d.cpu_ratio == doctest::Approx(1.5));
    CHECK(d.memory_ratio == doctest::Approx(1.2));
    CHECK(d.contention);
    REQUIRE(d.throttles.size() == 1);
    CHECK(d.throttles[0].vm_id == "l");
    CHECK(d.throttles[0].cores == doctest::Approx(3.0));

    d = oversub_admit(2.0, vms);
    REQUIRE(d.throttles.size() == 3);
    CHECK(d.throttles[2].vm_id == "h");
    CHECK(d.throttles[2].cores == doctest::Approx(2.0));

    vms[0].eligible = false;
    d = oversub_admit(20.0, vms);
    CHECK(d.cpu_ratio == 1.0);
    CHECK_FALSE(d.contention);
}

TEST_CASE("rightsizing halves idle and doubles hot VMs") {
    auto history = [](double peak) {
        std::vector<UtilSample> h;
        for (TimeMs t = 0; t <= kDayMs; t += 3600'000) h.push_back({t, peak / 2, peak / 4, 0.0});
        h[5].cpu_pct = peak;
        return h;
    };
    HintSet relaxed = conservative_default();
    relaxed.availability_nines = 3;
    relaxed.preemptibility_pct = 10;

    auto r = rightsize_recommend(history(30.0), 8, relaxed);
    CHECK(r.resize);
    CHECK(r.new_cores == 4);
    CHECK(r.automated);

    r = rightsize_recommend(history(95.0), 8, relaxed);
    CHECK(r.new_cores == 16);

    r = rightsize_recommend(history(70.0), 8, relaxed);
    CHECK_FALSE(r.resize);
    CHECK(r.new_cores == 8);

    r = rightsize_recommend(history(30.0), 8, conservative_default());
    CHECK(r.resize);
    CHECK_FALSE(r.automated);

    CHECK(rightsize_recommend(history(30.0), 1, relaxed).new_cores == 1);

    const std::vector<UtilSample> short_history{{0, 10, 10, 10}, {3600'000, 10, 10, 10}};
    CHECK_THROWS_AS(rightsize_recommend(short_history, 8, relaxed), InsufficientHistory);
    CHECK_THROWS_AS(rightsize_recommend(std::vector<UtilSample>{}, 8, relaxed), InsufficientHistory);
}

TEST_CASE("power events throttle before they evict") {
    const std::vector<MadcVm> vms{
        {"v1", "a", "s1", 4, 0, true, false, PreemptionPriority::Normal, 100},
        {"v2", "w", "s1", 4, 0, false, true, PreemptionPriority::Normal, 200},
    };
    const std::map<WorkloadId, WorkloadBudget> budgets{{"w", {1, 100, 0}}};

    auto light = madc_power_event(0.1, vms, budgets, 0, 60'000);
    CHECK(light.target_shed == doctest::Approx(0.8));
    CHECK(light.shed == doctest::Approx(0.8));
    CHECK(light.evictions.empty());
    REQUIRE(light.throttle_claims.size() == 1);
    CHECK(light.throttle_claims[0].level == -1);
    CHECK(light.throttle_claims[0].scope == std::vector<std::string>{"s1", "v1"});
    CHECK_FALSE(light.shortfall);

    auto heavy = madc_power_event(0.3, vms, budgets, 0, 60'000);
    CHECK(heavy.shed == doctest::Approx(5.6));
    CHECK(heavy.evictions == std::vector<VmId>{"v2"});
    CHECK(heavy.emergency_evictions == 0);
    REQUIRE(heavy.throttle_claims.size() == 1);
    CHECK(heavy.throttle_claims[0].level == -2);

    auto rushed = madc_power_event(0.3, vms, budgets, 0, 5'000);
    CHECK(rushed.emergency_evictions == 1);
    bool flagged = false;
    for (const auto& n : rushed.notifications) flagged |= n.kind == NotificationKind::Preemption && n.emergency;
    CHECK(flagged);

    auto starved = madc_power_event(0.3, vms, {}, 0, 60'000);
    CHECK(starved.evictions.empty());
    REQUIRE(starved.shortfall);
    CHECK(*starved.shortfall == doctest::Approx(0.8));

    CHECK(madc_power_event(0.0, vms, budgets, 0, 0).throttle_claims.empty());
}
