#include <doctest.h>

#include "wi/hints.hpp"
#include "wi/registry.hpp"
#include "wi/types.hpp"

using namespace wi;

TEST_CASE("optimization names round-trip") {
    for (auto id : kAllOptimizations) {
        auto parsed = parse_optimization(to_string(id));
        REQUIRE(parsed);
        CHECK(*parsed == id);
    }
    CHECK_FALSE(parse_optimization("Teleport"));
}

TEST_CASE("optimization set operations") {
    OptimizationSet a{OptimizationId::SpotVMs, OptimizationId::MADC};
    OptimizationSet b{OptimizationId::MADC};
    CHECK(a.size() == 2);
    CHECK(b.is_subset_of(a));
    CHECK((a & b) == b);
    CHECK(to_string(a) == "{MADC,SpotVMs}");
    CHECK(a.members() == std::vector{OptimizationId::MADC, OptimizationId::SpotVMs});
    CHECK(OptimizationSet::all_builtin().size() == 11);
}

TEST_CASE("builtin registry follows the priority table") {
    const auto reg = builtin_registry();
    const std::vector<std::string> expected = {"OnDemand",     "MADC",          "Rightsizing", "Oversubscription",
                                               "AutoScaling",  "NonPreProvision", "RegionAgnostic",
                                               "Underclocking", "Overclocking",  "SpotVMs",     "HarvestVMs"};
    const auto order = reg.by_priority();
    REQUIRE(order.size() == expected.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        CHECK(order[i]->descriptor.name == expected[i]);
        CHECK(order[i]->descriptor.priority == int(i));
    }
}

TEST_CASE("onboarding rejects a taken priority and unknown resources") {
    auto reg = builtin_registry();
    OptimizationDescriptor d;
    d.name = "Hibernate";
    d.priority = 9;
    d.resources = {"SpareCompute"};
    CHECK_THROWS_AS(reg.onboard(d), DuplicatePriority);
    d.priority = 11;
    d.resources = {"Bandwidth"};
    CHECK_THROWS_AS(reg.onboard(d), UnknownResourceKind);
    d.resources = {"SpareCompute"};
    CHECK(reg.onboard(d).descriptor.priority == 11);
    CHECK(reg.by_priority().back()->descriptor.name == "Hibernate");
}

TEST_CASE("conservative hints unlock nothing") {
    const HintSet h = conservative_default();
    for (const UtilStats& u : {UtilStats{}, UtilStats{10, 20, 30, 30, 30}, UtilStats{99, 99, 99, 99, 99}}) {
        CHECK(eligibility(h, u).empty());
    }
}

TEST_CASE("eligibility examples") {
    HintSet spot = conservative_default();
    spot.preemptibility_pct = 100;
    CHECK(eligibility(spot, {}) == OptimizationSet{OptimizationId::SpotVMs});

    HintSet h = conservative_default();
    h.scale_up_down = true;
    h.preemptibility_pct = 40;
    h.delay_tolerance_ms = 500;
    UtilStats u;
    u.p95_max_cpu_pct = 60;
    u.p95_cpu_pct = 30;
    CHECK(eligibility(h, u) == OptimizationSet{OptimizationId::SpotVMs, OptimizationId::HarvestVMs,
                                                OptimizationId::Overclocking, OptimizationId::Oversubscription});
    u.p95_cpu_pct = 65;
    CHECK_FALSE(eligibility(h, u).contains(OptimizationId::Oversubscription));
}

TEST_CASE("eligibility thresholds sit on the boundary values") {
    HintSet h = conservative_default();
    h.preemptibility_pct = 19;
    CHECK_FALSE(eligibility(h, {}).contains(OptimizationId::SpotVMs));
    h.preemptibility_pct = 20;
    CHECK(eligibility(h, {}).contains(OptimizationId::SpotVMs));

    h = conservative_default();
    h.deploy_time_ms = 59'999;
    CHECK_FALSE(eligibility(h, {}).contains(OptimizationId::NonPreProvision));
    h.deploy_time_ms = 60'000;
    CHECK(eligibility(h, {}).contains(OptimizationId::NonPreProvision));

    h = conservative_default();
    h.availability_nines = 3;
    UtilStats u{60, 60, 60, 60, 60};
    CHECK(eligibility(h, u) == OptimizationSet{OptimizationId::MADC});
    u.max_disk_pct = 90;
    CHECK(eligibility(h, u).contains(OptimizationId::Rightsizing));
    u = {10, 10, 49.9, 10, 10};
    CHECK(eligibility(h, u).contains(OptimizationId::Rightsizing));
}

TEST_CASE("relaxing a hint never removes an optimization") {
    const UtilStats u{30, 60, 70, 70, 50};
    for (int mask = 0; mask < 128; ++mask) {
        HintSet h = conservative_default();
        h.scale_up_down = mask & 1;
        h.scale_out_in = mask & 2;
        h.deploy_time_ms = (mask & 4) ? 120'000 : 0;
        h.availability_nines = (mask & 8) ? 3 : 5;
        h.preemptibility_pct = (mask & 16) ? 50 : 0;
        h.delay_tolerance_ms = (mask & 32) ? 1000 : 0;
        h.region_independent = mask & 64;
        const auto base = eligibility(h, u);
        for (int bit = 0; bit < 7; ++bit) {
            if (mask & (1 << bit)) continue;
            HintSet r = h;
            switch (bit) {
                case 0: r.scale_up_down = true; break;
                case 1: r.scale_out_in = true; break;
                case 2: r.deploy_time_ms = 120'000; break;
                case 3: r.availability_nines = 3; break;
                case 4: r.preemptibility_pct = 50; break;
                case 5: r.delay_tolerance_ms = 1000; break;
                case 6: r.region_independent = true; break;
            }
            CHECK(base.is_subset_of(eligibility(r, u)));
        }
    }
}

TEST_CASE("validation reports every bad field") {
    FieldMap raw{{"availability_nines", "7"}, {"scale_up_down", "maybe"}, {"colour", "blue"}};
    try {
        validate(raw);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        std::set<std::string> fields;
        for (const auto& f : e.errors()) fields.insert(f.field);
        CHECK(fields == std::set<std::string>{"availability_nines", "scale_up_down", "colour"});
    }
}

TEST_CASE("text form round-trips") {
    HintSet h;
    h.scale_out_in = true;
    h.deploy_time_ms = 90'000;
    h.availability_nines = 2;
    h.preemptibility_pct = 35;
    h.delay_tolerance_ms = 5;
    h.region_independent = true;
    const auto text = to_kv_text(h);
    CHECK(text.find("preemptibility_pct = 35\n") != std::string::npos);
    const HintSet back = validate(parse_kv_text(text));
    CHECK(back == h);
    CHECK(validate(parse_kv_text(to_kv_text(back))) == back);
    CHECK(validate({}) == conservative_default());
}

TEST_CASE("runtime overrides are last-writer-wins by timestamp") {
    HintSet base = conservative_default();
    std::vector<RuntimeHint> hints = {
        {"vm", HintKind::Preemptibility, 40, 200},
        {"vm", HintKind::Preemptibility, 80, 100},
        RuntimeHint::priority("vm", PreemptionPriority::High, 150),
    };
    const auto e = merge(base, hints);
    CHECK(e.current().preemptibility_pct == 40);
    CHECK(e.priority == PreemptionPriority::High);
    CHECK(e.base == base);

    auto doubled = hints;
    doubled.insert(doubled.end(), hints.begin(), hints.end());
    CHECK(merge(base, doubled) == e);
}

TEST_CASE("runtime hint payloads are range checked") {
    CHECK_NOTHROW(validate_runtime_hint({"vm", HintKind::Preemptibility, 100, 0}));
    CHECK_THROWS_AS(validate_runtime_hint({"vm", HintKind::Preemptibility, 101, 0}), ValidationError);
    CHECK_THROWS_AS(validate_runtime_hint({"vm", HintKind::PreemptionPriority, 3, 0}), ValidationError);
    CHECK_THROWS_AS(validate_runtime_hint({"", HintKind::ScaleUpDown, 1, 0}), ValidationError);
}

TEST_CASE("flap detection allows max_flips changes per window") {
    const FlapPolicy policy{2, 10'000};
    std::vector<RuntimeHint> history;
    auto hint = [](std::int64_t v, TimeMs t) { return RuntimeHint{"vm", HintKind::Preemptibility, v, t}; };

    CHECK(consistency_check(history, hint(50, 0), policy).accepted);
    history.push_back(hint(50, 0));
    history.push_back(hint(60, 1000));  // first change
    history.push_back(hint(50, 2000));  // second change
    const auto third = consistency_check(history, hint(60, 3000), policy);
    CHECK_FALSE(third.accepted);
    CHECK(third.reason.find("inconsistent") != std::string::npos);
    // Repeating the current value is never a flip.
    CHECK(consistency_check(history, hint(50, 3000), policy).accepted);
    // Outside the window the old changes no longer count.
    CHECK(consistency_check(history, hint(60, 12'500), policy).accepted);
}

TEST_CASE("notice predicate") {
    PlatformNotification n;
    n.kind = NotificationKind::Preemption;
    n.issued_at_ms = 1000;
    n.effective_at_ms = 31'000;
    CHECK(honors_notice(n, 30'000));
    n.effective_at_ms = 30'999;
    CHECK_FALSE(honors_notice(n, 30'000));
    n.kind = NotificationKind::ScaleDown;
    CHECK(honors_notice(n, 30'000));
}
