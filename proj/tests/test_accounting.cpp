#include <doctest.h>

#include <algorithm>
#include <random>

#include "wi/accounting.hpp"

using namespace wi;

namespace {

using O = OptimizationId;

WorkloadProfile spot_only(const WorkloadId& id, std::int64_t cores) {
    WorkloadProfile w;
    w.id = id;
    w.cores = cores;
    w.hints = conservative_default();
    w.hints.preemptibility_pct = 100;
    return w;
}

WorkloadProfile conservative(const WorkloadId& id, std::int64_t cores) {
    WorkloadProfile w;
    w.id = id;
    w.cores = cores;
    w.hints = conservative_default();
    return w;
}

}  // namespace

TEST_CASE("price factors") {
    const PriceBook book;
    CHECK(price_factor(book, O::SpotVMs) == 0.15);
    CHECK(price_factor(book, O::MADC) == 0.60);
    CHECK(price_factor(book, O::Oversubscription) == 0.85);
    CHECK(price_factor(book, O::NonPreProvision) == 0.98);
    CHECK(price_factor(book, O::Underclocking) == 0.99);
    CHECK(price_factor(book, O::Rightsizing) == 1.0);
    CHECK(price_factor(book, O::AutoScaling) == 1.0);
}

TEST_CASE("vm prices compose multiplicatively") {
    const PriceBook book;
    CHECK(vm_price(book, {}, {}) == 1.0);
    CHECK(vm_price(book, {O::SpotVMs}, {}) == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(vm_price(book, {O::SpotVMs, O::MADC, O::Oversubscription}, {}) == doctest::Approx(0.0765).epsilon(1e-12));
    CHECK(vm_price(book, {O::SpotVMs}, {4, 2.0}) == doctest::Approx(1.2));

    UsageRecord harvest{4, 1.0, 1.0, 8.0, 0.0};
    CHECK(vm_price(book, {O::HarvestVMs}, harvest) == doctest::Approx(0.15 * 4 + 0.15 * 8));

    UsageRecord oc{4, 1.0, 1.0, 0.0, 2.0};
    CHECK(vm_price(book, {O::Overclocking}, oc) == doctest::Approx(4.0 + 0.15 * 2));

    UsageRecord region{1, 1.0, 0.7};
    CHECK(vm_price(book, {O::RegionAgnostic}, region) == doctest::Approx(0.7));
    CHECK(vm_price(book, {}, region) == 1.0);

    CHECK_THROWS_AS(vm_price(book, {O::SpotVMs, O::HarvestVMs}, {}), IncompatibleSet);
    CHECK_THROWS_AS(vm_price(book, {O::Overclocking, O::MADC}, {}), IncompatibleSet);
    CHECK_THROWS_AS(vm_price(book, {}, {-1, 1.0}), Error);
}

TEST_CASE("adding a factor optimization never raises the price") {
    const PriceBook book;
    const std::vector<O> factor_opts{O::SpotVMs, O::MADC, O::Oversubscription, O::NonPreProvision,
                                     O::Underclocking};
    for (auto a : factor_opts) {
        for (auto b : factor_opts) {
            OptimizationSet s{a};
            OptimizationSet both{a, b};
            bool ok = true;
            try {
                check_compatible(both);
            } catch (const IncompatibleSet&) {
                ok = false;
            }
            if (ok) CHECK(vm_price(book, both, {}) <= vm_price(book, s, {}));
        }
    }
}

TEST_CASE("best compatible set keeps the larger benefit per group") {
    CHECK(best_compatible({O::SpotVMs, O::HarvestVMs, O::NonPreProvision}) == OptimizationSet{O::HarvestVMs});
    CHECK(best_compatible({O::Overclocking, O::MADC, O::Underclocking}) == OptimizationSet{O::MADC});
    CHECK(best_compatible({O::OnDemand, O::Rightsizing}) == OptimizationSet{O::Rightsizing});
    CHECK(set_savings({O::SpotVMs}) == doctest::Approx(0.85));
    CHECK(set_savings({O::SpotVMs, O::HarvestVMs}) == doctest::Approx(0.91));
    CHECK(set_savings({O::MADC, O::Rightsizing}) == doctest::Approx(1 - 0.6 * 0.5));
}

TEST_CASE("attribution order follows owner benefit") {
    const std::vector<O> expected{O::HarvestVMs,     O::SpotVMs,     O::Rightsizing,
                                  O::MADC,           O::RegionAgnostic, O::AutoScaling,
                                  O::Oversubscription, O::Overclocking, O::NonPreProvision,
                                  O::Underclocking};
    CHECK(attribution_order() == expected);
}

TEST_CASE("hand population saves 42.5 percent") {
    const std::vector<WorkloadProfile> pop{spot_only("A", 100), conservative("B", 100)};
    const auto r = savings_breakdown(pop);
    CHECK(r.total_pct == 42.5);
    CHECK(r.contribution(O::SpotVMs) == doctest::Approx(42.5));
    CHECK(r.contribution_pp.size() == 1);
    CHECK(r.regular_cost == 200.0);
    CHECK(r.discounted_cost == doctest::Approx(115.0));

    const auto empty = savings_breakdown(std::vector<WorkloadProfile>{});
    CHECK(empty.total_pct == 0.0);
    CHECK(empty.contribution_pp.empty());
}

TEST_CASE("savings are invariant under permutation and duplication") {
    auto pop = survey_population(500, 3);
    const auto base = savings_breakdown(pop);

    auto shuffled = pop;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(9));
    const auto perm = savings_breakdown(shuffled);
    CHECK(perm.total_pct == doctest::Approx(base.total_pct).epsilon(1e-12));

    auto doubled = pop;
    doubled.insert(doubled.end(), pop.begin(), pop.end());
    const auto dup = savings_breakdown(doubled);
    CHECK(dup.total_pct == doctest::Approx(base.total_pct).epsilon(1e-12));
    for (const auto& [id, pp] : base.contribution_pp) CHECK(dup.contribution(id) == doctest::Approx(pp));

    double sum = 0.0;
    for (const auto& [id, pp] : base.contribution_pp) sum += pp;
    CHECK(sum == doctest::Approx(base.total_pct));
}

TEST_CASE("contributions are capped by discount times eligible share") {
    const auto pop = survey_population(2000, 5);
    const auto r = savings_breakdown(pop);
    std::map<O, double> eligible_cores;
    double total = 0.0;
    for (const auto& w : pop) {
        total += double(w.cores);
        for (auto id : eligibility(w.hints, w.util).members()) eligible_cores[id] += double(w.cores);
    }
    for (const auto& [id, pp] : r.contribution_pp) {
        CHECK(pp <= 100.0 * owner_benefit(id) * eligible_cores[id] / total + 1e-9);
    }
}

TEST_CASE("survey population is deterministic and follows the marginals") {
    const auto a = survey_population(20'000, 1);
    const auto b = survey_population(20'000, 1);
    REQUIRE(a.size() == b.size());
    CHECK(a.front().hints == b.front().hints);
    CHECK(a.back().cores == b.back().cores);

    double cores = 0.0, spot = 0.0, three_nines = 0.0;
    for (const auto& w : a) {
        cores += 1.0;
        spot += w.hints.preemptibility_pct == 100 ? 1.0 : 0.0;
        three_nines += w.hints.availability_nines == 3 ? 1.0 : 0.0;
    }
    CHECK(spot / cores == doctest::Approx(0.061).epsilon(0.1));
    CHECK(three_nines / cores == doctest::Approx(0.58).epsilon(0.05));

    for (const auto& row : survey_rows()) {
        double s = 0.0;
        for (const auto& c : row.categories) s += c.weight;
        CHECK(s == doctest::Approx(100.0).epsilon(0.01));
    }
}

TEST_CASE("carbon reduction from migration") {
    CHECK(migration_reduction(546.0, 267.0) == doctest::Approx(1.0 - 267.0 / 546.0));
    CHECK(100.0 * migration_reduction(546.0, 267.0) == doctest::Approx(51.1).epsilon(0.002));
    CHECK_THROWS_AS(migration_reduction(0.0, 100.0), MissingIntensity);

    const auto regions = default_carbon_regions();
    CHECK(low_carbon_intensity(regions) == 267.0);
    CHECK_THROWS_AS(low_carbon_intensity(std::vector<CarbonRegion>{}), MissingIntensity);

    WorkloadProfile mover = conservative("m", 10);
    mover.hints.region_independent = true;
    const std::vector<WorkloadProfile> pop{mover};
    const auto r = carbon_report(pop, regions, kDefaultHomeRegion);
    CHECK(r.reduction_pct == doctest::Approx(100.0 * (1.0 - 267.0 / 546.0)));
    CHECK(r.contribution_pp.at(O::RegionAgnostic) == doctest::Approx(r.reduction_pct));

    const std::vector<WorkloadProfile> none{conservative("c", 10)};
    CHECK(carbon_report(none, regions, kDefaultHomeRegion).reduction_pct == 0.0);
    CHECK_THROWS_AS(carbon_report(none, regions, "nowhere"), MissingIntensity);
}

TEST_CASE("core hour factors") {
    CHECK(core_hour_factor(O::Rightsizing) == 0.5);
    CHECK(core_hour_factor(O::AutoScaling) == 0.81);
    CHECK(core_hour_factor(O::Oversubscription) == 0.85);
    CHECK(core_hour_factor(O::SpotVMs) == 1.0);
}
