#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "wi/joint.hpp"
#include "wi/lp.hpp"

using namespace wi;

namespace {

using O = OptimizationId;

lp::Program small_program() {
    lp::Program p;
    p.variables = 3;
    p.add_row({1, 1, 1}, 1.0, "sum");
    p.add_row({1, -1, 0}, 0.0, "balance");
    p.objective = {1, 1, 0};
    return p;
}

}  // namespace

TEST_CASE("simplex solves a small program both ways") {
    const auto p = small_program();
    const auto lo = lp::solve(p, lp::Sense::Minimize);
    REQUIRE(lo.status == lp::Status::Optimal);
    CHECK(lo.objective == doctest::Approx(0.0));
    CHECK(lp::max_residual(p, lo.x) < 1e-9);

    const auto hi = lp::solve(p, lp::Sense::Maximize);
    REQUIRE(hi.status == lp::Status::Optimal);
    CHECK(hi.objective == doctest::Approx(1.0));
    CHECK(hi.x[0] == doctest::Approx(0.5));
    CHECK(hi.x[1] == doctest::Approx(0.5));
}

TEST_CASE("simplex reports infeasible and unbounded programs") {
    lp::Program p;
    p.variables = 2;
    p.add_row({1, 1}, 1.0, "sum");
    p.add_row({1, 1}, 2.0, "other");
    p.objective = {0, 0};
    const auto s = lp::solve(p, lp::Sense::Minimize);
    CHECK(s.status == lp::Status::Infeasible);
    REQUIRE(s.farkas.size() == 2);
    CHECK(std::abs(s.farkas[0]) + std::abs(s.farkas[1]) > 0.0);

    lp::Program u;
    u.variables = 2;
    u.add_row({1, -1}, 0.0, "balance");
    u.objective = {1, 0};
    CHECK(lp::solve(u, lp::Sense::Maximize).status == lp::Status::Unbounded);
    CHECK(lp::solve(u, lp::Sense::Minimize).status == lp::Status::Optimal);
}

TEST_CASE("simplex terminates on a degenerate program") {
    lp::Program p;
    p.variables = 4;
    p.add_row({1, 1, 0, 0}, 0.0, "a");
    p.add_row({0, 1, 1, 0}, 0.0, "b");
    p.add_row({1, 1, 1, 1}, 1.0, "c");
    p.objective = {-1, 2, -1, 0};
    const auto s = lp::solve(p, lp::Sense::Maximize);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective == doctest::Approx(0.0));
}

TEST_CASE("fully determined constraints give a zero width interval") {
    JointConstraints c;
    c.optimizations = {O::SpotVMs, O::MADC};
    c.marginals = {0.5, 0.5};
    c.pairwise = {{{O::SpotVMs, O::MADC}, 0.25}};
    const auto e = estimate_joint(c);
    CHECK(e.width() == doctest::Approx(0.0));
    CHECK(e.min_savings == doctest::Approx(0.25 * (0.85 + 0.40 + (1 - 0.15 * 0.60))));
    CHECK(e.independence_savings == doctest::Approx(e.min_savings));
    REQUIRE(e.joint.size() == 4);
    for (double m : e.joint) CHECK(m == doctest::Approx(0.25));
    CHECK(lp::max_residual(build_joint_program(c), e.joint) < 1e-9);
}

TEST_CASE("contradictory constraints are infeasible with a certificate") {
    JointConstraints c;
    c.optimizations = {O::SpotVMs, O::MADC};
    c.marginals = {0.3, 0.5};
    c.pairwise = {{{O::SpotVMs, O::MADC}, 0.4}};
    try {
        estimate_joint(c);
        FAIL("expected JointInfeasible");
    } catch (const JointInfeasible& e) {
        REQUIRE(e.certificate().size() == 2);
        CHECK(e.certificate()[0].find("pairwise") == 0);
        CHECK(e.certificate()[1].find("SpotVMs") != std::string::npos);
    }

    c.marginals = {0.8, 0.8};
    c.pairwise = {{{O::SpotVMs, O::MADC}, 0.1}};
    CHECK_THROWS_AS(estimate_joint(c), JointInfeasible);
}

TEST_CASE("malformed constraints are rejected") {
    JointConstraints c;
    c.optimizations = {O::SpotVMs, O::SpotVMs};
    c.marginals = {0.1, 0.1};
    CHECK_THROWS_AS(build_joint_program(c), Error);
    c.optimizations = {O::SpotVMs};
    c.marginals = {1.5};
    CHECK_THROWS_AS(build_joint_program(c), Error);
    c.marginals = {0.5};
    c.pairwise = {{{O::SpotVMs, O::MADC}, 0.1}};
    CHECK_THROWS_AS(build_joint_program(c), Error);
    CHECK_THROWS_AS(build_joint_program(JointConstraints{}), Error);
}

TEST_CASE("interval matches the grid oracle") {
    std::vector<JointConstraints> cases;
    {
        JointConstraints c;
        c.optimizations = {O::SpotVMs, O::MADC, O::RegionAgnostic};
        c.marginals = {0.2, 0.3, 0.25};
        cases.push_back(c);
        c.pairwise = {{{O::SpotVMs, O::MADC}, 0.1}};
        cases.push_back(c);
        c.scenarios = {{{O::SpotVMs, O::MADC, O::RegionAgnostic}, 0.05}};
        cases.push_back(c);
    }
    {
        JointConstraints c;
        c.optimizations = {O::HarvestVMs, O::SpotVMs};
        c.marginals = {0.4, 0.7};
        cases.push_back(c);
    }
    {
        JointConstraints c;
        c.optimizations = {O::Overclocking, O::MADC, O::Rightsizing};
        c.marginals = {0.15, 0.28, 0.22};
        cases.push_back(c);
    }
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pct(0, 25);
    const std::vector<O> pool{O::SpotVMs, O::HarvestVMs, O::MADC, O::Rightsizing, O::RegionAgnostic, O::AutoScaling};
    for (int i = 0; i < 6; ++i) {
        JointConstraints c;
        auto ids = pool;
        std::shuffle(ids.begin(), ids.end(), rng);
        c.optimizations.assign(ids.begin(), ids.begin() + 3);
        for (int k = 0; k < 3; ++k) c.marginals.push_back(pct(rng) / 100.0);
        cases.push_back(c);
    }

    for (const auto& c : cases) {
        const auto grid = oracle::joint_grid(c);
        REQUIRE(grid.feasible);
        const auto e = estimate_joint(c);
        CHECK(std::abs(e.min_savings - grid.min) <= 0.01);
        CHECK(std::abs(e.max_savings - grid.max) <= 0.01);
        if (c.pairwise.empty() && c.scenarios.empty()) {
            CHECK(e.min_savings <= e.independence_savings + 1e-9);
            CHECK(e.independence_savings <= e.max_savings + 1e-9);
        }
        CHECK(lp::max_residual(build_joint_program(c), e.joint) < 1e-9);
    }
}

TEST_CASE("population statistics are consistent with the population") {
    const auto pop = survey_population(2000, 2);
    const auto c = constraints_from_population(pop);
    CHECK(c.optimizations.size() == 10);
    CHECK(c.pairwise.size() == 45);
    const auto e = estimate_joint(c);
    const double point = savings_breakdown(pop).total_pct / 100.0;
    CHECK(e.min_savings <= point + 1e-6);
    CHECK(point <= e.max_savings + 1e-6);
}
