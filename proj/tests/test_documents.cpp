#include <doctest.h>

#include "wi/documents.hpp"

using namespace wi;
using nlohmann::json;

namespace {

const std::string kFixtures = std::string(WI_SOURCE_DIR) + "/tests/fixtures/";

std::string error_path(void (*f)(const json&), const json& doc) {
    try {
        f(doc);
    } catch (const DocumentError& e) {
        return e.path();
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("population documents parse and round-trip") {
    const auto pop = parse_population(load_json(kFixtures + "population_hand.json"));
    REQUIRE(pop.size() == 2);
    CHECK(pop[0].hints.preemptibility_pct == 100);
    CHECK(pop[0].hints.availability_nines == 5);
    CHECK(pop[1].hints == conservative_default());
    CHECK(savings_breakdown(pop).total_pct == 42.5);

    const auto synth = survey_population(50, 4);
    const auto again = parse_population(population_to_json(synth));
    REQUIRE(again.size() == synth.size());
    for (std::size_t i = 0; i < synth.size(); ++i) {
        CHECK(again[i].id == synth[i].id);
        CHECK(again[i].cores == synth[i].cores);
        CHECK(again[i].hints == synth[i].hints);
        CHECK(again[i].util == synth[i].util);
    }

    CHECK(parse_population(load_json(kFixtures + "population_empty.json")).empty());
}

TEST_CASE("population errors carry paths") {
    auto parse = [](const json& j) { parse_population(j); };
    CHECK(error_path(parse, json::parse(R"({"workloads":[{"cores":0}]})")) == "workloads[0].cores");
    CHECK(error_path(parse, json::parse(R"({"workloads":[{"hints":{"preemptibility_pct":150}}]})")) ==
          "workloads[0].hints.preemptibility_pct");
    CHECK(error_path(parse, json::parse(R"({"people":[]})")) == "people");
}

TEST_CASE("constraint documents parse and round-trip") {
    const auto c = parse_constraints(load_json(kFixtures + "constraints_scenario3.json"));
    CHECK(c.optimizations.size() == 3);
    CHECK(c.marginals == std::vector<double>{0.24, 0.18, 0.1});
    REQUIRE(c.pairwise.size() == 1);
    REQUIRE(c.scenarios.size() == 1);
    CHECK(c.scenarios[0].fraction == 0.06);
    CHECK(constraints_to_json(parse_constraints(constraints_to_json(c))) == constraints_to_json(c));
}

TEST_CASE("constraint errors carry paths") {
    auto parse = [](const json& j) { parse_constraints(j); };
    CHECK(error_path(parse, json::parse(R"({"optimizations":["Teleport"],"marginals":{}})")) == "optimizations[0]");
    CHECK(error_path(parse, json::parse(R"({"optimizations":["MADC"],"marginals":{}})")) == "marginals.MADC");
    CHECK(error_path(parse, json::parse(R"({"optimizations":["MADC"],"marginals":{"MADC":1.2}})")) ==
          "marginals.MADC");
    CHECK(error_path(parse, json::parse(R"({"optimizations":["MADC"],"marginals":{"MADC":0.2,"SpotVMs":0.1}})")) ==
          "marginals.SpotVMs");
    CHECK(error_path(parse, json::parse(
                                R"({"optimizations":["MADC"],"marginals":{"MADC":0.2},"pairwise":[{"set":["MADC","X"],"fraction":0.1}]})")) ==
          "pairwise[0].set[1]");
    CHECK(error_path(parse, json::parse(R"({"optimizations":["MADC"]})")) == "marginals");
}

TEST_CASE("savings reports round-trip and export in attribution order") {
    const auto pop = survey_population(300, 8);
    const auto r = savings_breakdown(pop);
    const auto j = to_json(r);
    CHECK(to_json(savings_from_json(j)) == j);

    const auto csv = savings_csv(r);
    CHECK(csv.rfind("optimization,contribution_pp\nHarvestVMs,", 0) == 0);
    CHECK(csv.find("\ntotal,") != std::string::npos);
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n';
    CHECK(lines == 12);
}

TEST_CASE("missing and broken files are document errors") {
    CHECK_THROWS_AS(load_json(kFixtures + "nope.json"), DocumentError);
}
