#include <doctest.h>

#include "wi/scenario.hpp"

using namespace wi;
using nlohmann::json;

namespace {

const std::string kSource = WI_SOURCE_DIR;

json minimal() {
    return json::parse(R"({
      "duration_ms": 60000,
      "regions": [{"id": "home"}],
      "servers": [{"id": "s", "count": 3, "racks": 2, "region": "home", "cores": 8}],
      "workloads": [{"id": "w", "model": "batch", "region": "home", "vms": 2, "cores_per_vm": 2,
                      "params": {"jobs": [{"stages": [{"tasks": 2, "task_ms": 1000}]}]}}]
    })");
}

std::string error_path(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const DocumentError& e) {
        return e.path();
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("a minimal scenario parses with defaults") {
    const auto s = parse_scenario(minimal());
    CHECK(s.name == "scenario");
    CHECK(s.seed == 1);
    CHECK(s.tick_ms == 1000);
    REQUIRE(s.servers.size() == 3);
    CHECK(s.servers[0].id == "s1");
    CHECK(s.servers[2].id == "s3");
    CHECK(s.servers[0].rack == "s-r1");
    CHECK(s.servers[1].rack == "s-r2");
    CHECK(s.servers[2].rack == "s-r1");
    REQUIRE(s.workloads.size() == 1);
    CHECK(s.workloads[0].hints == conservative_default());
    CHECK(s.optimizations.empty());
}

TEST_CASE("bundled scenarios load and round-trip") {
    for (const char* name : {"batch", "batch_deployment_hints", "microservices", "videoconf"}) {
        CAPTURE(name);
        const auto s = load_scenario(kSource + "/scenarios/" + name + ".json");
        const auto j = to_json(s);
        const auto again = parse_scenario(j);
        CHECK(to_json(again) == j);
        CHECK(again.servers == s.servers);
        CHECK(again.workloads.size() == s.workloads.size());
    }
}

TEST_CASE("validation errors name the offending field") {
    auto doc = minimal();
    doc["workloads"][0]["hints"] = {{"availability_nines", 7}};
    CHECK(error_path(doc) == "workloads[0].hints.availability_nines");

    doc = minimal();
    doc["workloads"][0]["colour"] = "red";
    CHECK(error_path(doc) == "workloads[0].colour");

    doc = minimal();
    doc.erase("duration_ms");
    CHECK(error_path(doc) == "duration_ms");

    doc = minimal();
    doc["workloads"][0]["region"] = "mars";
    CHECK(error_path(doc) == "workloads[0].region");

    doc = minimal();
    doc["optimizations"] = {"SpotVMs", "Teleport"};
    CHECK(error_path(doc) == "optimizations[1]");

    doc = minimal();
    doc["servers"][0]["cores"] = 0;
    CHECK(error_path(doc) == "servers[0].cores");

    doc = minimal();
    doc["events"] = json::array({{{"type", "power_event"}, {"at_ms", 0}, {"severity", 0.5}, {"servers", {"zz"}}}});
    CHECK(error_path(doc) == "events[0].servers[0]");

    doc = minimal();
    doc["events"] = json::array({{{"type", "earthquake"}, {"at_ms", 0}}});
    CHECK(error_path(doc) == "events[0].type");

    doc = minimal();
    doc["workloads"][0]["vms"] = "two";
    CHECK(error_path(doc) == "workloads[0].vms");

    CHECK(error_path(json::array()) == "<root>");
}

TEST_CASE("loading a missing or broken file is a document error") {
    CHECK_THROWS_AS(load_scenario(kSource + "/scenarios/does_not_exist.json"), DocumentError);
    CHECK_THROWS_AS(load_scenario(kSource + "/tests/fixtures/scenario_malformed.json"), DocumentError);
}

TEST_CASE("an empty workload list still serializes as a list") {
    auto doc = minimal();
    doc["workloads"] = json::array();
    const auto s = parse_scenario(doc);
    CHECK(to_json(s)["workloads"].is_array());
}
