#include <doctest.h>

#include <thread>

#include "wi/broker.hpp"
#include "wi/codec.hpp"
#include "wi/event_log.hpp"

using namespace wi;

namespace {

void le32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

TopologyRecord topo(const VmId& vm, const ServerId& server, std::int64_t cores = 4) {
    return {vm, "w", server, "rack-" + server, "r1", cores, false};
}

HintSet relaxed() {
    HintSet h = conservative_default();
    h.preemptibility_pct = 50;
    h.availability_nines = 3;
    return h;
}

}  // namespace

TEST_CASE("log records are length and checksum framed") {
    EventLog log;
    CHECK(log.append("abc") == 0);
    CHECK(log.append("") == 11);
    std::string expected;
    le32(expected, 3);
    le32(expected, checksum("abc"));
    expected += "abc";
    le32(expected, 0);
    le32(expected, checksum(""));
    CHECK(log.bytes() == expected);
    CHECK(checksum("123456789") == 0xCBF43926u);

    const auto r = read_records(log.bytes());
    REQUIRE(r.payloads.size() == 2);
    CHECK(r.payloads[0] == "abc");
    CHECK_FALSE(r.error);
}

TEST_CASE("reading stops at a corrupt or truncated record") {
    EventLog log;
    log.append("first");
    log.append("second");
    auto bytes = log.bytes();
    bytes[bytes.size() - 1] ^= 0x01;
    auto r = read_records(bytes);
    CHECK(r.payloads.size() == 1);
    REQUIRE(r.error);
    CHECK(r.error->offset == 13);
    CHECK(r.good_bytes == 13);

    r = read_records(std::string_view(log.bytes()).substr(0, 16));
    CHECK(r.payloads.size() == 1);
    CHECK(r.error);
}

TEST_CASE("payloads round-trip through the codec") {
    PlatformNotification n;
    n.id = 9;
    n.vm_id = "vm-1";
    n.kind = NotificationKind::Preemption;
    n.issued_at_ms = 5;
    n.effective_at_ms = 30'005;
    n.payload = -2;
    n.emergency = true;
    n.detail = "power";
    const std::vector<Payload> payloads = {
        RuntimeHint{"vm-1", HintKind::DelayTolerance, 1'000, 42, HintSource::WorkloadController},
        DeploymentRecord{"w", {"a", "b"}, relaxed()},
        n,
        OptimizationEvent{"SpotVMs", "reclaim", "r1", 12},
        topo("vm-1", "s1"),
    };
    for (const auto& p : payloads) CHECK(decode_payload(encode_payload(p)) == p);

    const EventEnvelope e{"runtime-hints/r1/s1/vm-1", 7, "vm-1", 99, payloads[0]};
    CHECK(decode_envelope(encode_envelope(e)) == e);
    auto bad = encode_payload(payloads[0]);
    bad[0] = char(0x7f);
    CHECK_THROWS_AS(decode_payload(bad), MalformedPayload);
}

TEST_CASE("topics and filters") {
    const auto t = parse_topic("runtime-hints/r1/s1/vm-1");
    CHECK(t.ns == TopicNamespace::RuntimeHints);
    CHECK(t.segments.size() == 3);
    CHECK(t.str() == "runtime-hints/r1/s1/vm-1");
    CHECK_THROWS_AS(parse_topic("telemetry/x"), MalformedTopic);
    CHECK_THROWS_AS(parse_topic("runtime-hints"), MalformedTopic);
    CHECK_THROWS_AS(parse_topic("runtime-hints/a//b"), MalformedTopic);

    const auto f = TopicFilter::parse("runtime-hints/r1/*");
    CHECK(f.matches(t));
    CHECK_FALSE(f.matches(parse_topic("runtime-hints/r1")));
    CHECK_FALSE(f.matches(parse_topic("runtime-hints/r2/s1/vm-1")));
    CHECK(TopicFilter::parse("runtime-hints/r1/s1/vm-1").matches(t));
    CHECK_THROWS_AS(TopicFilter::parse("runtime-hints/*/s1"), MalformedFilter);
}

TEST_CASE("token bucket") {
    TokenBucket b(2, 0);
    CHECK(b.try_take(0));
    CHECK(b.try_take(0));
    CHECK_FALSE(b.try_take(0));
    CHECK_FALSE(b.try_take(499));
    CHECK(b.try_take(500));
    CHECK_FALSE(b.try_take(500));
}

TEST_CASE("publishing sequences per topic and validates the namespace") {
    Broker broker;
    broker.register_vm(topo("vm-1", "s1"), 0);
    const auto topic = runtime_topic("r1", "s1", "vm-1");
    auto hint = RuntimeHint::priority("vm-1", PreemptionPriority::High, 1);
    CHECK(broker.publish("vm-1", topic, hint, 1).sequence == 1);
    CHECK(broker.publish("vm-1", topic, hint, 2).sequence == 2);
    CHECK(broker.last_sequence(topic) == 2);
    CHECK(broker.effective("vm-1").priority == PreemptionPriority::High);
    CHECK_THROWS(broker.publish("vm-1", optimization_topic("SpotVMs"), hint, 3));
}

TEST_CASE("a flooding publisher does not disturb another") {
    BrokerConfig cfg;
    cfg.rate_limit.max_events_per_second = 5;
    Broker broker(cfg);
    broker.register_vm(topo("a", "s1"), 0);
    broker.register_vm(topo("b", "s1"), 0);
    int b_accepted = 0;
    for (TimeMs t = 0; t < 2000; t += 10) {
        for (int k = 0; k < 5; ++k) broker.publish("a", runtime_topic("r1", "s1", "a"), RuntimeHint{"a", HintKind::Preemptibility, k, t}, t);
        if (t % 200 == 0) {
            b_accepted += broker.publish("b", runtime_topic("r1", "s1", "b"), RuntimeHint{"b", HintKind::Preemptibility, 10, t}, t).accepted();
        }
    }
    CHECK(b_accepted == 10);
    CHECK(broker.rate_limited("a") > 900);
    CHECK(broker.rate_limited("b") == 0);
}

TEST_CASE("deployment hints are all or nothing") {
    Broker broker;
    broker.register_vm(topo("vm-1", "s1"), 0);
    const auto before = broker.store();
    CHECK_THROWS_AS(broker.set_deployment_hints("w", {"vm-1", "ghost"}, relaxed(), 1), UnknownVm);
    CHECK(broker.store() == before);
    broker.set_deployment_hints("w", {"vm-1"}, relaxed(), 1);
    CHECK(broker.effective("vm-1").base == relaxed());
}

TEST_CASE("aggregate queries over server and region") {
    Broker broker;
    broker.register_vm(topo("a", "s1", 4), 0);
    broker.register_vm(topo("b", "s1", 8), 0);
    broker.register_vm(topo("c", "s2", 2), 0);
    broker.set_deployment_hints("w", {"a", "b"}, relaxed(), 0);
    broker.publish("b", runtime_topic("r1", "s1", "b"), RuntimeHint::priority("b", PreemptionPriority::Low, 1), 1);
    const auto s1 = broker.store().aggregate(Scope::Server, "s1");
    CHECK(s1.vm_count == 2);
    CHECK(s1.total_cores == 12);
    CHECK(s1.preemptible_cores == 12);
    CHECK(s1.count(PreemptionPriority::Low) == 1);
    CHECK(s1.min_availability_nines == 3);
    const auto region = broker.store().aggregate(Scope::Region, "r1");
    CHECK(region.vm_count == 3);
    CHECK(region.min_availability_nines == 3);
    CHECK(region.preemptible_cores == 12);
    CHECK_THROWS_AS(broker.store().aggregate(Scope::Rack, "nowhere"), UnknownScopeKey);
    CHECK(std::holds_alternative<EffectiveHints>(broker.get(Scope::Vm, "a")));
}

TEST_CASE("replay and recovery reproduce the live store") {
    Broker broker;
    broker.register_vm(topo("a", "s1"), 0);
    broker.register_vm(topo("b", "s2"), 0);
    broker.set_deployment_hints("w", {"a", "b"}, relaxed(), 1);
    broker.publish("a", runtime_topic("r1", "s1", "a"), RuntimeHint{"a", HintKind::Preemptibility, 90, 2}, 2);
    broker.publish("optimizer", optimization_topic("SpotVMs"), OptimizationEvent{"SpotVMs", "reclaim", "r1", 4}, 3);
    broker.unregister_vm("b", 4);

    const auto log = broker.log_bytes();
    const auto r = replay(log);
    CHECK(r.store == broker.store());
    CHECK_FALSE(r.error);
    CHECK(r.last_sequence.at(runtime_topic("r1", "s1", "a")) == 1);

    const auto recovered = Broker::recover(log);
    CHECK(recovered->store() == broker.store());
    CHECK(recovered->publish("a", runtime_topic("r1", "s1", "a"), RuntimeHint{"a", HintKind::Preemptibility, 10, 5}, 5)
              .sequence == 2);

    // A torn tail is dropped; the prefix still replays.
    const auto torn = replay(std::string_view(log).substr(0, log.size() - 3));
    CHECK(torn.error);
    CHECK(torn.records + 1 == r.records);
}

TEST_CASE("subscriptions see matching events in order") {
    Broker broker;
    broker.register_vm(topo("a", "s1"), 0);
    auto sub = broker.subscribe("runtime-hints/r1/*");
    auto other = broker.subscribe("platform-notifications/*");
    for (int i = 0; i < 3; ++i) {
        broker.publish("a", runtime_topic("r1", "s1", "a"), RuntimeHint{"a", HintKind::Preemptibility, i, i}, i);
    }
    const auto got = sub.drain();
    REQUIRE(got.size() == 3);
    CHECK(got[2].sequence == 3);
    CHECK(other.pending() == 0);
}

TEST_CASE("concurrent publishers keep per-topic sequences dense") {
    Broker broker;
    for (int v = 0; v < 4; ++v) broker.register_vm(topo("vm" + std::to_string(v), "s1"), 0);
    std::vector<std::thread> threads;
    for (int v = 0; v < 4; ++v) {
        threads.emplace_back([&, v] {
            const auto vm = "vm" + std::to_string(v);
            for (int i = 0; i < 50; ++i) {
                broker.publish(vm, runtime_topic("r1", "s1", vm), RuntimeHint{vm, HintKind::Preemptibility, i % 2, i}, i * 1000);
            }
        });
    }
    for (auto& t : threads) t.join();
    for (int v = 0; v < 4; ++v) {
        const auto vm = "vm" + std::to_string(v);
        CHECK(broker.last_sequence(runtime_topic("r1", "s1", vm)) == 50);
    }
    CHECK(replay(broker.log_bytes()).store == broker.store());
}
