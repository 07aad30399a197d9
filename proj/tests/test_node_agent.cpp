#include <doctest.h>

#include "wi/node_agent.hpp"

using namespace wi;

namespace {

RuntimeHint prio(const VmId& vm, PreemptionPriority p, TimeMs t) { return RuntimeHint::priority(vm, p, t); }

}  // namespace

TEST_CASE("agent config is validated") {
    Broker broker;
    AgentConfig bad;
    bad.poll_interval_ms = 0;
    bad.eviction_notice_ms = -1;
    try {
        NodeAgent agent("s1", "r1", broker, bad);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.errors().size() == 2);
    }
}

TEST_CASE("collected hints are published to the runtime topic") {
    Broker broker;
    NodeAgent agent("s1", "r1", broker);
    agent.add_vm("vm1");
    agent.write_hint(prio("vm1", PreemptionPriority::High, 1000));
    agent.write_hint(RuntimeHint::scale_preference("vm1", ScalePreference::PreferGrow, 1000));

    const auto r = agent.collect(1000);
    REQUIRE(r.published.size() == 2);
    CHECK(r.published[0].second == 1);
    CHECK(r.published[1].second == 2);
    CHECK(r.ignored.empty());
    CHECK(broker.effective("vm1").priority == PreemptionPriority::High);
    CHECK(broker.effective("vm1").scale_preference == ScalePreference::PreferGrow);

    CHECK(agent.collect(2000).published.empty());
}

TEST_CASE("hints for a VM the agent does not host are rejected") {
    Broker broker;
    NodeAgent agent("s1", "r1", broker);
    CHECK_THROWS_AS(agent.write_hint(prio("vmX", PreemptionPriority::Low, 0)), UnknownVm);
    CHECK_THROWS_AS(agent.read_scheduled_events("vmX", 0), UnknownVm);
}

TEST_CASE("flapping hints are ignored and reported back to the VM") {
    Broker broker;
    AgentConfig cfg;
    cfg.flap = {2, 10'000};
    NodeAgent agent("s1", "r1", broker, cfg);
    agent.add_vm("vm1");

    agent.write_hint(prio("vm1", PreemptionPriority::High, 0));
    agent.write_hint(prio("vm1", PreemptionPriority::Low, 1000));
    agent.write_hint(prio("vm1", PreemptionPriority::High, 2000));
    agent.write_hint(prio("vm1", PreemptionPriority::Low, 3000));
    const auto r = agent.collect(3000);
    CHECK(r.published.size() == 3);
    REQUIRE(r.ignored.size() == 1);
    CHECK(r.ignored[0].hint.timestamp_ms == 3000);
    CHECK(broker.effective("vm1").priority == PreemptionPriority::High);

    const auto events = agent.read_scheduled_events("vm1", 3000);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == NotificationKind::HintIgnored);
    CHECK(events[0].payload == static_cast<std::int64_t>(HintKind::PreemptionPriority));
    CHECK(events[0].id != 0);

    // Outside the window the same change is accepted.
    agent.write_hint(prio("vm1", PreemptionPriority::Low, 20'000));
    const auto later = agent.collect(20'000);
    CHECK(later.published.size() == 1);
    CHECK(later.ignored.empty());
}

TEST_CASE("evictions are delivered with at least the notice window") {
    Broker broker;
    NodeAgent agent("s1", "r1", broker);
    agent.add_vm("vm1");

    PlatformNotification n;
    n.vm_id = "vm1";
    n.kind = NotificationKind::Preemption;
    n.effective_at_ms = 5000;
    const auto stored = agent.deliver(n, 1000);
    CHECK(stored.issued_at_ms == 1000);
    CHECK(stored.effective_at_ms == 1000 + kDefaultEvictionNoticeMs);

    n.effective_at_ms = 100'000;
    CHECK(agent.deliver(n, 1000).effective_at_ms == 100'000);

    n.effective_at_ms = 2000;
    n.emergency = true;
    CHECK(agent.deliver(n, 1000).effective_at_ms == 2000);

    PlatformNotification up;
    up.vm_id = "vm1";
    up.kind = NotificationKind::ScaleUp;
    up.effective_at_ms = 0;
    CHECK(agent.deliver(up, 1000).effective_at_ms == 1000);
}

TEST_CASE("scheduled events stay visible until acknowledged") {
    Broker broker;
    NodeAgent agent("s1", "r1", broker);
    agent.add_vm("vm1");
    agent.add_vm("vm2");

    PlatformNotification n;
    n.vm_id = "vm1";
    n.kind = NotificationKind::Eviction;
    const auto a = agent.deliver(n, 1000);
    const auto b = agent.deliver(n, 2000);
    CHECK(a.id != b.id);

    CHECK(agent.read_scheduled_events("vm1", 500).empty());
    CHECK(agent.read_scheduled_events("vm1", 1500).size() == 1);
    CHECK(agent.read_scheduled_events("vm1", 100'000).size() == 2);
    CHECK(agent.read_scheduled_events("vm2", 100'000).empty());

    CHECK(agent.acknowledge("vm1", a.id));
    CHECK_FALSE(agent.acknowledge("vm1", a.id));
    CHECK_FALSE(agent.acknowledge("vm2", b.id));
    const auto left = agent.read_scheduled_events("vm1", 100'000);
    REQUIRE(left.size() == 1);
    CHECK(left[0].id == b.id);

    agent.remove_vm("vm1");
    CHECK_FALSE(agent.hosts("vm1"));
    CHECK(agent.vms() == std::vector<VmId>{"vm2"});
}

TEST_CASE("rate limited hints are reported, not published") {
    BrokerConfig cfg;
    cfg.rate_limit.max_events_per_second = 2;
    Broker broker(cfg);
    AgentConfig acfg;
    acfg.flap = {1000, 10'000};
    NodeAgent agent("s1", "r1", broker, acfg);
    agent.add_vm("vm1");
    for (int i = 0; i < 5; ++i) {
        agent.write_hint(prio("vm1", i % 2 ? PreemptionPriority::Low : PreemptionPriority::High, 0));
    }
    const auto r = agent.collect(0);
    CHECK(r.published.size() == 2);
    CHECK(r.rate_limited.size() == 3);
    CHECK(broker.rate_limited("vm1") == 3);
}

TEST_CASE("an injected id source numbers notifications") {
    Broker broker;
    std::uint64_t next = 100;
    NodeAgent agent("s1", "r1", broker, {}, [&] { return next++; });
    agent.add_vm("vm1");
    PlatformNotification n;
    n.vm_id = "vm1";
    CHECK(agent.deliver(n, 0).id == 100);
    n.id = 7;
    CHECK(agent.deliver(n, 0).id == 7);
    CHECK(agent.deliver(PlatformNotification{0, "vm1"}, 0).id == 101);
}
