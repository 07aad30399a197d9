#include <doctest.h>

#include "wi/models.hpp"

using namespace wi;

namespace {

WorkloadSpec batch_spec(int tasks, TimeMs task_ms) {
    WorkloadSpec w;
    w.id = "job";
    w.model = WorkloadModelKind::BatchAnalytics;
    w.cores_per_vm = 4;
    w.batch.jobs = {{0, {{tasks, task_ms}}}};
    return w;
}

VmView vm(const VmId& id, std::int64_t cores) {
    VmView v;
    v.id = id;
    v.base_cores = cores;
    v.cores = cores;
    v.ready = true;
    return v;
}

void run_until(WorkloadModel& m, std::span<const VmView> vms, TimeMs& now, TimeMs until) {
    for (; now < until && !m.finished(); now += 1000) m.step(vms, now, 1000);
}

}  // namespace

TEST_CASE("model factory picks the model kind") {
    WorkloadSpec w = batch_spec(1, 1000);
    CHECK(dynamic_cast<BatchModel*>(make_model(w, 1).get()));
    w.model = WorkloadModelKind::Microservices;
    CHECK(dynamic_cast<MicroservicesModel*>(make_model(w, 1).get()));
    w.model = WorkloadModelKind::VideoConference;
    CHECK(dynamic_cast<VideoConfModel*>(make_model(w, 1).get()));
}

TEST_CASE("a batch job runs its master, then its tasks") {
    auto spec = batch_spec(2, 10'000);
    BatchModel m(spec, 1);
    const std::vector<VmView> vms{vm("v1", 4)};
    m.on_vm_added(vms[0], 0);
    TimeMs now = 0;
    run_until(m, vms, now, 100'000);
    REQUIRE(m.finished());
    REQUIRE(m.stats().makespan_ms);
    // Master starts at 5 s, tasks at 10 s, each runs 10 s.
    CHECK(*m.stats().makespan_ms == 20'000);
    CHECK(m.stats().work == doctest::Approx(20.0));
    CHECK(m.containers_on("v1") == 0);
}

TEST_CASE("slow VMs stretch task time") {
    auto spec = batch_spec(1, 10'000);
    BatchModel m(spec, 1);
    auto v = vm("v1", 4);
    v.speed = 0.5;
    const std::vector<VmView> vms{v};
    m.on_vm_added(v, 0);
    TimeMs now = 0;
    run_until(m, vms, now, 100'000);
    REQUIRE(m.stats().makespan_ms);
    CHECK(*m.stats().makespan_ms == 30'000);
}

TEST_CASE("batch priorities follow criticality") {
    auto spec = batch_spec(6, 600'000);
    BatchModel m(spec, 3);
    const std::vector<VmView> vms{vm("v1", 1), vm("v2", 8)};
    for (const auto& v : vms) m.on_vm_added(v, 0);
    TimeMs now = 0;
    m.step(vms, now, 1000);

    // The single-slot VM takes the master under best-fit placement.
    CHECK(m.containers_on("v1") == 1);
    CHECK(m.critical("v1", 1000));
    CHECK(m.priority("v1", 1000) == PreemptionPriority::High);
    CHECK(m.priority("v2", 1000) == PreemptionPriority::Low);

    run_until(m, vms, now, 20'000);
    CHECK(m.containers_on("v2") == 6);
    CHECK(m.priority("v2", 20'000) == PreemptionPriority::Normal);
    CHECK(m.priority("v2", 80'000) == PreemptionPriority::High);

    const auto hints = m.take_hints(now);
    CHECK(hints.size() == 2);
    CHECK(m.take_hints(now).empty());
}

TEST_CASE("evicting a critical VM is counted and its work requeued") {
    auto spec = batch_spec(4, 600'000);
    BatchModel m(spec, 3);
    const std::vector<VmView> vms{vm("v1", 1), vm("v2", 8)};
    for (const auto& v : vms) m.on_vm_added(v, 0);
    TimeMs now = 0;
    run_until(m, vms, now, 120'000);
    REQUIRE(m.containers_on("v2") == 4);

    PlatformNotification n;
    n.vm_id = "v2";
    n.kind = NotificationKind::Preemption;
    m.on_notification(n, now);
    CHECK(m.stats().high_priority_notices == 1);
    CHECK(m.stats().tasks_requeued == 4);
    CHECK(m.containers_on("v2") == 0);
    m.on_vm_removed("v2", now + 30'000);
    CHECK(m.stats().critical_evictions == 1);

    // Losing the master VM restarts the job's master.
    m.on_vm_removed("v1", now + 30'000);
    CHECK(m.stats().am_restarts == 1);
}

TEST_CASE("deployment-only workloads publish no runtime hints") {
    auto spec = batch_spec(2, 10'000);
    spec.runtime_hints = false;
    BatchModel m(spec, 1);
    const std::vector<VmView> vms{vm("v1", 4)};
    m.on_vm_added(vms[0], 0);
    m.step(vms, 0, 1000);
    CHECK(m.take_hints(1000).empty());
}

TEST_CASE("microservice load follows a diurnal curve") {
    WorkloadSpec w;
    w.model = WorkloadModelKind::Microservices;
    MicroservicesModel m(w, 1);
    CHECK(m.rps(0) == doctest::Approx(w.micro.trough_rps));
    CHECK(m.rps(w.micro.period_ms / 2) == doctest::Approx(w.micro.peak_rps));
    CHECK(m.rps(w.micro.period_ms) == doctest::Approx(w.micro.trough_rps));
}

TEST_CASE("microservice nodes advertise preemptibility except the anchor") {
    WorkloadSpec w;
    w.id = "shop";
    w.model = WorkloadModelKind::Microservices;
    w.cores_per_vm = 4;
    MicroservicesModel m(w, 1);
    const std::vector<VmView> vms{vm("a", 4), vm("b", 4), vm("c", 4), vm("d", 4)};
    for (const auto& v : vms) m.on_vm_added(v, 0);
    m.step(vms, 0, 1000);
    int anchors = 0;
    int pods = 0;
    for (const auto& v : vms) {
        anchors += m.preemptibility_hint(v.id) == 0 ? 1 : 0;
        pods += m.pods_on(v.id);
    }
    CHECK(anchors >= 1);
    CHECK(pods >= int(std::ceil(m.rps(0) / w.micro.rps_per_pod)));
    CHECK(m.vm_util_pct("a") > 0.0);
}

TEST_CASE("video calls spike at the top and bottom of the hour") {
    WorkloadSpec w;
    w.model = WorkloadModelKind::VideoConference;
    VideoConfModel m(w, 1);
    CHECK(m.calls(0) == doctest::Approx(m.plateau(0) * (1.0 + w.conf.spike_amplitude)));
    CHECK(m.calls(600'000) == doctest::Approx(m.plateau(600'000)));
    CHECK(m.calls(1'800'000) == doctest::Approx(m.plateau(1'800'000) * (1.0 + w.conf.spike_amplitude)));
    CHECK(m.plateau(w.conf.period_ms / 2) == doctest::Approx(w.conf.peak_calls));
}
