#pragma once

// Workload models driven by the simulator. A model owns the application
// state of one workload (jobs, pods, calls), reacts to platform
// notifications, and decides which runtime hints its VMs publish.

#include <map>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "wi/hints.hpp"
#include "wi/scenario.hpp"

namespace wi {

/// Platform-side view of one VM, refreshed every tick.
struct VmView {
    VmId id;
    std::int64_t base_cores = 0;
    std::int64_t cores = 0;  // base + harvested
    double speed = 1.0;      // frequency multiplier x contention throttle
    bool ready = false;      // booted
    TimeMs created_at_ms = 0;
};

/// Application-level counters a model reports at the end of a run.
struct ModelStats {
    std::optional<TimeMs> makespan_ms;
    int critical_evictions = 0;  // evicted while running critical work
    int high_priority_notices = 0;
    double work = 0.0;  // completed work in nominal core-seconds
    double requests_generated = 0.0;
    double requests_completed = 0.0;
    double requests_dropped = 0.0;
    int tasks_requeued = 0;
    int am_restarts = 0;
};

class WorkloadModel {
public:
    WorkloadModel(const WorkloadSpec& spec, std::uint64_t seed);
    virtual ~WorkloadModel() = default;

    const WorkloadSpec& spec() const { return spec_; }

    virtual void on_vm_added(const VmView& vm, TimeMs now_ms);
    /// The VM is gone; anything still placed on it is lost.
    virtual void on_vm_removed(const VmId& vm, TimeMs now_ms);
    virtual void on_notification(const PlatformNotification& n, TimeMs now_ms);

    /// Advances the application over [now, now + dt) on the given VMs.
    virtual void step(std::span<const VmView> vms, TimeMs now_ms, TimeMs dt_ms) = 0;

    /// Runtime hints whose value differs from the last one returned for the
    /// same (vm, kind). Empty when runtime hints are disabled.
    std::vector<RuntimeHint> take_hints(TimeMs now_ms);

    /// CPU utilization in percent of the VM's cores during the last step.
    virtual double vm_util_pct(const VmId& vm) const = 0;
    virtual double vm_memory_pct(const VmId& vm) const { return vm_util_pct(vm) * 0.8; }

    /// True once the model has no further work to do (batch only).
    virtual bool finished() const { return false; }

    bool draining(const VmId& vm) const { return draining_.count(vm) != 0; }
    const ModelStats& stats() const { return stats_; }

protected:
    /// Desired runtime hint values, refreshed by step().
    void want(const VmId& vm, HintKind kind, std::int64_t value) { desired_[{vm, kind}] = value; }
    void forget(const VmId& vm);

    WorkloadSpec spec_;
    std::mt19937_64 rng_;
    ModelStats stats_;
    std::set<VmId> draining_;

private:
    std::map<std::pair<VmId, HintKind>, std::int64_t> desired_;
    std::map<std::pair<VmId, HintKind>, std::int64_t> sent_;
};

std::unique_ptr<WorkloadModel> make_model(const WorkloadSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Job scheduler with one application master per job. A VM is critical
/// while it hosts a master or a task that has run longer than the critical
/// age; its priority hint is High then, Low when empty, Normal otherwise.
class BatchModel final : public WorkloadModel {
public:
    BatchModel(const WorkloadSpec& spec, std::uint64_t seed);

    void on_vm_added(const VmView& vm, TimeMs now_ms) override;
    void on_vm_removed(const VmId& vm, TimeMs now_ms) override;
    void on_notification(const PlatformNotification& n, TimeMs now_ms) override;
    void step(std::span<const VmView> vms, TimeMs now_ms, TimeMs dt_ms) override;
    double vm_util_pct(const VmId& vm) const override;
    bool finished() const override;

    bool critical(const VmId& vm, TimeMs now_ms) const;
    PreemptionPriority priority(const VmId& vm, TimeMs now_ms) const;
    int containers_on(const VmId& vm) const;

private:
    struct Container {
        std::size_t job = 0;
        bool master = false;
        TimeMs duration_ms = 0;
        double progress_ms = 0.0;
        double checkpoint_ms = 0.0;
        std::optional<VmId> vm;
        TimeMs runs_from_ms = 0;  // placed at, plus start latency
        bool done = false;
    };
    struct Job {
        TimeMs arrival_ms = 0;
        std::vector<TimeMs> stage_ms;
        std::size_t stage = 0;
        int stage_remaining = 0;
        std::size_t master = 0;  // container index
        bool started = false;
        std::optional<TimeMs> completed_ms;
        TimeMs master_delay_ms = 0;  // extra start latency after a restart
    };

    void start_stage(std::size_t job, TimeMs now_ms);
    void requeue(std::size_t c, TimeMs now_ms);
    void schedule(std::span<const VmView> vms, TimeMs now_ms);

    std::vector<Job> jobs_;
    std::vector<Container> containers_;
    std::map<VmId, std::uint64_t> rank_;  // seeded tie-break for placement
    std::map<VmId, std::int64_t> slots_;
    std::map<VmId, int> used_;
    std::set<VmId> critical_at_notice_;
};

/// A container cluster: pods follow a diurnal request curve. All nodes but
/// one anchor advertise full preemptibility; a node at its pod cap clears
/// it. Nodes drain their pods to peers when notified of an eviction.
class MicroservicesModel final : public WorkloadModel {
public:
    MicroservicesModel(const WorkloadSpec& spec, std::uint64_t seed);

    void on_vm_removed(const VmId& vm, TimeMs now_ms) override;
    void step(std::span<const VmView> vms, TimeMs now_ms, TimeMs dt_ms) override;
    double vm_util_pct(const VmId& vm) const override;

    double rps(TimeMs t) const;
    int pods_on(const VmId& vm) const;
    std::int64_t preemptibility_hint(const VmId& vm) const;

private:
    void rebalance(std::span<const VmView> vms, int wanted);

    std::map<VmId, int> pods_;
    std::map<VmId, int> cap_;
    std::map<VmId, double> util_cache_;
    VmId anchor_;
};

/// Media servers: calls follow a diurnal curve with spikes at the top and
/// bottom of every hour. A VM raises its priority while its load is high.
class VideoConfModel final : public WorkloadModel {
public:
    VideoConfModel(const WorkloadSpec& spec, std::uint64_t seed);

    void on_vm_removed(const VmId& vm, TimeMs now_ms) override;
    void step(std::span<const VmView> vms, TimeMs now_ms, TimeMs dt_ms) override;
    double vm_util_pct(const VmId& vm) const override;

    double plateau(TimeMs t) const;
    double calls(TimeMs t) const;

private:
    std::map<VmId, double> util_;
};

}  // namespace wi
