#pragma once

// Per-server local manager. Polls VM mailboxes for runtime hints, filters
// flapping hints, publishes the rest to the broker, and exposes platform
// notifications to VMs as scheduled events.

#include <deque>
#include <functional>
#include <map>
#include <vector>

#include "wi/broker.hpp"
#include "wi/hints.hpp"

namespace wi {

struct AgentConfig {
    TimeMs poll_interval_ms = 1'000;
    TimeMs eviction_notice_ms = kDefaultEvictionNoticeMs;
    FlapPolicy flap;
};

void validate(const AgentConfig& c);

struct ScheduledEvent {
    PlatformNotification notification;
    bool acknowledged = false;
};

struct VmMailbox {
    VmId vm_id;
    std::deque<RuntimeHint> outgoing;
    std::vector<ScheduledEvent> incoming;
};

struct IgnoredHint {
    RuntimeHint hint;
    std::string reason;
};

/// Hints drained from the mailboxes, checked but not yet published.
struct PreparedBatch {
    ServerId server;
    TimeMs now_ms = 0;
    std::vector<RuntimeHint> accepted;
    std::vector<IgnoredHint> ignored;
};

struct CollectResult {
    std::vector<std::pair<RuntimeHint, std::uint64_t>> published;  // hint, topic sequence
    std::vector<IgnoredHint> ignored;
    std::vector<RuntimeHint> rate_limited;
};

class NodeAgent {
public:
    using IdSource = std::function<std::uint64_t()>;

    NodeAgent(ServerId server, RegionId region, Broker& broker, AgentConfig config = {}, IdSource ids = {});

    const ServerId& server() const { return server_; }
    const AgentConfig& config() const { return config_; }

    void add_vm(const VmId& vm);
    /// Drops the mailbox and any notifications still pending for the VM.
    void remove_vm(const VmId& vm);
    bool hosts(const VmId& vm) const { return mailboxes_.count(vm) != 0; }
    std::vector<VmId> vms() const;

    /// Workload side: queue a runtime hint for the next poll.
    void write_hint(const RuntimeHint& hint);

    /// Drains mailboxes and runs the flap check. Touches only this agent, so
    /// agents on different servers may prepare concurrently.
    PreparedBatch prepare(TimeMs now_ms);

    /// Publishes a prepared batch and queues HintIgnored notifications.
    CollectResult commit(const PreparedBatch& batch);

    CollectResult collect(TimeMs now_ms) { return commit(prepare(now_ms)); }

    /// Enqueues a notification for a local VM and returns it as stored.
    /// issued_at is set to `now_ms`; an eviction whose effective time would
    /// break the notice window is pushed back unless flagged emergency.
    PlatformNotification deliver(PlatformNotification n, TimeMs now_ms);

    /// Unacknowledged notifications issued at or before `now_ms`, including
    /// ones already past their effective time.
    std::vector<PlatformNotification> read_scheduled_events(const VmId& vm, TimeMs now_ms) const;

    bool acknowledge(const VmId& vm, std::uint64_t notification_id);

private:
    VmMailbox& box(const VmId& vm);
    const VmMailbox& box(const VmId& vm) const;

    ServerId server_;
    RegionId region_;
    Broker& broker_;
    AgentConfig config_;
    IdSource ids_;
    std::uint64_t local_ids_ = 0;
    std::map<VmId, VmMailbox> mailboxes_;
    std::map<std::pair<VmId, HintKind>, std::vector<RuntimeHint>> history_;
};

}  // namespace wi
