#pragma once

// Message types carried by the broker and their binary encoding. A payload
// starts with a one-byte type tag; an envelope wraps it with topic,
// sequence, publisher and timestamp.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "wi/event_log.hpp"
#include "wi/hints.hpp"

namespace wi {

/// Deployment hints applied to a set of VMs of one workload.
struct DeploymentRecord {
    WorkloadId workload;
    std::vector<VmId> vms;
    HintSet hints;
    bool operator==(const DeploymentRecord&) const = default;
};

/// Placement of a VM, used to aggregate hints per server, rack and region.
struct TopologyRecord {
    VmId vm;
    WorkloadId workload;
    ServerId server;
    std::string rack;
    RegionId region;
    std::int64_t cores = 0;
    bool removed = false;
    bool operator==(const TopologyRecord&) const = default;
};

/// Decision or arbitration outcome published by an optimization manager.
struct OptimizationEvent {
    std::string optimization;
    std::string action;
    std::string scope;
    std::int64_t amount = 0;
    bool operator==(const OptimizationEvent&) const = default;
};

using Payload = std::variant<RuntimeHint, DeploymentRecord, PlatformNotification, OptimizationEvent, TopologyRecord>;

struct EventEnvelope {
    std::string topic;
    std::uint64_t sequence = 0;
    std::string publisher_id;
    TimeMs timestamp_ms = 0;
    Payload payload;
    bool operator==(const EventEnvelope&) const = default;
};

class MalformedPayload : public Error {
public:
    using Error::Error;
};

Bytes encode_payload(const Payload& p);
Payload decode_payload(std::string_view bytes);

Bytes encode_envelope(const EventEnvelope& e);
EventEnvelope decode_envelope(std::string_view bytes);

}  // namespace wi
