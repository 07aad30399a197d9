#pragma once

// The global hint manager: a topic bus with per-topic sequencing, a
// per-publisher token-bucket rate limiter, an append-only event log, and a
// hint store that answers per-VM and aggregate queries.

#include <array>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wi/codec.hpp"
#include "wi/event_log.hpp"
#include "wi/hints.hpp"

namespace wi {

enum class TopicNamespace : std::uint8_t { DeploymentHints, RuntimeHints, PlatformNotifications, OptimizationEvents };

std::string_view to_string(TopicNamespace ns);
std::optional<TopicNamespace> parse_namespace(std::string_view s);

inline constexpr std::size_t kMaxTopicBytes = 256;

class MalformedTopic : public Error {
public:
    using Error::Error;
};
class MalformedFilter : public Error {
public:
    using Error::Error;
};

struct Topic {
    TopicNamespace ns;
    std::vector<std::string> segments;  // scope path, at least one segment

    std::string str() const;
};

Topic parse_topic(std::string_view s);

/// A topic filter; a trailing `*` segment matches one or more further
/// segments.
class TopicFilter {
public:
    static TopicFilter parse(std::string_view s);
    bool matches(const Topic& t) const;
    const std::string& str() const { return text_; }

private:
    TopicNamespace ns_{};
    std::vector<std::string> prefix_;
    bool wildcard_ = false;
    std::string text_;
};

/// Topic helpers for the conventional scope paths.
std::string runtime_topic(const RegionId& region, const ServerId& server, const VmId& vm);
std::string notification_topic(const RegionId& region, const ServerId& server, const VmId& vm);
std::string deployment_topic(const RegionId& region, const WorkloadId& workload);
std::string optimization_topic(std::string_view optimization);

// ---------------------------------------------------------------------------
// Rate limiting

struct RateLimitPolicy {
    std::int64_t max_events_per_second = 100;
    std::int64_t burst = 0;  // 0: equal to the rate
    std::map<std::string, std::int64_t> publisher_rates;  // per-publisher overrides

    std::int64_t rate_for(const std::string& publisher) const;
};

/// Token bucket in integer milli-tokens; starts full.
class TokenBucket {
public:
    TokenBucket(std::int64_t rate_per_s, std::int64_t burst);
    bool try_take(TimeMs now_ms);
    std::int64_t rate() const { return rate_; }

private:
    std::int64_t rate_;
    std::int64_t capacity_mt_;
    std::int64_t tokens_mt_;
    std::optional<TimeMs> last_;
};

// ---------------------------------------------------------------------------
// Hint store

enum class Scope : std::uint8_t { Vm, Server, Rack, Workload, Region };

std::string_view to_string(Scope s);
std::optional<Scope> parse_scope(std::string_view s);

class UnknownScopeKey : public Error {
public:
    using Error::Error;
};
class UnknownVm : public Error {
public:
    using Error::Error;
};

struct HintAggregate {
    int vm_count = 0;
    std::int64_t total_cores = 0;
    std::array<int, 3> priority_counts{};  // indexed by PreemptionPriority
    std::int64_t preemptible_cores = 0;    // cores of VMs with preemptibility > 0
    int min_availability_nines = 5;
    int region_independent_vms = 0;
    int delay_tolerant_vms = 0;

    int count(PreemptionPriority p) const { return priority_counts[static_cast<std::size_t>(p)]; }
    HintAggregate& operator+=(const HintAggregate& o);
    bool operator==(const HintAggregate&) const = default;
};

using HintView = std::variant<EffectiveHints, HintAggregate>;

class HintStore {
public:
    /// Folds one logged event into the store. Events that carry no hint
    /// state are ignored.
    void apply(const EventEnvelope& e);

    bool knows_vm(const VmId& vm) const { return vms_.count(vm) != 0; }
    const TopologyRecord* topology(const VmId& vm) const;

    EffectiveHints effective(const VmId& vm) const;
    HintView get(Scope scope, const std::string& key) const;
    HintAggregate aggregate(Scope scope, const std::string& key) const;

    /// Members of a coarse scope, sorted.
    std::vector<VmId> vms_in(Scope scope, const std::string& key) const;

    /// Canonical byte encoding of the full store state.
    Bytes snapshot() const;

    bool operator==(const HintStore& o) const { return snapshot() == o.snapshot(); }

private:
    HintAggregate single(const VmId& vm) const;

    std::map<VmId, TopologyRecord> vms_;
    std::map<VmId, EffectiveHints> hints_;
    std::map<WorkloadId, HintSet> workload_hints_;
};

struct ReplayResult {
    HintStore store;
    std::size_t records = 0;
    std::map<std::string, std::uint64_t> last_sequence;
    std::optional<CorruptRecord> error;
};

/// Rebuilds the store from a log prefix; stops at the last good record.
ReplayResult replay(std::string_view log);

// ---------------------------------------------------------------------------
// Broker

enum class DeliveryMode : std::uint8_t { Immediate, Deferred };

struct BrokerConfig {
    RateLimitPolicy rate_limit;
    DeliveryMode delivery = DeliveryMode::Immediate;
};

enum class PublishStatus : std::uint8_t { Accepted, RateLimited };

struct PublishResult {
    PublishStatus status = PublishStatus::Accepted;
    std::uint64_t sequence = 0;

    bool accepted() const { return status == PublishStatus::Accepted; }
};

namespace detail {
struct SubscriptionState;
}

/// Handle to a live subscription. Copies share the same queue; the handle
/// may be moved to another thread.
class Subscription {
public:
    Subscription() = default;

    std::optional<EventEnvelope> poll();
    std::vector<EventEnvelope> drain();
    std::size_t pending() const;
    void close();
    bool is_open() const;
    const std::string& filter() const;

private:
    friend class Broker;
    explicit Subscription(std::shared_ptr<detail::SubscriptionState> s) : state_(std::move(s)) {}
    std::shared_ptr<detail::SubscriptionState> state_;
};

class Broker {
public:
    explicit Broker(BrokerConfig config = {});

    /// Rebuilds a broker (store and topic sequences) from a log.
    static std::unique_ptr<Broker> recover(std::string_view log, BrokerConfig config = {});

    PublishResult publish(const std::string& publisher_id, std::string_view topic, Payload payload,
                          TimeMs timestamp_ms);

    Subscription subscribe(std::string_view filter);

    void register_vm(TopologyRecord vm, TimeMs timestamp_ms);
    void unregister_vm(const VmId& vm, TimeMs timestamp_ms);

    /// All-or-nothing: throws UnknownVm before writing if any VM is unknown.
    std::uint64_t set_deployment_hints(const WorkloadId& workload, const std::vector<VmId>& vms,
                                       const HintSet& hints, TimeMs timestamp_ms);

    HintView get(Scope scope, const std::string& key) const;
    EffectiveHints effective(const VmId& vm) const;
    std::optional<TopologyRecord> topology(const VmId& vm) const;

    /// Delivers events queued in Deferred mode; returns how many deliveries
    /// were made.
    std::size_t step();

    HintStore store() const;
    Bytes log_bytes() const;
    std::uint64_t rate_limited(const std::string& publisher_id) const;
    std::uint64_t last_sequence(const std::string& topic) const;

private:
    PublishResult publish_locked(const std::string& publisher_id, const Topic& topic, Payload payload,
                                 TimeMs timestamp_ms, bool limited);
    void deliver_locked(const EventEnvelope& e, const Topic& topic);

    BrokerConfig config_;
    mutable std::mutex mu_;
    EventLog log_;
    HintStore store_;
    std::map<std::string, std::uint64_t> sequences_;
    std::map<std::pair<std::string, TopicNamespace>, TokenBucket> buckets_;
    std::map<std::string, std::uint64_t> rate_limited_;
    std::vector<std::shared_ptr<detail::SubscriptionState>> subs_;
    std::deque<std::pair<EventEnvelope, Topic>> deferred_;
};

}  // namespace wi
