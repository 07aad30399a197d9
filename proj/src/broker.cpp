#include "wi/broker.hpp"

#include <algorithm>

namespace wi {

namespace {

constexpr std::array<std::string_view, 4> kNamespaces = {
    "deployment-hints", "runtime-hints", "platform-notifications", "optimization-events"};
constexpr std::array<std::string_view, 5> kScopes = {"vm", "server", "rack", "workload", "region"};

const std::string kPlatformPublisher = "platform";

std::vector<std::string> split(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find('/', start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool payload_fits(TopicNamespace ns, const Payload& p) {
    switch (ns) {
        case TopicNamespace::DeploymentHints:
            return std::holds_alternative<DeploymentRecord>(p) || std::holds_alternative<TopologyRecord>(p);
        case TopicNamespace::RuntimeHints: return std::holds_alternative<RuntimeHint>(p);
        case TopicNamespace::PlatformNotifications: return std::holds_alternative<PlatformNotification>(p);
        case TopicNamespace::OptimizationEvents: return std::holds_alternative<OptimizationEvent>(p);
    }
    return false;
}

std::string seg(const std::string& s) { return s.empty() ? std::string("_") : s; }

}  // namespace

std::string_view to_string(TopicNamespace ns) { return kNamespaces[static_cast<std::size_t>(ns)]; }

std::optional<TopicNamespace> parse_namespace(std::string_view s) {
    for (std::size_t i = 0; i < kNamespaces.size(); ++i) {
        if (kNamespaces[i] == s) return static_cast<TopicNamespace>(i);
    }
    return std::nullopt;
}

std::string Topic::str() const {
    std::string out(to_string(ns));
    for (const auto& s : segments) out += "/" + s;
    return out;
}

Topic parse_topic(std::string_view s) {
    if (s.size() > kMaxTopicBytes) throw MalformedTopic("topic longer than 256 bytes");
    auto parts = split(s);
    auto ns = parse_namespace(parts.front());
    if (!ns) throw MalformedTopic("unknown topic namespace '" + parts.front() + "'");
    if (parts.size() < 2) throw MalformedTopic("topic '" + std::string(s) + "' has no scope path");
    Topic t{*ns, {parts.begin() + 1, parts.end()}};
    for (const auto& p : t.segments) {
        if (p.empty()) throw MalformedTopic("topic '" + std::string(s) + "' has an empty segment");
        if (p.find('*') != std::string::npos) throw MalformedTopic("wildcard in topic '" + std::string(s) + "'");
    }
    return t;
}

TopicFilter TopicFilter::parse(std::string_view s) {
    if (s.size() > kMaxTopicBytes) throw MalformedFilter("filter longer than 256 bytes");
    auto parts = split(s);
    auto ns = parse_namespace(parts.front());
    if (!ns) throw MalformedFilter("unknown topic namespace '" + parts.front() + "'");
    if (parts.size() < 2) throw MalformedFilter("filter '" + std::string(s) + "' has no scope path");
    TopicFilter f;
    f.ns_ = *ns;
    f.text_ = std::string(s);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto& p = parts[i];
        if (p == "*" && i + 1 == parts.size()) {
            f.wildcard_ = true;
            break;
        }
        if (p.empty() || p.find('*') != std::string::npos) {
            throw MalformedFilter("bad segment '" + p + "' in filter '" + std::string(s) + "'");
        }
        f.prefix_.push_back(p);
    }
    return f;
}

bool TopicFilter::matches(const Topic& t) const {
    if (t.ns != ns_) return false;
    if (wildcard_ ? t.segments.size() <= prefix_.size() : t.segments.size() != prefix_.size()) return false;
    return std::equal(prefix_.begin(), prefix_.end(), t.segments.begin());
}

std::string runtime_topic(const RegionId& region, const ServerId& server, const VmId& vm) {
    return "runtime-hints/" + seg(region) + "/" + seg(server) + "/" + seg(vm);
}
std::string notification_topic(const RegionId& region, const ServerId& server, const VmId& vm) {
    return "platform-notifications/" + seg(region) + "/" + seg(server) + "/" + seg(vm);
}
std::string deployment_topic(const RegionId& region, const WorkloadId& workload) {
    return "deployment-hints/" + seg(region) + "/" + seg(workload);
}
std::string optimization_topic(std::string_view optimization) {
    return "optimization-events/" + seg(std::string(optimization));
}

// ---------------------------------------------------------------------------

std::int64_t RateLimitPolicy::rate_for(const std::string& publisher) const {
    auto it = publisher_rates.find(publisher);
    return it == publisher_rates.end() ? max_events_per_second : it->second;
}

TokenBucket::TokenBucket(std::int64_t rate_per_s, std::int64_t burst)
    : rate_(rate_per_s), capacity_mt_((burst > 0 ? burst : rate_per_s) * 1000), tokens_mt_(capacity_mt_) {
    if (rate_per_s <= 0) throw Error("rate limit must be > 0");
}

bool TokenBucket::try_take(TimeMs now_ms) {
    // rate events/s == rate milli-tokens/ms
    if (last_ && now_ms > *last_) {
        tokens_mt_ = std::min(capacity_mt_, tokens_mt_ + (now_ms - *last_) * rate_);
    }
    if (!last_ || now_ms > *last_) last_ = now_ms;
    if (tokens_mt_ < 1000) return false;
    tokens_mt_ -= 1000;
    return true;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Scope s) { return kScopes[static_cast<std::size_t>(s)]; }

std::optional<Scope> parse_scope(std::string_view s) {
    for (std::size_t i = 0; i < kScopes.size(); ++i) {
        if (kScopes[i] == s) return static_cast<Scope>(i);
    }
    return std::nullopt;
}

HintAggregate& HintAggregate::operator+=(const HintAggregate& o) {
    vm_count += o.vm_count;
    total_cores += o.total_cores;
    for (std::size_t i = 0; i < priority_counts.size(); ++i) priority_counts[i] += o.priority_counts[i];
    preemptible_cores += o.preemptible_cores;
    min_availability_nines = std::min(min_availability_nines, o.min_availability_nines);
    region_independent_vms += o.region_independent_vms;
    delay_tolerant_vms += o.delay_tolerant_vms;
    return *this;
}

void HintStore::apply(const EventEnvelope& e) {
    if (const auto* t = std::get_if<TopologyRecord>(&e.payload)) {
        if (t->removed) {
            vms_.erase(t->vm);
            hints_.erase(t->vm);
            return;
        }
        vms_[t->vm] = *t;
        if (!hints_.count(t->vm)) {
            auto w = workload_hints_.find(t->workload);
            hints_[t->vm] = make_effective(w == workload_hints_.end() ? conservative_default() : w->second);
        }
    } else if (const auto* d = std::get_if<DeploymentRecord>(&e.payload)) {
        workload_hints_[d->workload] = d->hints;
        for (const auto& vm : d->vms) hints_[vm].base = d->hints;
    } else if (const auto* h = std::get_if<RuntimeHint>(&e.payload)) {
        auto it = hints_.find(h->vm_id);
        if (it == hints_.end()) it = hints_.emplace(h->vm_id, make_effective(conservative_default())).first;
        it->second.apply(*h);
    }
}

const TopologyRecord* HintStore::topology(const VmId& vm) const {
    auto it = vms_.find(vm);
    return it == vms_.end() ? nullptr : &it->second;
}

EffectiveHints HintStore::effective(const VmId& vm) const {
    auto it = hints_.find(vm);
    if (it == hints_.end()) throw UnknownScopeKey("unknown vm '" + vm + "'");
    return it->second;
}

std::vector<VmId> HintStore::vms_in(Scope scope, const std::string& key) const {
    std::vector<VmId> out;
    for (const auto& [id, t] : vms_) {
        bool in = false;
        switch (scope) {
            case Scope::Vm: in = id == key; break;
            case Scope::Server: in = t.server == key; break;
            case Scope::Rack: in = t.rack == key; break;
            case Scope::Workload: in = t.workload == key; break;
            case Scope::Region: in = t.region == key; break;
        }
        if (in) out.push_back(id);
    }
    return out;
}

HintAggregate HintStore::single(const VmId& vm) const {
    HintAggregate a;
    const auto& t = vms_.at(vm);
    const auto& e = hints_.at(vm);
    const auto h = e.current();
    a.vm_count = 1;
    a.total_cores = t.cores;
    a.priority_counts[static_cast<std::size_t>(e.priority)] = 1;
    if (h.preemptibility_pct > 0) a.preemptible_cores = t.cores;
    a.min_availability_nines = h.availability_nines;
    a.region_independent_vms = h.region_independent ? 1 : 0;
    a.delay_tolerant_vms = is_delay_tolerant(h) ? 1 : 0;
    return a;
}

HintAggregate HintStore::aggregate(Scope scope, const std::string& key) const {
    const auto members = vms_in(scope, key);
    if (members.empty()) {
        throw UnknownScopeKey("no " + std::string(to_string(scope)) + " '" + key + "' in the hint store");
    }
    HintAggregate a;
    for (const auto& vm : members) a += single(vm);
    return a;
}

HintView HintStore::get(Scope scope, const std::string& key) const {
    if (scope == Scope::Vm) {
        if (!vms_.count(key)) throw UnknownScopeKey("unknown vm '" + key + "'");
        return effective(key);
    }
    return aggregate(scope, key);
}

Bytes HintStore::snapshot() const {
    ByteWriter w;
    auto put_hints = [&](const HintSet& h) {
        w.u8(h.scale_up_down);
        w.u8(h.scale_out_in);
        w.i64(h.deploy_time_ms);
        w.u32(static_cast<std::uint32_t>(h.availability_nines));
        w.u32(static_cast<std::uint32_t>(h.preemptibility_pct));
        w.i64(h.delay_tolerance_ms);
        w.u8(h.region_independent);
    };
    w.u32(static_cast<std::uint32_t>(vms_.size()));
    for (const auto& [id, t] : vms_) {
        w.str(id);
        w.str(t.workload);
        w.str(t.server);
        w.str(t.rack);
        w.str(t.region);
        w.i64(t.cores);
    }
    w.u32(static_cast<std::uint32_t>(hints_.size()));
    for (const auto& [id, e] : hints_) {
        w.str(id);
        put_hints(e.base);
        w.u32(static_cast<std::uint32_t>(e.overrides.size()));
        for (const auto& [k, v] : e.overrides) {
            w.u8(static_cast<std::uint8_t>(k));
            w.i64(v.value);
            w.i64(v.timestamp_ms);
        }
        w.u8(static_cast<std::uint8_t>(e.priority));
        w.u8(static_cast<std::uint8_t>(e.scale_preference));
    }
    w.u32(static_cast<std::uint32_t>(workload_hints_.size()));
    for (const auto& [id, h] : workload_hints_) {
        w.str(id);
        put_hints(h);
    }
    return w.take();
}

ReplayResult replay(std::string_view log) {
    ReplayResult r;
    auto framed = read_records(log);
    std::size_t offset = 0;
    for (auto payload : framed.payloads) {
        EventEnvelope e;
        try {
            e = decode_envelope(payload);
        } catch (const MalformedPayload& ex) {
            r.error = CorruptRecord{offset, ex.what()};
            return r;
        }
        r.store.apply(e);
        r.last_sequence[e.topic] = e.sequence;
        ++r.records;
        offset += EventLog::kHeaderSize + payload.size();
    }
    r.error = framed.error;
    return r;
}

// ---------------------------------------------------------------------------

namespace detail {
struct SubscriptionState {
    TopicFilter filter;
    mutable std::mutex mu;
    std::deque<EventEnvelope> queue;
    bool open = true;
};
}  // namespace detail

std::optional<EventEnvelope> Subscription::poll() {
    if (!state_) return std::nullopt;
    std::lock_guard lock(state_->mu);
    if (state_->queue.empty()) return std::nullopt;
    auto e = std::move(state_->queue.front());
    state_->queue.pop_front();
    return e;
}

std::vector<EventEnvelope> Subscription::drain() {
    std::vector<EventEnvelope> out;
    if (!state_) return out;
    std::lock_guard lock(state_->mu);
    out.assign(std::make_move_iterator(state_->queue.begin()), std::make_move_iterator(state_->queue.end()));
    state_->queue.clear();
    return out;
}

std::size_t Subscription::pending() const {
    if (!state_) return 0;
    std::lock_guard lock(state_->mu);
    return state_->queue.size();
}

void Subscription::close() {
    if (!state_) return;
    std::lock_guard lock(state_->mu);
    state_->open = false;
    state_->queue.clear();
}

bool Subscription::is_open() const {
    if (!state_) return false;
    std::lock_guard lock(state_->mu);
    return state_->open;
}

const std::string& Subscription::filter() const {
    static const std::string empty;
    return state_ ? state_->filter.str() : empty;
}

Broker::Broker(BrokerConfig config) : config_(std::move(config)) {}

std::unique_ptr<Broker> Broker::recover(std::string_view log, BrokerConfig config) {
    auto b = std::make_unique<Broker>(std::move(config));
    auto framed = read_records(log);
    for (auto payload : framed.payloads) {
        auto e = decode_envelope(payload);
        b->store_.apply(e);
        b->sequences_[e.topic] = e.sequence;
        b->log_.append(payload);
    }
    return b;
}

PublishResult Broker::publish(const std::string& publisher_id, std::string_view topic, Payload payload,
                              TimeMs timestamp_ms) {
    auto t = parse_topic(topic);
    if (!payload_fits(t.ns, payload)) {
        throw MalformedPayload("payload type does not belong on topic '" + std::string(topic) + "'");
    }
    if (const auto* h = std::get_if<RuntimeHint>(&payload)) {
        try {
            validate_runtime_hint(*h);
        } catch (const ValidationError& e) {
            throw MalformedPayload(e.what());
        }
    }
    std::lock_guard lock(mu_);
    return publish_locked(publisher_id, t, std::move(payload), timestamp_ms, true);
}

PublishResult Broker::publish_locked(const std::string& publisher_id, const Topic& topic, Payload payload,
                                     TimeMs timestamp_ms, bool limited) {
    if (limited) {
        auto key = std::make_pair(publisher_id, topic.ns);
        auto it = buckets_.find(key);
        if (it == buckets_.end()) {
            const auto rate = config_.rate_limit.rate_for(publisher_id);
            const auto burst = config_.rate_limit.burst > 0 ? config_.rate_limit.burst : rate;
            it = buckets_.emplace(key, TokenBucket(rate, burst)).first;
        }
        if (!it->second.try_take(timestamp_ms)) {
            ++rate_limited_[publisher_id];
            return {PublishStatus::RateLimited, 0};
        }
    }
    EventEnvelope e;
    e.topic = topic.str();
    e.sequence = ++sequences_[e.topic];
    e.publisher_id = publisher_id;
    e.timestamp_ms = timestamp_ms;
    e.payload = std::move(payload);
    log_.append(encode_envelope(e));
    store_.apply(e);
    const auto seq = e.sequence;
    if (config_.delivery == DeliveryMode::Immediate) {
        deliver_locked(e, topic);
    } else {
        deferred_.emplace_back(std::move(e), topic);
    }
    return {PublishStatus::Accepted, seq};
}

void Broker::deliver_locked(const EventEnvelope& e, const Topic& topic) {
    subs_.erase(std::remove_if(subs_.begin(), subs_.end(),
                               [](const auto& s) {
                                   std::lock_guard l(s->mu);
                                   return !s->open;
                               }),
                subs_.end());
    for (const auto& s : subs_) {
        if (!s->filter.matches(topic)) continue;
        std::lock_guard l(s->mu);
        if (s->open) s->queue.push_back(e);
    }
}

std::size_t Broker::step() {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    while (!deferred_.empty()) {
        auto [e, topic] = std::move(deferred_.front());
        deferred_.pop_front();
        deliver_locked(e, topic);
        ++n;
    }
    return n;
}

Subscription Broker::subscribe(std::string_view filter) {
    auto state = std::make_shared<detail::SubscriptionState>();
    state->filter = TopicFilter::parse(filter);
    std::lock_guard lock(mu_);
    subs_.push_back(state);
    return Subscription(state);
}

void Broker::register_vm(TopologyRecord vm, TimeMs timestamp_ms) {
    if (vm.vm.empty() || vm.workload.empty() || vm.server.empty()) {
        throw Error("vm registration needs vm, workload and server ids");
    }
    vm.removed = false;
    auto topic = parse_topic(deployment_topic(vm.region, vm.workload) + "/" + vm.vm);
    std::lock_guard lock(mu_);
    publish_locked(kPlatformPublisher, topic, std::move(vm), timestamp_ms, false);
}

void Broker::unregister_vm(const VmId& vm, TimeMs timestamp_ms) {
    std::lock_guard lock(mu_);
    const auto* t = store_.topology(vm);
    if (!t) throw UnknownVm("unknown vm '" + vm + "'");
    auto rec = *t;
    rec.removed = true;
    auto topic = parse_topic(deployment_topic(rec.region, rec.workload) + "/" + vm);
    publish_locked(kPlatformPublisher, topic, std::move(rec), timestamp_ms, false);
}

std::uint64_t Broker::set_deployment_hints(const WorkloadId& workload, const std::vector<VmId>& vms,
                                           const HintSet& hints, TimeMs timestamp_ms) {
    std::lock_guard lock(mu_);
    if (vms.empty()) throw Error("set_deployment_hints needs at least one vm");
    for (const auto& vm : vms) {
        if (!store_.knows_vm(vm)) throw UnknownVm("unknown vm '" + vm + "'");
    }
    const auto region = store_.topology(vms.front())->region;
    auto topic = parse_topic(deployment_topic(region, workload));
    return publish_locked(workload, topic, DeploymentRecord{workload, vms, hints}, timestamp_ms, false).sequence;
}

HintView Broker::get(Scope scope, const std::string& key) const {
    std::lock_guard lock(mu_);
    return store_.get(scope, key);
}

EffectiveHints Broker::effective(const VmId& vm) const {
    std::lock_guard lock(mu_);
    return store_.effective(vm);
}

std::optional<TopologyRecord> Broker::topology(const VmId& vm) const {
    std::lock_guard lock(mu_);
    const auto* t = store_.topology(vm);
    return t ? std::optional<TopologyRecord>(*t) : std::nullopt;
}

HintStore Broker::store() const {
    std::lock_guard lock(mu_);
    return store_;
}

Bytes Broker::log_bytes() const {
    std::lock_guard lock(mu_);
    return log_.bytes();
}

std::uint64_t Broker::rate_limited(const std::string& publisher_id) const {
    std::lock_guard lock(mu_);
    auto it = rate_limited_.find(publisher_id);
    return it == rate_limited_.end() ? 0 : it->second;
}

std::uint64_t Broker::last_sequence(const std::string& topic) const {
    std::lock_guard lock(mu_);
    auto it = sequences_.find(topic);
    return it == sequences_.end() ? 0 : it->second;
}

}  // namespace wi
