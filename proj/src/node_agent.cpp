#include "wi/node_agent.hpp"

#include <algorithm>

namespace wi {

void validate(const AgentConfig& c) {
    std::vector<FieldError> errors;
    if (c.poll_interval_ms <= 0) errors.push_back({"poll_interval_ms", "must be > 0"});
    if (c.eviction_notice_ms <= 0) errors.push_back({"eviction_notice_ms", "must be > 0"});
    if (!errors.empty()) throw ValidationError(std::move(errors));
}

NodeAgent::NodeAgent(ServerId server, RegionId region, Broker& broker, AgentConfig config, IdSource ids)
    : server_(std::move(server)), region_(std::move(region)), broker_(broker), config_(config),
      ids_(std::move(ids)) {
    validate(config_);
    if (!ids_) ids_ = [this] { return ++local_ids_; };
}

void NodeAgent::add_vm(const VmId& vm) {
    auto& b = mailboxes_[vm];
    b.vm_id = vm;
}

void NodeAgent::remove_vm(const VmId& vm) {
    mailboxes_.erase(vm);
    for (auto it = history_.begin(); it != history_.end();) {
        it = it->first.first == vm ? history_.erase(it) : std::next(it);
    }
}

std::vector<VmId> NodeAgent::vms() const {
    std::vector<VmId> out;
    for (const auto& [id, _] : mailboxes_) out.push_back(id);
    return out;
}

VmMailbox& NodeAgent::box(const VmId& vm) {
    auto it = mailboxes_.find(vm);
    if (it == mailboxes_.end()) throw UnknownVm("vm '" + vm + "' is not on server '" + server_ + "'");
    return it->second;
}

const VmMailbox& NodeAgent::box(const VmId& vm) const {
    auto it = mailboxes_.find(vm);
    if (it == mailboxes_.end()) throw UnknownVm("vm '" + vm + "' is not on server '" + server_ + "'");
    return it->second;
}

void NodeAgent::write_hint(const RuntimeHint& hint) { box(hint.vm_id).outgoing.push_back(hint); }

PreparedBatch NodeAgent::prepare(TimeMs now_ms) {
    PreparedBatch batch;
    batch.server = server_;
    batch.now_ms = now_ms;
    for (auto& [vm, b] : mailboxes_) {
        while (!b.outgoing.empty()) {
            auto hint = std::move(b.outgoing.front());
            b.outgoing.pop_front();
            auto& hist = history_[{vm, hint.kind}];
            auto check = consistency_check(hist, hint, config_.flap);
            if (!check.accepted) {
                batch.ignored.push_back({std::move(hint), std::move(check.reason)});
                continue;
            }
            hist.push_back(hint);
            // Keep one entry older than the window so the first in-window
            // change is still counted.
            const TimeMs horizon = hint.timestamp_ms - config_.flap.window_ms;
            auto first_in = std::find_if(hist.begin(), hist.end(),
                                         [&](const RuntimeHint& h) { return h.timestamp_ms >= horizon; });
            if (first_in != hist.begin()) hist.erase(hist.begin(), std::prev(first_in));
            batch.accepted.push_back(std::move(hint));
        }
    }
    return batch;
}

CollectResult NodeAgent::commit(const PreparedBatch& batch) {
    CollectResult out;
    for (const auto& h : batch.accepted) {
        auto r = broker_.publish(h.vm_id, runtime_topic(region_, server_, h.vm_id), h, batch.now_ms);
        if (r.accepted()) {
            out.published.emplace_back(h, r.sequence);
        } else {
            out.rate_limited.push_back(h);
        }
    }
    for (const auto& ig : batch.ignored) {
        PlatformNotification n;
        n.id = ids_();
        n.vm_id = ig.hint.vm_id;
        n.kind = NotificationKind::HintIgnored;
        n.issued_at_ms = batch.now_ms;
        n.effective_at_ms = batch.now_ms;
        n.payload = static_cast<std::int64_t>(ig.hint.kind);
        n.detail = ig.reason;
        if (hosts(n.vm_id)) box(n.vm_id).incoming.push_back({std::move(n), false});
        out.ignored.push_back(ig);
    }
    return out;
}

PlatformNotification NodeAgent::deliver(PlatformNotification n, TimeMs now_ms) {
    auto& b = box(n.vm_id);
    if (n.id == 0) n.id = ids_();
    n.issued_at_ms = now_ms;
    if (n.effective_at_ms < now_ms) n.effective_at_ms = now_ms;
    if (is_eviction_kind(n.kind) && !n.emergency && n.effective_at_ms - now_ms < config_.eviction_notice_ms) {
        n.effective_at_ms = now_ms + config_.eviction_notice_ms;
    }
    b.incoming.push_back({n, false});
    return n;
}

std::vector<PlatformNotification> NodeAgent::read_scheduled_events(const VmId& vm, TimeMs now_ms) const {
    std::vector<PlatformNotification> out;
    for (const auto& ev : box(vm).incoming) {
        if (!ev.acknowledged && ev.notification.issued_at_ms <= now_ms) out.push_back(ev.notification);
    }
    return out;
}

bool NodeAgent::acknowledge(const VmId& vm, std::uint64_t notification_id) {
    for (auto& ev : box(vm).incoming) {
        if (ev.notification.id == notification_id && !ev.acknowledged) {
            ev.acknowledged = true;
            return true;
        }
    }
    return false;
}

}  // namespace wi
