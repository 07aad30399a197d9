#include "wi/codec.hpp"

namespace wi {

namespace {

enum Tag : std::uint8_t {
    kRuntimeHint = 1,
    kDeployment = 2,
    kNotification = 3,
    kOptimizationEvent = 4,
    kTopology = 5,
};

void put_hints(ByteWriter& w, const HintSet& h) {
    w.u8(h.scale_up_down);
    w.u8(h.scale_out_in);
    w.i64(h.deploy_time_ms);
    w.u8(static_cast<std::uint8_t>(h.availability_nines));
    w.u8(static_cast<std::uint8_t>(h.preemptibility_pct));
    w.i64(h.delay_tolerance_ms);
    w.u8(h.region_independent);
}

HintSet get_hints(ByteReader& r) {
    HintSet h;
    h.scale_up_down = r.u8() != 0;
    h.scale_out_in = r.u8() != 0;
    h.deploy_time_ms = r.i64();
    h.availability_nines = r.u8();
    h.preemptibility_pct = r.u8();
    h.delay_tolerance_ms = r.i64();
    h.region_independent = r.u8() != 0;
    return h;
}

void put(ByteWriter& w, const RuntimeHint& h) {
    w.u8(kRuntimeHint);
    w.str(h.vm_id);
    w.u8(static_cast<std::uint8_t>(h.kind));
    w.i64(h.value);
    w.i64(h.timestamp_ms);
    w.u8(static_cast<std::uint8_t>(h.source));
}

void put(ByteWriter& w, const DeploymentRecord& d) {
    w.u8(kDeployment);
    w.str(d.workload);
    w.u32(static_cast<std::uint32_t>(d.vms.size()));
    for (const auto& v : d.vms) w.str(v);
    put_hints(w, d.hints);
}

void put(ByteWriter& w, const PlatformNotification& n) {
    w.u8(kNotification);
    w.u64(n.id);
    w.str(n.vm_id);
    w.u8(static_cast<std::uint8_t>(n.kind));
    w.i64(n.issued_at_ms);
    w.i64(n.effective_at_ms);
    w.i64(n.payload);
    w.u8(n.emergency);
    w.str(n.detail);
}

void put(ByteWriter& w, const OptimizationEvent& e) {
    w.u8(kOptimizationEvent);
    w.str(e.optimization);
    w.str(e.action);
    w.str(e.scope);
    w.i64(e.amount);
}

void put(ByteWriter& w, const TopologyRecord& t) {
    w.u8(kTopology);
    w.str(t.vm);
    w.str(t.workload);
    w.str(t.server);
    w.str(t.rack);
    w.str(t.region);
    w.i64(t.cores);
    w.u8(t.removed);
}

template <typename E>
E checked_enum(std::uint8_t raw, int count, const char* what) {
    if (raw >= count) throw MalformedPayload(std::string("bad ") + what + " value " + std::to_string(raw));
    return static_cast<E>(raw);
}

Payload get_payload(ByteReader& r) {
    const auto tag = r.u8();
    switch (tag) {
        case kRuntimeHint: {
            RuntimeHint h;
            h.vm_id = r.str();
            h.kind = checked_enum<HintKind>(r.u8(), kHintKindCount, "hint kind");
            h.value = r.i64();
            h.timestamp_ms = r.i64();
            h.source = checked_enum<HintSource>(r.u8(), 2, "hint source");
            return h;
        }
        case kDeployment: {
            DeploymentRecord d;
            d.workload = r.str();
            const auto n = r.u32();
            for (std::uint32_t i = 0; i < n; ++i) d.vms.push_back(r.str());
            d.hints = get_hints(r);
            return d;
        }
        case kNotification: {
            PlatformNotification n;
            n.id = r.u64();
            n.vm_id = r.str();
            n.kind = checked_enum<NotificationKind>(r.u8(), 7, "notification kind");
            n.issued_at_ms = r.i64();
            n.effective_at_ms = r.i64();
            n.payload = r.i64();
            n.emergency = r.u8() != 0;
            n.detail = r.str();
            return n;
        }
        case kOptimizationEvent: {
            OptimizationEvent e;
            e.optimization = r.str();
            e.action = r.str();
            e.scope = r.str();
            e.amount = r.i64();
            return e;
        }
        case kTopology: {
            TopologyRecord t;
            t.vm = r.str();
            t.workload = r.str();
            t.server = r.str();
            t.rack = r.str();
            t.region = r.str();
            t.cores = r.i64();
            t.removed = r.u8() != 0;
            return t;
        }
        default:
            throw MalformedPayload("unknown payload tag " + std::to_string(tag));
    }
}

}  // namespace

Bytes encode_payload(const Payload& p) {
    ByteWriter w;
    std::visit([&](const auto& v) { put(w, v); }, p);
    return w.take();
}

Payload decode_payload(std::string_view bytes) {
    try {
        ByteReader r(bytes);
        auto p = get_payload(r);
        if (!r.done()) throw MalformedPayload("trailing bytes after payload");
        return p;
    } catch (const MalformedPayload&) {
        throw;
    } catch (const Error& e) {
        throw MalformedPayload(e.what());
    }
}

Bytes encode_envelope(const EventEnvelope& e) {
    ByteWriter w;
    w.str(e.topic);
    w.u64(e.sequence);
    w.str(e.publisher_id);
    w.i64(e.timestamp_ms);
    w.str(encode_payload(e.payload));
    return w.take();
}

EventEnvelope decode_envelope(std::string_view bytes) {
    try {
        ByteReader r(bytes);
        EventEnvelope e;
        e.topic = r.str();
        e.sequence = r.u64();
        e.publisher_id = r.str();
        e.timestamp_ms = r.i64();
        e.payload = decode_payload(r.str());
        if (!r.done()) throw MalformedPayload("trailing bytes after envelope");
        return e;
    } catch (const MalformedPayload&) {
        throw;
    } catch (const Error& e) {
        throw MalformedPayload(e.what());
    }
}

}  // namespace wi
