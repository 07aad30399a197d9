#include "wi/hints.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace wi {

HintSet conservative_default() { return HintSet{}; }

namespace {

constexpr std::array<std::string_view, kHintKindCount> kHintKindNames = {
    "scale_up_down",      "scale_out_in",       "deploy_time_ms",
    "availability_nines", "preemptibility_pct", "delay_tolerance_ms",
    "region_independent", "preemption_priority", "scale_preference",
};

constexpr std::array<std::string_view, 7> kNotificationNames = {
    "Eviction", "Preemption", "ScaleUp", "ScaleDown", "FrequencyChange", "Maintenance", "HintIgnored",
};

std::optional<std::int64_t> parse_int(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::optional<bool> parse_bool(std::string_view s) {
    if (s == "true") return true;
    if (s == "false") return false;
    return std::nullopt;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string range_reason(std::int64_t lo, std::int64_t hi) {
    std::ostringstream os;
    os << "must be an integer in [" << lo << "," << hi << "]";
    return os.str();
}

struct IntRange {
    std::int64_t lo;
    std::int64_t hi;
};

// Legal payload range per runtime hint kind.
IntRange payload_range(HintKind kind) {
    constexpr std::int64_t kMaxMs = std::int64_t{1} << 50;
    switch (kind) {
        case HintKind::ScaleUpDown:
        case HintKind::ScaleOutIn:
        case HintKind::RegionIndependent: return {0, 1};
        case HintKind::DeployTime:
        case HintKind::DelayTolerance: return {0, kMaxMs};
        case HintKind::Availability: return {0, 5};
        case HintKind::Preemptibility: return {0, 100};
        case HintKind::PreemptionPriority:
        case HintKind::ScalePreference: return {0, 2};
    }
    return {0, 0};
}

}  // namespace

std::string_view to_string(HintKind kind) { return kHintKindNames[static_cast<std::size_t>(kind)]; }

std::optional<HintKind> parse_hint_kind(std::string_view name) {
    for (std::size_t i = 0; i < kHintKindNames.size(); ++i) {
        if (kHintKindNames[i] == name) return static_cast<HintKind>(i);
    }
    return std::nullopt;
}

std::string_view to_string(HintSource s) {
    return s == HintSource::InVm ? "InVm" : "WorkloadController";
}

RuntimeHint RuntimeHint::priority(VmId vm, PreemptionPriority p, TimeMs t, HintSource src) {
    return RuntimeHint{std::move(vm), HintKind::PreemptionPriority, static_cast<std::int64_t>(p), t, src};
}

RuntimeHint RuntimeHint::scale_preference(VmId vm, ScalePreference p, TimeMs t, HintSource src) {
    return RuntimeHint{std::move(vm), HintKind::ScalePreference, static_cast<std::int64_t>(p), t, src};
}

void validate_runtime_hint(const RuntimeHint& hint) {
    std::vector<FieldError> errors;
    if (hint.vm_id.empty()) errors.push_back({"vm_id", "must not be empty"});
    auto r = payload_range(hint.kind);
    if (hint.value < r.lo || hint.value > r.hi) {
        errors.push_back({std::string(to_string(hint.kind)), range_reason(r.lo, r.hi)});
    }
    if (hint.timestamp_ms < 0) errors.push_back({"timestamp_ms", "must be >= 0"});
    if (!errors.empty()) throw ValidationError(std::move(errors));
}

std::string_view to_string(NotificationKind kind) {
    return kNotificationNames[static_cast<std::size_t>(kind)];
}

std::optional<NotificationKind> parse_notification_kind(std::string_view name) {
    for (std::size_t i = 0; i < kNotificationNames.size(); ++i) {
        if (kNotificationNames[i] == name) return static_cast<NotificationKind>(i);
    }
    return std::nullopt;
}

bool is_eviction_kind(NotificationKind kind) {
    return kind == NotificationKind::Eviction || kind == NotificationKind::Preemption;
}

bool honors_notice(const PlatformNotification& n, TimeMs notice_ms) {
    if (n.effective_at_ms < n.issued_at_ms) return false;
    if (!is_eviction_kind(n.kind)) return true;
    return n.effective_at_ms - n.issued_at_ms >= notice_ms;
}

// ---------------------------------------------------------------------------

HintSet EffectiveHints::current() const {
    HintSet h = base;
    for (const auto& [kind, ov] : overrides) {
        switch (kind) {
            case HintKind::ScaleUpDown: h.scale_up_down = ov.value != 0; break;
            case HintKind::ScaleOutIn: h.scale_out_in = ov.value != 0; break;
            case HintKind::DeployTime: h.deploy_time_ms = ov.value; break;
            case HintKind::Availability: h.availability_nines = static_cast<int>(ov.value); break;
            case HintKind::Preemptibility: h.preemptibility_pct = static_cast<int>(ov.value); break;
            case HintKind::DelayTolerance: h.delay_tolerance_ms = ov.value; break;
            case HintKind::RegionIndependent: h.region_independent = ov.value != 0; break;
            case HintKind::PreemptionPriority:
            case HintKind::ScalePreference: break;
        }
    }
    return h;
}

void EffectiveHints::apply(const RuntimeHint& hint) {
    auto it = overrides.find(hint.kind);
    if (it != overrides.end() && it->second.timestamp_ms > hint.timestamp_ms) return;
    overrides[hint.kind] = OverrideValue{hint.value, hint.timestamp_ms};
    if (hint.kind == HintKind::PreemptionPriority) {
        priority = static_cast<PreemptionPriority>(hint.value);
    } else if (hint.kind == HintKind::ScalePreference) {
        scale_preference = static_cast<ScalePreference>(hint.value);
    }
}

EffectiveHints make_effective(const HintSet& base) {
    EffectiveHints e;
    e.base = base;
    return e;
}

EffectiveHints merge(const HintSet& base, std::span<const RuntimeHint> runtime) {
    std::vector<const RuntimeHint*> ordered;
    ordered.reserve(runtime.size());
    for (const auto& h : runtime) ordered.push_back(&h);
    std::stable_sort(ordered.begin(), ordered.end(), [](const RuntimeHint* a, const RuntimeHint* b) {
        return a->timestamp_ms < b->timestamp_ms;
    });
    EffectiveHints e = make_effective(base);
    for (const auto* h : ordered) e.apply(*h);
    return e;
}

double UtilStats::max_component() const {
    return std::max({max_cpu_pct, max_memory_pct, max_disk_pct});
}

void validate_util(const UtilStats& u) {
    std::vector<FieldError> errors;
    auto check = [&](const char* name, double v) {
        if (!(v >= 0.0 && v <= 100.0)) errors.push_back({name, "must be a percentage in [0,100]"});
    };
    check("p95_cpu_pct", u.p95_cpu_pct);
    check("p95_max_cpu_pct", u.p95_max_cpu_pct);
    check("max_cpu_pct", u.max_cpu_pct);
    check("max_memory_pct", u.max_memory_pct);
    check("max_disk_pct", u.max_disk_pct);
    if (!errors.empty()) throw ValidationError(std::move(errors));
}

CheckResult consistency_check(std::span<const RuntimeHint> history, const RuntimeHint& candidate,
                              const FlapPolicy& policy) {
    if (history.empty()) return {};
    if (history.back().value == candidate.value) return {};

    int flips = 0;
    for (std::size_t i = 1; i < history.size(); ++i) {
        if (history[i].value == history[i - 1].value) continue;
        if (candidate.timestamp_ms - history[i].timestamp_ms < policy.window_ms) ++flips;
    }
    if (flips < policy.max_flips) return {};

    std::ostringstream os;
    os << "inconsistent " << to_string(candidate.kind) << ": " << flips
       << " value changes within " << policy.window_ms << " ms";
    return CheckResult{false, os.str()};
}

// ---------------------------------------------------------------------------

bool is_delay_tolerant(const HintSet& h, const EligibilityThresholds& t) {
    return h.delay_tolerance_ms >= t.delay_tolerant_min_ms;
}

bool has_relaxed_availability(const HintSet& h, const EligibilityThresholds& t) {
    return h.availability_nines <= t.relaxed_availability_max_nines;
}

bool has_strict_deploy_time(const HintSet& h, const EligibilityThresholds& t) {
    return h.deploy_time_ms < t.not_strict_deploy_ms;
}

OptimizationSet eligibility(const HintSet& h, const UtilStats& util, const EligibilityThresholds& t) {
    OptimizationSet out;
    const bool delay_tolerant = is_delay_tolerant(h, t);
    const bool relaxed = has_relaxed_availability(h, t);
    const bool spot = h.preemptibility_pct >= t.spot_min_preemptibility_pct;

    if (h.scale_out_in && delay_tolerant) out.insert(OptimizationId::AutoScaling);
    if (spot) out.insert(OptimizationId::SpotVMs);
    if (spot && h.scale_up_down && delay_tolerant) out.insert(OptimizationId::HarvestVMs);
    if (delay_tolerant && util.p95_max_cpu_pct > t.overclock_min_p95_max_cpu_pct) {
        out.insert(OptimizationId::Overclocking);
    }
    if (relaxed && delay_tolerant) out.insert(OptimizationId::Underclocking);
    if (!has_strict_deploy_time(h, t)) out.insert(OptimizationId::NonPreProvision);
    if (h.region_independent) out.insert(OptimizationId::RegionAgnostic);
    if (delay_tolerant && util.p95_cpu_pct < t.oversub_max_p95_cpu_pct) {
        out.insert(OptimizationId::Oversubscription);
    }
    const double peak = util.max_component();
    if (relaxed && (peak < t.rightsize_down_below_pct || peak >= t.rightsize_up_at_pct)) {
        out.insert(OptimizationId::Rightsizing);
    }
    if (relaxed) out.insert(OptimizationId::MADC);
    return out;
}

OptimizationSet eligibility(const EffectiveHints& hints, const UtilStats& util,
                            const EligibilityThresholds& t) {
    return eligibility(hints.current(), util, t);
}

// ---------------------------------------------------------------------------

namespace {
std::string join_errors(const std::vector<FieldError>& errors) {
    std::string msg = "validation failed:";
    for (const auto& e : errors) msg += " " + e.field + " (" + e.reason + ");";
    return msg;
}
}  // namespace

ValidationError::ValidationError(std::vector<FieldError> errors)
    : Error(join_errors(errors)), errors_(std::move(errors)) {}

HintSet validate(const FieldMap& raw) {
    HintSet h = conservative_default();
    std::vector<FieldError> errors;

    auto get_bool = [&](const std::string& field, bool& out) {
        auto it = raw.find(field);
        if (it == raw.end()) return;
        if (auto v = parse_bool(trim(it->second))) {
            out = *v;
        } else {
            errors.push_back({field, "must be true or false"});
        }
    };
    auto get_int = [&](const std::string& field, std::int64_t lo, std::int64_t hi, auto& out) {
        auto it = raw.find(field);
        if (it == raw.end()) return;
        auto v = parse_int(it->second);
        if (!v || *v < lo || *v > hi) {
            errors.push_back({field, range_reason(lo, hi)});
            return;
        }
        out = static_cast<std::remove_reference_t<decltype(out)>>(*v);
    };

    constexpr std::int64_t kMaxMs = std::int64_t{1} << 50;
    get_bool("scale_up_down", h.scale_up_down);
    get_bool("scale_out_in", h.scale_out_in);
    get_int("deploy_time_ms", 0, kMaxMs, h.deploy_time_ms);
    get_int("availability_nines", 0, 5, h.availability_nines);
    get_int("preemptibility_pct", 0, 100, h.preemptibility_pct);
    get_int("delay_tolerance_ms", 0, kMaxMs, h.delay_tolerance_ms);
    get_bool("region_independent", h.region_independent);

    for (const auto& [key, _] : raw) {
        if (std::find(kHintFieldNames.begin(), kHintFieldNames.end(), key) == kHintFieldNames.end()) {
            errors.push_back({key, "unknown hint field"});
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return h;
}

FieldMap to_field_map(const HintSet& h) {
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    return FieldMap{
        {"scale_up_down", b(h.scale_up_down)},
        {"scale_out_in", b(h.scale_out_in)},
        {"deploy_time_ms", std::to_string(h.deploy_time_ms)},
        {"availability_nines", std::to_string(h.availability_nines)},
        {"preemptibility_pct", std::to_string(h.preemptibility_pct)},
        {"delay_tolerance_ms", std::to_string(h.delay_tolerance_ms)},
        {"region_independent", b(h.region_independent)},
    };
}

std::string to_kv_text(const HintSet& h) {
    auto fields = to_field_map(h);
    std::string out;
    for (auto name : kHintFieldNames) {
        out += std::string(name) + " = " + fields.at(std::string(name)) + "\n";
    }
    return out;
}

FieldMap parse_kv_text(std::string_view text) {
    FieldMap out;
    std::vector<FieldError> errors;
    int line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            errors.push_back({"line " + std::to_string(line_no), "expected `field = value`"});
            continue;
        }
        auto key = std::string(trim(line.substr(0, eq)));
        if (out.count(key)) {
            errors.push_back({key, "duplicate field"});
            continue;
        }
        out[key] = std::string(trim(line.substr(eq + 1)));
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return out;
}

}  // namespace wi
