#pragma once

// Hint vocabulary: the seven workload characteristics, runtime updates in
// both directions, and the rules that map hints to optimization eligibility.

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wi/types.hpp"

namespace wi {

/// The seven workload characteristics. Every field defaults to its most
/// conservative value, so a default-constructed HintSet unlocks nothing.
struct HintSet {
    bool scale_up_down = false;
    bool scale_out_in = false;
    std::int64_t deploy_time_ms = 0;    // 0 = strict
    int availability_nines = 5;         // 0..5
    int preemptibility_pct = 0;         // 0..100
    std::int64_t delay_tolerance_ms = 0; // 0 = delay sensitive
    bool region_independent = false;

    auto operator<=>(const HintSet&) const = default;
};

HintSet conservative_default();

/// Kinds a runtime hint may carry: one of the seven characteristics or one
/// of the two per-VM priority overrides.
enum class HintKind : std::uint8_t {
    ScaleUpDown = 0,
    ScaleOutIn,
    DeployTime,
    Availability,
    Preemptibility,
    DelayTolerance,
    RegionIndependent,
    PreemptionPriority,
    ScalePreference,
};

inline constexpr int kHintKindCount = 9;

std::string_view to_string(HintKind kind);
std::optional<HintKind> parse_hint_kind(std::string_view name);

enum class HintSource : std::uint8_t { InVm = 0, WorkloadController = 1 };

std::string_view to_string(HintSource s);

/// A per-VM hint update. The payload is interpreted by kind: booleans are
/// 0/1, durations are milliseconds, priorities are the enum's numeric value.
struct RuntimeHint {
    VmId vm_id;
    HintKind kind = HintKind::PreemptionPriority;
    std::int64_t value = 0;
    TimeMs timestamp_ms = 0;
    HintSource source = HintSource::InVm;

    bool operator==(const RuntimeHint&) const = default;

    static RuntimeHint priority(VmId vm, PreemptionPriority p, TimeMs t,
                                HintSource src = HintSource::InVm);
    static RuntimeHint scale_preference(VmId vm, ScalePreference p, TimeMs t,
                                        HintSource src = HintSource::InVm);
};

/// Throws ValidationError when the payload is outside the legal range for
/// its kind.
void validate_runtime_hint(const RuntimeHint& hint);

enum class NotificationKind : std::uint8_t {
    Eviction = 0,
    Preemption,
    ScaleUp,
    ScaleDown,
    FrequencyChange,
    Maintenance,
    HintIgnored,
};

std::string_view to_string(NotificationKind kind);
std::optional<NotificationKind> parse_notification_kind(std::string_view name);

inline constexpr TimeMs kDefaultEvictionNoticeMs = 30'000;

/// Platform-to-workload message, surfaced to the VM as a scheduled event.
struct PlatformNotification {
    std::uint64_t id = 0;
    VmId vm_id;
    NotificationKind kind = NotificationKind::Maintenance;
    TimeMs issued_at_ms = 0;
    TimeMs effective_at_ms = 0;
    std::int64_t payload = 0;  // new core count, frequency level, ...
    bool emergency = false;    // notice window could not be honored
    std::string detail;

    bool operator==(const PlatformNotification&) const = default;
};

bool is_eviction_kind(NotificationKind kind);

/// True when the notification honors the notice window (or is not an
/// eviction-type notification at all).
bool honors_notice(const PlatformNotification& n, TimeMs notice_ms);

struct OverrideValue {
    std::int64_t value = 0;
    TimeMs timestamp_ms = 0;
    bool operator==(const OverrideValue&) const = default;
};

/// Deployment hints plus the latest accepted runtime override per kind.
struct EffectiveHints {
    HintSet base;
    std::map<HintKind, OverrideValue> overrides;
    PreemptionPriority priority = PreemptionPriority::Normal;
    ScalePreference scale_preference = ScalePreference::Neutral;

    /// Base with every characteristic override applied.
    HintSet current() const;

    /// Last-writer-wins by timestamp; equal timestamps apply in call order.
    void apply(const RuntimeHint& hint);

    bool operator==(const EffectiveHints&) const = default;
};

EffectiveHints make_effective(const HintSet& base);

/// Folds `runtime` (stable-ordered by timestamp) over `base`.
EffectiveHints merge(const HintSet& base, std::span<const RuntimeHint> runtime);

struct UtilStats {
    double p95_cpu_pct = 0.0;
    double p95_max_cpu_pct = 0.0;
    double max_cpu_pct = 0.0;
    double max_memory_pct = 0.0;
    double max_disk_pct = 0.0;

    double max_component() const;
    bool operator==(const UtilStats&) const = default;
};

/// Checks every percentage is within [0,100]; throws ValidationError.
void validate_util(const UtilStats& util);

struct FlapPolicy {
    int max_flips = 4;
    TimeMs window_ms = 60'000;
};

struct CheckResult {
    bool accepted = true;
    std::string reason;
};

/// Rejects a candidate that would be the (max_flips+1)-th value change for
/// its (vm, kind) inside the trailing window. `history` holds the previously
/// accepted hints for that (vm, kind), oldest first.
CheckResult consistency_check(std::span<const RuntimeHint> history,
                              const RuntimeHint& candidate,
                              const FlapPolicy& policy = {});

struct EligibilityThresholds {
    int spot_min_preemptibility_pct = 20;
    int relaxed_availability_max_nines = 3;
    std::int64_t not_strict_deploy_ms = 60'000;
    std::int64_t delay_tolerant_min_ms = 1;
    double overclock_min_p95_max_cpu_pct = 40.0;  // strictly greater than
    double oversub_max_p95_cpu_pct = 65.0;        // strictly less than
    double rightsize_down_below_pct = 50.0;
    double rightsize_up_at_pct = 90.0;
};

bool is_delay_tolerant(const HintSet& h, const EligibilityThresholds& t = {});
bool has_relaxed_availability(const HintSet& h, const EligibilityThresholds& t = {});
bool has_strict_deploy_time(const HintSet& h, const EligibilityThresholds& t = {});

OptimizationSet eligibility(const HintSet& hints, const UtilStats& util,
                            const EligibilityThresholds& t = {});
OptimizationSet eligibility(const EffectiveHints& hints, const UtilStats& util,
                            const EligibilityThresholds& t = {});

// ---------------------------------------------------------------------------
// Validation and the flat `field = value` text form.

struct FieldError {
    std::string field;
    std::string reason;
    bool operator==(const FieldError&) const = default;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<FieldError> errors);
    const std::vector<FieldError>& errors() const { return errors_; }

private:
    std::vector<FieldError> errors_;
};

using FieldMap = std::map<std::string, std::string>;

/// Missing fields take conservative defaults. Any bad field fails the whole
/// call with one FieldError per violation.
HintSet validate(const FieldMap& raw);

/// Canonical `field = value` lines in declaration order.
std::string to_kv_text(const HintSet& hints);
FieldMap parse_kv_text(std::string_view text);
FieldMap to_field_map(const HintSet& hints);

inline constexpr std::array<std::string_view, 7> kHintFieldNames = {
    "scale_up_down",      "scale_out_in",       "deploy_time_ms",     "availability_nines",
    "preemptibility_pct", "delay_tolerance_ms", "region_independent",
};

}  // namespace wi
