#pragma once

// Deterministic discrete-event cloud. Events are ordered by (time,
// insertion sequence); every tick runs workload models, node agents,
// and, at the optimizer interval, the optimization managers and the
// arbiter. A run records a CSV trace and a metrics report.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wi/broker.hpp"
#include "wi/scenario.hpp"

namespace wi {

struct TraceRow {
    TimeMs time_ms = 0;
    std::string entity;
    std::string event;
    std::string detail;  // space separated key=value pairs

    bool operator==(const TraceRow&) const = default;
};

class Trace {
public:
    void add(TimeMs t, std::string entity, std::string event, std::string detail = {});
    const std::vector<TraceRow>& rows() const { return rows_; }

    /// `time_ms,entity,event,detail` with a header line.
    std::string to_csv() const;
    static Trace from_csv(std::string_view csv);

    /// crc32 of the CSV text, in hex.
    std::string digest() const;

private:
    std::vector<TraceRow> rows_;
};

/// Value of `key` in a detail string, if present.
std::optional<std::string> detail_field(std::string_view detail, std::string_view key);

struct WorkloadMetrics {
    WorkloadId id;
    std::string model;
    std::string pricing;  // active optimization set
    std::map<std::string, double> vm_hours;  // by pricing class
    int preemption_notices = 0;
    int evictions_with_notice = 0;
    int emergency_evictions = 0;
    int critical_evictions = 0;
    double throttle_seconds = 0.0;
    double work = 0.0;
    std::optional<TimeMs> makespan_ms;
    double requests_generated = 0.0;
    double requests_completed = 0.0;
    double requests_dropped = 0.0;
    int tasks_requeued = 0;
    int hints_published = 0;
    int hints_ignored = 0;
    int hints_rate_limited = 0;
    int min_vms = 0;
    int max_vms = 0;
    double slowdown = 1.0;
    double cost = 0.0;
    double baseline_cost = 0.0;
};

struct MetricsReport {
    std::string scenario;
    std::uint64_t seed = 0;
    TimeMs duration_ms = 0;
    std::vector<WorkloadMetrics> workloads;
    std::map<RegionId, double> core_hours;
    std::map<std::string, std::int64_t> event_counts;
    int notice_violations = 0;
    double total_cost = 0.0;
    double baseline_cost = 0.0;

    const WorkloadMetrics& workload(const WorkloadId& id) const;
};

nlohmann::json to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

struct RunOptions {
    /// Also run the scenario with every optimization disabled and fill in
    /// baseline cost and slowdown.
    bool with_baseline = true;
};

struct RunResult {
    MetricsReport metrics;
    Trace trace;
    Bytes broker_log;
    HintStore live_store;
};

/// Throws ScenarioValidationError for an invalid scenario.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

/// Non-emergency Preemption/Eviction rows in the trace applied with less
/// than `notice_ms` between issue and effect.
int notice_violations(const Trace& trace, TimeMs notice_ms);

/// One-paragraph human summary of a run.
std::string summary_text(const MetricsReport& m);

}  // namespace wi
