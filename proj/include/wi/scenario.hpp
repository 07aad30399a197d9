#pragma once

// Simulation configuration and its JSON document form.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wi/broker.hpp"
#include "wi/hints.hpp"
#include "wi/node_agent.hpp"
#include "wi/optimizers.hpp"

namespace wi {

enum class WorkloadModelKind : std::uint8_t { BatchAnalytics, Microservices, VideoConference };

std::string_view to_string(WorkloadModelKind k);

struct BatchStage {
    int tasks = 8;
    TimeMs task_ms = 600'000;  // every task of a stage runs equally long
};

/// A job is one application master plus a chain of stages; a stage starts
/// when the previous one has finished.
struct BatchJobSpec {
    TimeMs arrival_ms = 0;
    std::vector<BatchStage> stages;
};

struct BatchParams {
    std::vector<BatchJobSpec> jobs;
    double task_ms_jitter = 0.0;  // per-stage uniform factor in [1-j, 1+j]
    TimeMs critical_age_ms = 30'000;
    TimeMs checkpoint_interval_ms = 60'000;
    TimeMs am_restart_ms = 20'000;
    TimeMs container_start_ms = 5'000;
};

struct MicroParams {
    double peak_rps = 4'000.0;
    double trough_rps = 1'000.0;
    double rps_per_pod = 100.0;
    int pods_per_node = 10;
    TimeMs period_ms = opt::kDayMs;
};

struct ConfParams {
    double peak_calls = 800.0;
    double trough_calls = 100.0;
    double calls_per_vm = 100.0;
    double spike_amplitude = 0.3;  // fraction of the surrounding plateau
    TimeMs spike_duration_ms = 300'000;
    double high_load_pct = 70.0;
    TimeMs period_ms = opt::kDayMs;
};

struct AutoscaleSpec {
    bool enabled = false;
    opt::AutoscalePolicy policy = opt::ThresholdPolicy{};
};

struct WorkloadSpec {
    WorkloadId id;
    WorkloadModelKind model = WorkloadModelKind::BatchAnalytics;
    RegionId region;
    int vm_count = 1;
    std::int64_t cores_per_vm = 1;
    HintSet hints;
    bool runtime_hints = true;
    UtilStats util;  // nominal utilization used for eligibility at deployment
    AutoscaleSpec autoscale;
    BatchParams batch;
    MicroParams micro;
    ConfParams conf;
};

struct ServerSpec {
    ServerId id;
    RegionId region;
    std::string rack;
    std::int64_t cores = 0;
    std::int64_t power_budget_slots = 0;
    bool operator==(const ServerSpec&) const = default;
};

enum class ScriptedEventKind : std::uint8_t { CapacityCrunch, PowerEvent };

struct ScriptedEvent {
    ScriptedEventKind kind = ScriptedEventKind::CapacityCrunch;
    TimeMs at_ms = 0;
    RegionId region;                 // capacity crunch
    std::int64_t cores = 0;          // capacity crunch demand
    double severity = 0.0;           // power event
    TimeMs lead_ms = 0;              // power event: effective_at - at
    TimeMs duration_ms = 600'000;    // how long the effect lasts
    std::vector<ServerId> servers;   // power event; empty = all
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    TimeMs duration_ms = 3'600'000;
    TimeMs tick_ms = 1'000;
    TimeMs optimizer_interval_ms = 60'000;
    TimeMs boot_time_ms = 45'000;
    double region_price_weight = 0.5;
    std::vector<opt::RegionEntry> regions;
    std::vector<ServerSpec> servers;
    std::vector<WorkloadSpec> workloads;
    OptimizationSet optimizations;
    AgentConfig agent;
    RateLimitPolicy rate_limit;
    opt::OversubConfig oversub;
    opt::UnderclockConfig underclock;
    std::vector<ScriptedEvent> events;
    bool parallel_agents = false;
};

/// A validation failure pinned to a document path such as
/// `workloads[1].hints.availability_nines`.
class DocumentError : public Error {
public:
    DocumentError(std::string path, std::string reason);
    const std::string& path() const { return path_; }
    const std::string& reason() const { return reason_; }

private:
    std::string path_;
    std::string reason_;
};

using ScenarioValidationError = DocumentError;

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

/// Semantic checks (references, ranges); parse_scenario runs it.
void validate(const Scenario& s);

nlohmann::json to_json(const Scenario& s);

}  // namespace wi
