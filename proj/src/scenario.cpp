#include "wi/scenario.hpp"

#include "document.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace wi {

using nlohmann::json;

std::string_view to_string(WorkloadModelKind k) {
    switch (k) {
        case WorkloadModelKind::BatchAnalytics: return "batch";
        case WorkloadModelKind::Microservices: return "microservices";
        case WorkloadModelKind::VideoConference: return "videoconf";
    }
    return "?";
}

namespace {

using detail::Obj;
using detail::idx;
using detail::parse_hints;
using detail::parse_util;

UtilStats default_util(WorkloadModelKind k) {
    switch (k) {
        case WorkloadModelKind::BatchAnalytics: return {75, 85, 85, 85, 60};
        case WorkloadModelKind::Microservices: return {50, 60, 70, 70, 50};
        case WorkloadModelKind::VideoConference: return {45, 70, 80, 60, 30};
    }
    return {};
}

AutoscaleSpec parse_autoscale(const json& j, const std::string& path) {
    Obj o(j, path);
    AutoscaleSpec a;
    a.enabled = o.boolean("enabled", true);
    const auto policy = o.str("policy", "threshold");
    if (policy == "threshold") {
        o.only({"enabled", "policy", "threshold_pct", "min", "max"});
        opt::ThresholdPolicy p;
        p.threshold_pct = o.number("threshold_pct", p.threshold_pct);
        p.min_count = int(o.integer("min", p.min_count));
        p.max_count = int(o.integer("max", p.max_count));
        if (p.threshold_pct <= 0.0 || p.threshold_pct > 100.0) Obj::fail(o.at("threshold_pct"), "must be in (0,100]");
        if (p.min_count < 1 || p.max_count < p.min_count) Obj::fail(o.at("min"), "need 1 <= min <= max");
        a.policy = p;
    } else if (policy == "schedule") {
        o.only({"enabled", "policy", "windows", "default"});
        opt::SchedulePolicy p;
        p.default_count = int(o.integer("default", 1));
        if (p.default_count < 1) Obj::fail(o.at("default"), "must be at least 1");
        const auto& ws = o.array("windows");
        for (std::size_t i = 0; i < ws.size(); ++i) {
            Obj w(ws[i], idx(o.at("windows"), i));
            w.only({"start_ms", "end_ms", "count"});
            opt::ScheduleWindow sw;
            sw.start_of_day_ms = w.integer("start_ms");
            sw.end_of_day_ms = w.integer("end_ms");
            sw.count = int(w.integer("count"));
            if (sw.start_of_day_ms < 0 || sw.end_of_day_ms > opt::kDayMs || sw.start_of_day_ms >= sw.end_of_day_ms) {
                Obj::fail(w.at("end_ms"), "window must satisfy 0 <= start < end <= one day");
            }
            if (sw.count < 1) Obj::fail(w.at("count"), "must be at least 1");
            p.windows.push_back(sw);
        }
        a.policy = p;
    } else {
        Obj::fail(o.at("policy"), "expected threshold or schedule");
    }
    return a;
}

void parse_batch(const json& j, const std::string& path, BatchParams& b) {
    Obj o(j, path);
    o.only({"jobs", "task_ms_jitter", "critical_age_ms", "checkpoint_interval_ms", "am_restart_ms",
            "container_start_ms"});
    b.task_ms_jitter = o.number("task_ms_jitter", b.task_ms_jitter);
    if (b.task_ms_jitter < 0.0 || b.task_ms_jitter >= 1.0) Obj::fail(o.at("task_ms_jitter"), "must be in [0,1)");
    b.critical_age_ms = o.integer("critical_age_ms", b.critical_age_ms);
    b.checkpoint_interval_ms = o.integer("checkpoint_interval_ms", b.checkpoint_interval_ms);
    b.am_restart_ms = o.integer("am_restart_ms", b.am_restart_ms);
    b.container_start_ms = o.integer("container_start_ms", b.container_start_ms);
    if (b.checkpoint_interval_ms <= 0) Obj::fail(o.at("checkpoint_interval_ms"), "must be positive");
    for (const char* k : {"critical_age_ms", "am_restart_ms", "container_start_ms"}) {
        if (o.integer(k, 0) < 0) Obj::fail(o.at(k), "must be non-negative");
    }
    const auto& jobs = o.array("jobs");
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        Obj jo(jobs[i], idx(o.at("jobs"), i));
        jo.only({"arrival_ms", "stages"});
        BatchJobSpec job;
        job.arrival_ms = jo.integer("arrival_ms", 0);
        if (job.arrival_ms < 0) Obj::fail(jo.at("arrival_ms"), "must be non-negative");
        const auto& stages = jo.array("stages");
        if (stages.empty()) Obj::fail(jo.at("stages"), "a job needs at least one stage");
        for (std::size_t k = 0; k < stages.size(); ++k) {
            Obj so(stages[k], idx(jo.at("stages"), k));
            so.only({"tasks", "task_ms"});
            BatchStage st;
            st.tasks = int(so.integer("tasks"));
            st.task_ms = so.integer("task_ms");
            if (st.tasks < 1) Obj::fail(so.at("tasks"), "must be at least 1");
            if (st.task_ms <= 0) Obj::fail(so.at("task_ms"), "must be positive");
            job.stages.push_back(st);
        }
        b.jobs.push_back(std::move(job));
    }
}

void parse_micro(const json& j, const std::string& path, MicroParams& m) {
    Obj o(j, path);
    o.only({"peak_rps", "trough_rps", "rps_per_pod", "pods_per_node", "period_ms"});
    m.peak_rps = o.number("peak_rps", m.peak_rps);
    m.trough_rps = o.number("trough_rps", m.trough_rps);
    m.rps_per_pod = o.number("rps_per_pod", m.rps_per_pod);
    m.pods_per_node = int(o.integer("pods_per_node", m.pods_per_node));
    m.period_ms = o.integer("period_ms", m.period_ms);
    if (m.trough_rps < 0.0 || m.peak_rps < m.trough_rps) Obj::fail(o.at("peak_rps"), "need 0 <= trough <= peak");
    if (m.rps_per_pod <= 0.0) Obj::fail(o.at("rps_per_pod"), "must be positive");
    if (m.pods_per_node < 1) Obj::fail(o.at("pods_per_node"), "must be at least 1");
    if (m.period_ms <= 0) Obj::fail(o.at("period_ms"), "must be positive");
}

void parse_conf(const json& j, const std::string& path, ConfParams& c) {
    Obj o(j, path);
    o.only({"peak_calls", "trough_calls", "calls_per_vm", "spike_amplitude", "spike_duration_ms", "high_load_pct",
            "period_ms"});
    c.peak_calls = o.number("peak_calls", c.peak_calls);
    c.trough_calls = o.number("trough_calls", c.trough_calls);
    c.calls_per_vm = o.number("calls_per_vm", c.calls_per_vm);
    c.spike_amplitude = o.number("spike_amplitude", c.spike_amplitude);
    c.spike_duration_ms = o.integer("spike_duration_ms", c.spike_duration_ms);
    c.high_load_pct = o.number("high_load_pct", c.high_load_pct);
    c.period_ms = o.integer("period_ms", c.period_ms);
    if (c.trough_calls < 0.0 || c.peak_calls < c.trough_calls) Obj::fail(o.at("peak_calls"), "need 0 <= trough <= peak");
    if (c.calls_per_vm <= 0.0) Obj::fail(o.at("calls_per_vm"), "must be positive");
    if (c.spike_amplitude < 0.0) Obj::fail(o.at("spike_amplitude"), "must be non-negative");
    if (c.spike_duration_ms < 0 || c.spike_duration_ms > 1'800'000) {
        Obj::fail(o.at("spike_duration_ms"), "must be within [0, 30 minutes]");
    }
    if (c.period_ms <= 0) Obj::fail(o.at("period_ms"), "must be positive");
}

WorkloadSpec parse_workload(const json& j, const std::string& path) {
    Obj o(j, path);
    o.only({"id", "model", "region", "vms", "cores_per_vm", "hints", "runtime_hints", "util", "autoscale", "params"});
    WorkloadSpec w;
    w.id = o.str("id");
    if (w.id.empty()) Obj::fail(o.at("id"), "must not be empty");
    const auto model = o.str("model");
    if (model == "batch") {
        w.model = WorkloadModelKind::BatchAnalytics;
    } else if (model == "microservices") {
        w.model = WorkloadModelKind::Microservices;
    } else if (model == "videoconf") {
        w.model = WorkloadModelKind::VideoConference;
    } else {
        Obj::fail(o.at("model"), "expected batch, microservices or videoconf");
    }
    w.region = o.str("region");
    w.vm_count = int(o.integer("vms"));
    if (w.vm_count < 1) Obj::fail(o.at("vms"), "must be at least 1");
    w.cores_per_vm = o.integer("cores_per_vm");
    if (w.cores_per_vm < 1) Obj::fail(o.at("cores_per_vm"), "must be at least 1");
    w.hints = o.has("hints") ? parse_hints(o.raw("hints"), o.at("hints")) : conservative_default();
    w.runtime_hints = o.boolean("runtime_hints", true);
    w.util = default_util(w.model);
    if (o.has("util")) w.util = parse_util(o.raw("util"), o.at("util"), w.util);
    if (o.has("autoscale")) w.autoscale = parse_autoscale(o.raw("autoscale"), o.at("autoscale"));
    const json empty = json::object();
    const json& params = o.has("params") ? o.raw("params") : empty;
    switch (w.model) {
        case WorkloadModelKind::BatchAnalytics:
            if (!o.has("params")) Obj::fail(o.at("params"), "batch workloads need a job list");
            parse_batch(params, o.at("params"), w.batch);
            break;
        case WorkloadModelKind::Microservices: parse_micro(params, o.at("params"), w.micro); break;
        case WorkloadModelKind::VideoConference: parse_conf(params, o.at("params"), w.conf); break;
    }
    return w;
}

std::string padded(const std::string& prefix, std::int64_t i, std::int64_t n) {
    const auto width = std::to_string(n).size();
    auto num = std::to_string(i);
    return prefix + std::string(width > num.size() ? width - num.size() : 0, '0') + num;
}

void parse_servers(const json& list, const std::string& path, std::vector<ServerSpec>& out) {
    for (std::size_t i = 0; i < list.size(); ++i) {
        Obj o(list[i], idx(path, i));
        o.only({"id", "count", "region", "rack", "racks", "cores", "power_budget_slots"});
        ServerSpec s;
        s.region = o.str("region");
        s.cores = o.integer("cores");
        if (s.cores < 1) Obj::fail(o.at("cores"), "must be at least 1");
        s.power_budget_slots = o.integer("power_budget_slots", 0);
        if (s.power_budget_slots < 0) Obj::fail(o.at("power_budget_slots"), "must be non-negative");
        const auto id = o.str("id");
        const auto rack = o.str("rack", id);
        const auto count = o.integer("count", 1);
        const auto racks = o.integer("racks", 1);
        if (count < 1) Obj::fail(o.at("count"), "must be at least 1");
        if (racks < 1 || racks > count) Obj::fail(o.at("racks"), "need 1 <= racks <= count");
        if (count == 1 && !o.has("count")) {
            s.id = id;
            s.rack = rack;
            out.push_back(s);
            continue;
        }
        for (std::int64_t k = 1; k <= count; ++k) {
            s.id = padded(id, k, count);
            s.rack = padded(rack + "-r", (k - 1) % racks + 1, racks);
            out.push_back(s);
        }
    }
}

ScriptedEvent parse_event(const json& j, const std::string& path) {
    Obj o(j, path);
    ScriptedEvent e;
    const auto type = o.str("type");
    e.at_ms = o.integer("at_ms");
    if (e.at_ms < 0) Obj::fail(o.at("at_ms"), "must be non-negative");
    e.duration_ms = o.integer("duration_ms", e.duration_ms);
    if (e.duration_ms <= 0) Obj::fail(o.at("duration_ms"), "must be positive");
    if (type == "capacity_crunch") {
        o.only({"type", "at_ms", "duration_ms", "region", "cores"});
        e.kind = ScriptedEventKind::CapacityCrunch;
        e.region = o.str("region");
        e.cores = o.integer("cores");
        if (e.cores < 1) Obj::fail(o.at("cores"), "must be at least 1");
    } else if (type == "power_event") {
        o.only({"type", "at_ms", "duration_ms", "severity", "effective_in_ms", "servers"});
        e.kind = ScriptedEventKind::PowerEvent;
        e.severity = o.number("severity", 0.0);
        if (e.severity <= 0.0 || e.severity > 1.0) Obj::fail(o.at("severity"), "must be in (0,1]");
        e.lead_ms = o.integer("effective_in_ms", 0);
        if (e.lead_ms < 0) Obj::fail(o.at("effective_in_ms"), "must be non-negative");
        if (o.has("servers")) {
            const auto& ss = o.array("servers");
            for (std::size_t i = 0; i < ss.size(); ++i) {
                if (!ss[i].is_string()) Obj::fail(idx(o.at("servers"), i), "expected a server id");
                e.servers.push_back(ss[i].get<std::string>());
            }
        }
    } else {
        Obj::fail(o.at("type"), "expected capacity_crunch or power_event");
    }
    return e;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
    Obj o(doc, "");
    o.only({"name", "seed", "duration_ms", "tick_ms", "optimizer_interval_ms", "boot_time_ms", "region_price_weight",
            "optimizations", "regions", "servers", "workloads", "agent", "broker", "oversub", "underclock", "events",
            "parallel_agents"});
    Scenario s;
    s.name = o.str("name", "scenario");
    const auto seed = o.integer("seed", 1);
    if (seed < 0) Obj::fail("seed", "must be non-negative");
    s.seed = std::uint64_t(seed);
    s.duration_ms = o.integer("duration_ms");
    s.tick_ms = o.integer("tick_ms", s.tick_ms);
    s.optimizer_interval_ms = o.integer("optimizer_interval_ms", s.optimizer_interval_ms);
    s.boot_time_ms = o.integer("boot_time_ms", s.boot_time_ms);
    s.region_price_weight = o.number("region_price_weight", s.region_price_weight);
    s.parallel_agents = o.boolean("parallel_agents", false);

    if (o.has("optimizations")) {
        const auto& list = o.array("optimizations");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto p = idx("optimizations", i);
            if (!list[i].is_string()) Obj::fail(p, "expected an optimization name");
            auto id = parse_optimization(list[i].get<std::string>());
            if (!id || *id == OptimizationId::OnDemand) Obj::fail(p, "unknown optimization");
            s.optimizations.insert(*id);
        }
    }

    const auto& regions = o.array("regions");
    for (std::size_t i = 0; i < regions.size(); ++i) {
        Obj r(regions[i], idx("regions", i));
        r.only({"id", "price_factor", "carbon_g_per_kwh"});
        opt::RegionEntry e;
        e.region_id = r.str("id");
        e.price_factor = r.number("price_factor", 1.0);
        e.carbon_g_per_kwh = r.number("carbon_g_per_kwh", 0.0);
        if (e.price_factor <= 0.0) Obj::fail(r.at("price_factor"), "must be positive");
        if (e.carbon_g_per_kwh < 0.0) Obj::fail(r.at("carbon_g_per_kwh"), "must be non-negative");
        s.regions.push_back(e);
    }
    parse_servers(o.array("servers"), "servers", s.servers);
    const auto& workloads = o.array("workloads");
    for (std::size_t i = 0; i < workloads.size(); ++i) {
        s.workloads.push_back(parse_workload(workloads[i], idx("workloads", i)));
    }

    if (o.has("agent")) {
        Obj a(o.raw("agent"), "agent");
        a.only({"poll_interval_ms", "eviction_notice_ms", "flap_max_flips", "flap_window_ms"});
        s.agent.poll_interval_ms = a.integer("poll_interval_ms", s.agent.poll_interval_ms);
        s.agent.eviction_notice_ms = a.integer("eviction_notice_ms", s.agent.eviction_notice_ms);
        s.agent.flap.max_flips = int(a.integer("flap_max_flips", s.agent.flap.max_flips));
        s.agent.flap.window_ms = a.integer("flap_window_ms", s.agent.flap.window_ms);
        try {
            validate(s.agent);
        } catch (const Error& e) {
            Obj::fail("agent", e.what());
        }
    }
    if (o.has("broker")) {
        Obj b(o.raw("broker"), "broker");
        b.only({"max_events_per_second", "burst"});
        s.rate_limit.max_events_per_second = b.integer("max_events_per_second", s.rate_limit.max_events_per_second);
        s.rate_limit.burst = b.integer("burst", s.rate_limit.burst);
        if (s.rate_limit.max_events_per_second < 1) Obj::fail("broker.max_events_per_second", "must be at least 1");
        if (s.rate_limit.burst < 0) Obj::fail("broker.burst", "must be non-negative");
    }
    if (o.has("oversub")) {
        Obj v(o.raw("oversub"), "oversub");
        v.only({"cpu_ratio", "memory_ratio"});
        s.oversub.cpu_ratio = v.number("cpu_ratio", s.oversub.cpu_ratio);
        s.oversub.memory_ratio = v.number("memory_ratio", s.oversub.memory_ratio);
        if (s.oversub.cpu_ratio < 1.0) Obj::fail("oversub.cpu_ratio", "must be at least 1");
        if (s.oversub.memory_ratio < 1.0) Obj::fail("oversub.memory_ratio", "must be at least 1");
    }
    if (o.has("underclock")) {
        Obj u(o.raw("underclock"), "underclock");
        u.only({"idle_threshold_pct", "carbon_idle_threshold_pct", "notice_lead_ms"});
        s.underclock.idle_threshold_pct = u.number("idle_threshold_pct", s.underclock.idle_threshold_pct);
        s.underclock.carbon_idle_threshold_pct =
            u.number("carbon_idle_threshold_pct", s.underclock.carbon_idle_threshold_pct);
        s.underclock.notice_lead_ms = u.integer("notice_lead_ms", s.underclock.notice_lead_ms);
    }
    if (o.has("events")) {
        const auto& events = o.array("events");
        for (std::size_t i = 0; i < events.size(); ++i) s.events.push_back(parse_event(events[i], idx("events", i)));
    }
    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioValidationError(path, "cannot open scenario file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioValidationError("<root>", std::string("not valid JSON: ") + e.what());
    }
    return parse_scenario(doc);
}

void validate(const Scenario& s) {
    auto fail = [](const std::string& p, const std::string& r) { throw ScenarioValidationError(p, r); };
    if (s.duration_ms <= 0) fail("duration_ms", "must be positive");
    if (s.tick_ms <= 0) fail("tick_ms", "must be positive");
    if (s.optimizer_interval_ms < s.tick_ms || s.optimizer_interval_ms % s.tick_ms != 0) {
        fail("optimizer_interval_ms", "must be a positive multiple of tick_ms");
    }
    if (s.boot_time_ms < 0) fail("boot_time_ms", "must be non-negative");
    if (s.region_price_weight < 0.0 || s.region_price_weight > 1.0) fail("region_price_weight", "must be in [0,1]");
    if (s.regions.empty()) fail("regions", "at least one region is required");
    if (s.servers.empty()) fail("servers", "at least one server is required");

    std::set<RegionId> regions;
    for (std::size_t i = 0; i < s.regions.size(); ++i) {
        if (!regions.insert(s.regions[i].region_id).second) fail(idx("regions", i) + ".id", "duplicate region");
    }
    std::set<RegionId> with_servers;
    std::set<ServerId> servers;
    for (std::size_t i = 0; i < s.servers.size(); ++i) {
        const auto& sv = s.servers[i];
        if (!servers.insert(sv.id).second) fail(idx("servers", i) + ".id", "duplicate server id " + sv.id);
        if (!regions.count(sv.region)) fail(idx("servers", i) + ".region", "unknown region " + sv.region);
        with_servers.insert(sv.region);
    }
    std::set<WorkloadId> workloads;
    for (std::size_t i = 0; i < s.workloads.size(); ++i) {
        const auto& w = s.workloads[i];
        const auto p = idx("workloads", i);
        if (!workloads.insert(w.id).second) fail(p + ".id", "duplicate workload id");
        if (!regions.count(w.region)) fail(p + ".region", "unknown region " + w.region);
        if (!with_servers.count(w.region)) fail(p + ".region", "region has no servers");
    }
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const auto& e = s.events[i];
        const auto p = idx("events", i);
        if (e.kind == ScriptedEventKind::CapacityCrunch && !regions.count(e.region)) {
            fail(p + ".region", "unknown region " + e.region);
        }
        for (std::size_t k = 0; k < e.servers.size(); ++k) {
            if (!servers.count(e.servers[k])) fail(idx(p + ".servers", k), "unknown server " + e.servers[k]);
        }
    }
}

json to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["duration_ms"] = s.duration_ms;
    j["tick_ms"] = s.tick_ms;
    j["optimizer_interval_ms"] = s.optimizer_interval_ms;
    j["boot_time_ms"] = s.boot_time_ms;
    j["region_price_weight"] = s.region_price_weight;
    j["parallel_agents"] = s.parallel_agents;
    j["optimizations"] = json::array();
    for (auto id : s.optimizations.members()) j["optimizations"].push_back(std::string(to_string(id)));
    j["regions"] = json::array();
    j["servers"] = json::array();
    j["workloads"] = json::array();
    for (const auto& r : s.regions) {
        j["regions"].push_back({{"id", r.region_id}, {"price_factor", r.price_factor},
                                {"carbon_g_per_kwh", r.carbon_g_per_kwh}});
    }
    for (const auto& sv : s.servers) {
        j["servers"].push_back({{"id", sv.id}, {"region", sv.region}, {"rack", sv.rack}, {"cores", sv.cores},
                                {"power_budget_slots", sv.power_budget_slots}});
    }
    for (const auto& w : s.workloads) {
        json wj;
        wj["id"] = w.id;
        wj["model"] = std::string(to_string(w.model));
        wj["region"] = w.region;
        wj["vms"] = w.vm_count;
        wj["cores_per_vm"] = w.cores_per_vm;
        wj["runtime_hints"] = w.runtime_hints;
        const auto& h = w.hints;
        wj["hints"] = {{"scale_up_down", h.scale_up_down},
                       {"scale_out_in", h.scale_out_in},
                       {"deploy_time_ms", h.deploy_time_ms},
                       {"availability_nines", h.availability_nines},
                       {"preemptibility_pct", h.preemptibility_pct},
                       {"delay_tolerance_ms", h.delay_tolerance_ms},
                       {"region_independent", h.region_independent}};
        wj["util"] = {{"p95_cpu_pct", w.util.p95_cpu_pct},       {"p95_max_cpu_pct", w.util.p95_max_cpu_pct},
                      {"max_cpu_pct", w.util.max_cpu_pct},       {"max_memory_pct", w.util.max_memory_pct},
                      {"max_disk_pct", w.util.max_disk_pct}};
        if (w.autoscale.enabled) {
            if (const auto* t = std::get_if<opt::ThresholdPolicy>(&w.autoscale.policy)) {
                wj["autoscale"] = {{"policy", "threshold"},
                                   {"threshold_pct", t->threshold_pct},
                                   {"min", t->min_count},
                                   {"max", t->max_count}};
            } else {
                const auto& sp = std::get<opt::SchedulePolicy>(w.autoscale.policy);
                json ws = json::array();
                for (const auto& x : sp.windows) {
                    ws.push_back({{"start_ms", x.start_of_day_ms}, {"end_ms", x.end_of_day_ms}, {"count", x.count}});
                }
                wj["autoscale"] = {{"policy", "schedule"}, {"windows", ws}, {"default", sp.default_count}};
            }
        }
        switch (w.model) {
            case WorkloadModelKind::BatchAnalytics: {
                json jobs = json::array();
                for (const auto& job : w.batch.jobs) {
                    json st = json::array();
                    for (const auto& x : job.stages) st.push_back({{"tasks", x.tasks}, {"task_ms", x.task_ms}});
                    jobs.push_back({{"arrival_ms", job.arrival_ms}, {"stages", st}});
                }
                wj["params"] = {{"jobs", jobs},
                                {"task_ms_jitter", w.batch.task_ms_jitter},
                                {"critical_age_ms", w.batch.critical_age_ms},
                                {"checkpoint_interval_ms", w.batch.checkpoint_interval_ms},
                                {"am_restart_ms", w.batch.am_restart_ms},
                                {"container_start_ms", w.batch.container_start_ms}};
                break;
            }
            case WorkloadModelKind::Microservices:
                wj["params"] = {{"peak_rps", w.micro.peak_rps},       {"trough_rps", w.micro.trough_rps},
                                {"rps_per_pod", w.micro.rps_per_pod}, {"pods_per_node", w.micro.pods_per_node},
                                {"period_ms", w.micro.period_ms}};
                break;
            case WorkloadModelKind::VideoConference:
                wj["params"] = {{"peak_calls", w.conf.peak_calls},
                                {"trough_calls", w.conf.trough_calls},
                                {"calls_per_vm", w.conf.calls_per_vm},
                                {"spike_amplitude", w.conf.spike_amplitude},
                                {"spike_duration_ms", w.conf.spike_duration_ms},
                                {"high_load_pct", w.conf.high_load_pct},
                                {"period_ms", w.conf.period_ms}};
                break;
        }
        j["workloads"].push_back(wj);
    }
    j["agent"] = {{"poll_interval_ms", s.agent.poll_interval_ms},
                  {"eviction_notice_ms", s.agent.eviction_notice_ms},
                  {"flap_max_flips", s.agent.flap.max_flips},
                  {"flap_window_ms", s.agent.flap.window_ms}};
    j["broker"] = {{"max_events_per_second", s.rate_limit.max_events_per_second}, {"burst", s.rate_limit.burst}};
    j["oversub"] = {{"cpu_ratio", s.oversub.cpu_ratio}, {"memory_ratio", s.oversub.memory_ratio}};
    j["underclock"] = {{"idle_threshold_pct", s.underclock.idle_threshold_pct},
                       {"carbon_idle_threshold_pct", s.underclock.carbon_idle_threshold_pct},
                       {"notice_lead_ms", s.underclock.notice_lead_ms}};
    j["events"] = json::array();
    for (const auto& e : s.events) {
        json ej;
        ej["at_ms"] = e.at_ms;
        ej["duration_ms"] = e.duration_ms;
        if (e.kind == ScriptedEventKind::CapacityCrunch) {
            ej["type"] = "capacity_crunch";
            ej["region"] = e.region;
            ej["cores"] = e.cores;
        } else {
            ej["type"] = "power_event";
            ej["severity"] = e.severity;
            ej["effective_in_ms"] = e.lead_ms;
            ej["servers"] = e.servers;
        }
        j["events"].push_back(ej);
    }
    return j;
}

}  // namespace wi
