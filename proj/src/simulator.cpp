#include "wi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <queue>
#include <random>
#include <sstream>

#include "wi/accounting.hpp"
#include "wi/arbiter.hpp"
#include "wi/event_log.hpp"
#include "wi/models.hpp"
#include "wi/node_agent.hpp"
#include "wi/optimizers.hpp"

namespace wi {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Trace

void Trace::add(TimeMs t, std::string entity, std::string event, std::string detail) {
    rows_.push_back({t, std::move(entity), std::move(event), std::move(detail)});
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

}  // namespace

std::string Trace::to_csv() const {
    std::string out = "time_ms,entity,event,detail\n";
    for (const auto& r : rows_) {
        out += std::to_string(r.time_ms);
        out += ',';
        out += csv_field(r.entity);
        out += ',';
        out += csv_field(r.event);
        out += ',';
        out += csv_field(r.detail);
        out += '\n';
    }
    return out;
}

Trace Trace::from_csv(std::string_view csv) {
    Trace t;
    std::size_t pos = 0;
    bool header = true;
    while (pos < csv.size()) {
        auto end = csv.find('\n', pos);
        if (end == std::string_view::npos) end = csv.size();
        const auto line = csv.substr(pos, end - pos);
        pos = end + 1;
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 4) throw Error("trace line has " + std::to_string(f.size()) + " fields");
        t.add(std::stoll(f[0]), f[1], f[2], f[3]);
    }
    return t;
}

std::string Trace::digest() const {
    std::ostringstream os;
    os << std::hex << std::setw(8) << std::setfill('0') << checksum(to_csv());
    return os.str();
}

std::optional<std::string> detail_field(std::string_view detail, std::string_view key) {
    std::size_t pos = 0;
    while (pos < detail.size()) {
        auto end = detail.find(' ', pos);
        if (end == std::string_view::npos) end = detail.size();
        const auto tok = detail.substr(pos, end - pos);
        const auto eq = tok.find('=');
        if (eq != std::string_view::npos && tok.substr(0, eq) == key) return std::string(tok.substr(eq + 1));
        pos = end + 1;
    }
    return std::nullopt;
}

int notice_violations(const Trace& trace, TimeMs notice_ms) {
    int bad = 0;
    for (const auto& r : trace.rows()) {
        if (r.event != "evict") continue;
        if (detail_field(r.detail, "emergency").value_or("0") == "1") continue;
        const auto issued = detail_field(r.detail, "issued");
        if (!issued || r.time_ms - std::stoll(*issued) < notice_ms) ++bad;
    }
    return bad;
}

const WorkloadMetrics& MetricsReport::workload(const WorkloadId& id) const {
    for (const auto& w : workloads) {
        if (w.id == id) return w;
    }
    throw Error("no metrics for workload " + id);
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

constexpr double kMsPerHour = 3'600'000.0;
const std::string kOptimizerPublisher = "optimizer";

std::string kv(std::initializer_list<std::pair<const char*, std::string>> fields) {
    std::string out;
    for (const auto& [k, v] : fields) {
        if (!out.empty()) out += ' ';
        out += k;
        out += '=';
        out += v;
    }
    return out;
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

std::string str(std::int64_t v) { return std::to_string(v); }

struct Vm {
    VmId id;
    WorkloadId workload;
    ServerId server;
    RegionId region;
    std::int64_t base_cores = 0;
    std::int64_t harvested = 0;
    double alloc = 0.0;  // placement cost on the server
    int level = 0;
    double throttle = 1.0;
    TimeMs created_at_ms = 0;
    TimeMs ready_at_ms = 0;
    bool ready = false;
    bool leaving = false;  // eviction notice outstanding
    double interval_peak_util = 0.0;

    std::int64_t cores() const { return base_cores + harvested; }
    double speed() const { return opt::frequency_multiplier(level) * throttle; }
};

struct ServerState {
    ServerSpec spec;
    double allocated = 0.0;
    std::int64_t harvested = 0;
    std::int64_t crunch = 0;
    std::int64_t pool = 0;

    double free_unharvested() const { return double(spec.cores - harvested - crunch - pool) - allocated; }
};

struct PoolSlot {
    ServerId server;
    std::int64_t cores = 0;
};

struct WorkloadState {
    const WorkloadSpec* spec = nullptr;
    std::unique_ptr<WorkloadModel> model;
    OptimizationSet active;
    RegionId region;
    int target = 0;
    int next_vm = 0;
    int last_scale_out = 1;
    bool released = false;
    std::vector<double> util_series;
    std::map<VmId, std::vector<opt::UtilSample>> history;
    std::vector<PoolSlot> pool;
    WorkloadMetrics metrics;
};

struct Crunch {
    RegionId region;
    std::int64_t demand = 0;
    std::int64_t placed = 0;
    std::map<ServerId, std::int64_t> on;
    bool active = true;
};

struct PowerEvent {
    std::vector<ResourceClaim> claims;
    bool active = true;
};

enum class EventKind : std::uint8_t { Tick, Scripted, ApplyEviction, EndCrunch, EndPower };

struct Event {
    TimeMs t = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::Tick;
    std::size_t index = 0;
    PlatformNotification notification;
    std::string by;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
};

class Simulation {
public:
    explicit Simulation(const Scenario& s);
    RunResult run();

private:
    void push(Event e);
    void setup();
    void tick(TimeMs now);
    void scripted(std::size_t index, TimeMs now);
    void apply_eviction(const Event& e, TimeMs now);
    void end_crunch(std::size_t index, TimeMs now);
    void end_power(std::size_t index, TimeMs now);
    void optimizers(TimeMs now);

    std::optional<VmId> place_vm(WorkloadState& ws, TimeMs now, TimeMs ready_at, const ServerId* prefer = nullptr);
    void remove_vm(const VmId& id, TimeMs now, const std::string& why);
    void shrink_harvest(ServerState& s, std::int64_t cores, TimeMs now);
    void fill_crunches(TimeMs now);
    void replenish(TimeMs now);
    void notify(PlatformNotification n, TimeMs now, const std::string& by);
    void publish_decision(const std::string& opt, const std::string& action, const std::string& scope,
                          std::int64_t amount, TimeMs now);
    void arbitrate_frequency(const VmId& vm, TimeMs now);
    void contention(TimeMs now);
    void account(TimeMs now, TimeMs dt);
    std::map<WorkloadId, opt::WorkloadBudget> budgets() const;
    PreemptionPriority priority_of_vm(const VmId& vm) const;
    int effective_preemptibility(const VmId& vm) const;
    std::vector<VmView> views(const WorkloadState& ws) const;
    std::vector<VmId> vms_of(const WorkloadId& w) const;
    int alive(const WorkloadState& ws) const;
    std::uint64_t next_id() { return ++ids_; }

    const Scenario& sc_;
    PriceBook book_;
    std::mt19937_64 rng_;
    std::unique_ptr<Broker> broker_;
    std::map<ServerId, ServerState> servers_;
    std::map<ServerId, std::unique_ptr<NodeAgent>> agents_;
    std::map<WorkloadId, WorkloadState> workloads_;
    std::map<VmId, Vm> vms_;
    std::map<RegionId, opt::RegionEntry> regions_;
    std::vector<Crunch> crunches_;
    std::vector<PowerEvent> power_;
    std::map<VmId, std::vector<ResourceClaim>> freq_claims_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t seq_ = 0;
    std::uint64_t ids_ = 0;
    Trace trace_;
    MetricsReport metrics_;
};

Simulation::Simulation(const Scenario& s) : sc_(s), rng_(s.seed) {
    BrokerConfig bc;
    bc.rate_limit = s.rate_limit;
    bc.rate_limit.publisher_rates[kOptimizerPublisher] = 1'000'000'000;
    broker_ = std::make_unique<Broker>(bc);
    for (const auto& r : s.regions) regions_[r.region_id] = r;
    metrics_.scenario = s.name;
    metrics_.seed = s.seed;
    metrics_.duration_ms = s.duration_ms;
}

void Simulation::push(Event e) {
    e.seq = ++seq_;
    queue_.push(std::move(e));
}

std::vector<VmId> Simulation::vms_of(const WorkloadId& w) const {
    std::vector<VmId> out;
    for (const auto& [id, vm] : vms_) {
        if (vm.workload == w) out.push_back(id);
    }
    return out;
}

int Simulation::alive(const WorkloadState& ws) const {
    int n = 0;
    for (const auto& [id, vm] : vms_) {
        if (vm.workload == ws.spec->id && !vm.leaving) ++n;
    }
    return n;
}

std::vector<VmView> Simulation::views(const WorkloadState& ws) const {
    std::vector<VmView> out;
    for (const auto& [id, vm] : vms_) {
        if (vm.workload != ws.spec->id) continue;
        out.push_back({id, vm.base_cores, vm.cores(), vm.speed(), vm.ready, vm.created_at_ms});
    }
    return out;
}

PreemptionPriority Simulation::priority_of_vm(const VmId& vm) const { return broker_->effective(vm).priority; }

int Simulation::effective_preemptibility(const VmId& vm) const {
    return broker_->effective(vm).current().preemptibility_pct;
}

std::map<WorkloadId, opt::WorkloadBudget> Simulation::budgets() const {
    std::map<WorkloadId, opt::WorkloadBudget> out;
    for (const auto& [wid, ws] : workloads_) {
        if (!ws.active.contains(OptimizationId::SpotVMs) && !ws.active.contains(OptimizationId::HarvestVMs)) continue;
        opt::WorkloadBudget b;
        int sum = 0;
        for (const auto& [id, vm] : vms_) {
            if (vm.workload != wid) continue;
            ++b.vm_count;
            sum += effective_preemptibility(id);
            if (vm.leaving) ++b.already_preempted;
        }
        // Ceiling of the mean so that "all VMs but one" stays n - 1.
        b.preemptibility_pct = b.vm_count > 0 ? (sum + b.vm_count - 1) / b.vm_count : 0;
        out[wid] = b;
    }
    return out;
}

void Simulation::notify(PlatformNotification n, TimeMs now, const std::string& by) {
    auto vit = vms_.find(n.vm_id);
    if (vit == vms_.end()) return;
    auto& agent = *agents_.at(vit->second.server);
    n.id = next_id();
    const auto stored = agent.deliver(n, now);
    broker_->publish(kOptimizerPublisher, notification_topic(vit->second.region, vit->second.server, n.vm_id),
                     stored, now);
    trace_.add(now, n.vm_id, "notify",
               kv({{"id", str(std::int64_t(stored.id))},
                   {"kind", std::string(to_string(stored.kind))},
                   {"issued", str(stored.issued_at_ms)},
                   {"effective", str(stored.effective_at_ms)},
                   {"payload", str(stored.payload)},
                   {"emergency", stored.emergency ? "1" : "0"},
                   {"by", by}}));
    if (is_eviction_kind(stored.kind)) {
        vit->second.leaving = true;
        ++workloads_.at(vit->second.workload).metrics.preemption_notices;
        Event e;
        e.t = stored.effective_at_ms;
        e.kind = EventKind::ApplyEviction;
        e.notification = stored;
        e.by = by;
        push(std::move(e));
    }
}

void Simulation::publish_decision(const std::string& opt, const std::string& action, const std::string& scope,
                                  std::int64_t amount, TimeMs now) {
    OptimizationEvent ev{opt, action, scope, amount};
    broker_->publish(kOptimizerPublisher, optimization_topic(opt), ev, now);
    trace_.add(now, opt, "decision", kv({{"action", action}, {"scope", scope}, {"amount", str(amount)}}));
}

std::optional<VmId> Simulation::place_vm(WorkloadState& ws, TimeMs now, TimeMs ready_at, const ServerId* prefer) {
    const auto& spec = *ws.spec;
    const bool oversub = ws.active.contains(OptimizationId::Oversubscription);
    const double need = oversub ? double(spec.cores_per_vm) / sc_.oversub.cpu_ratio : double(spec.cores_per_vm);

    ServerState* best = nullptr;
    if (prefer) {
        best = &servers_.at(*prefer);
    } else {
        // Best fit on unharvested cores, else the server where shrinking
        // harvest VMs frees the least.
        double best_free = 0.0;
        for (auto& [sid, s] : servers_) {
            if (s.spec.region != ws.region) continue;
            const double f = s.free_unharvested();
            if (f + 1e-9 >= need && (!best || f < best_free)) {
                best = &s;
                best_free = f;
            }
        }
        if (!best) {
            for (auto& [sid, s] : servers_) {
                if (s.spec.region != ws.region) continue;
                const double f = s.free_unharvested() + double(s.harvested);
                if (f + 1e-9 >= need && (!best || f < best_free)) {
                    best = &s;
                    best_free = f;
                }
            }
            if (!best) return std::nullopt;
            shrink_harvest(*best, std::int64_t(std::ceil(need - best->free_unharvested() - 1e-9)), now);
        }
    }

    std::ostringstream name;
    name << spec.id << "-" << std::setw(3) << std::setfill('0') << ws.next_vm++;
    Vm vm;
    vm.id = name.str();
    vm.workload = spec.id;
    vm.server = best->spec.id;
    vm.region = best->spec.region;
    vm.base_cores = spec.cores_per_vm;
    vm.alloc = need;
    vm.created_at_ms = now;
    vm.ready_at_ms = ready_at;
    vm.ready = ready_at <= now;
    best->allocated += need;
    if (best->free_unharvested() < -1e-6) throw Error("placement overcommitted server " + best->spec.id);

    broker_->register_vm({vm.id, spec.id, vm.server, best->spec.rack, vm.region, vm.base_cores, false}, now);
    broker_->set_deployment_hints(spec.id, {vm.id}, spec.hints, now);
    agents_.at(vm.server)->add_vm(vm.id);
    trace_.add(now, vm.id, "deploy",
               kv({{"workload", spec.id}, {"server", vm.server}, {"cores", str(vm.base_cores)},
                   {"ready_at", str(ready_at)}}));
    const auto id = vm.id;
    vms_.emplace(id, vm);
    ws.model->on_vm_added({id, vm.base_cores, vm.cores(), vm.speed(), vm.ready, vm.created_at_ms}, now);
    return id;
}

void Simulation::remove_vm(const VmId& id, TimeMs now, const std::string& why) {
    auto it = vms_.find(id);
    if (it == vms_.end()) return;
    auto& vm = it->second;
    auto& s = servers_.at(vm.server);
    s.allocated -= vm.alloc;
    s.harvested -= vm.harvested;
    auto& ws = workloads_.at(vm.workload);
    ws.model->on_vm_removed(id, now);
    ws.history.erase(id);
    agents_.at(vm.server)->remove_vm(id);
    broker_->unregister_vm(id, now);
    freq_claims_.erase(id);
    trace_.add(now, id, "remove", kv({{"reason", why}}));
    vms_.erase(it);
}

void Simulation::shrink_harvest(ServerState& s, std::int64_t cores, TimeMs now) {
    if (cores <= 0 || s.harvested <= 0) return;
    std::vector<opt::HarvestVm> hv;
    for (const auto& [id, vm] : vms_) {
        if (vm.server == s.spec.id && vm.harvested > 0) {
            hv.push_back({id, vm.base_cores, vm.harvested, broker_->effective(id).scale_preference});
        }
    }
    const auto plan = opt::harvest_rebalance(-std::min(cores, s.harvested), hv, now);
    for (const auto& a : plan.actions) {
        auto& vm = vms_.at(a.vm_id);
        vm.harvested += a.delta;
        s.harvested += a.delta;
        trace_.add(now, a.vm_id, "harvest", kv({{"delta", str(a.delta)}, {"cores", str(a.new_cores)}}));
    }
    for (auto n : plan.notifications) notify(std::move(n), now, "HarvestVMs");
}

void Simulation::fill_crunches(TimeMs now) {
    for (auto& c : crunches_) {
        if (!c.active || c.placed >= c.demand) continue;
        const auto before = c.placed;
        for (auto& [sid, s] : servers_) {
            if (c.placed >= c.demand) break;
            if (s.spec.region != c.region) continue;
            const auto take = std::min<std::int64_t>(c.demand - c.placed, std::int64_t(std::floor(s.free_unharvested() + 1e-9)));
            if (take <= 0) continue;
            s.crunch += take;
            c.on[sid] += take;
            c.placed += take;
        }
        if (c.placed == before) continue;
        trace_.add(now, c.region, "crunch_fill", kv({{"placed", str(c.placed)}, {"demand", str(c.demand)}}));
    }
}

void Simulation::replenish(TimeMs now) {
    for (auto& [wid, ws] : workloads_) {
        if (ws.released) continue;
        int missing = ws.target - alive(ws);
        while (missing-- > 0) {
            if (!place_vm(ws, now, now + sc_.boot_time_ms)) break;
        }
    }
}

void Simulation::setup() {
    for (const auto& sv : sc_.servers) {
        servers_[sv.id].spec = sv;
        agents_[sv.id] = std::make_unique<NodeAgent>(sv.id, sv.region, *broker_, sc_.agent, [this] { return next_id(); });
    }
    std::vector<opt::RegionEntry> hosting;
    for (const auto& r : sc_.regions) {
        const bool has = std::any_of(sc_.servers.begin(), sc_.servers.end(),
                                     [&](const ServerSpec& s) { return s.region == r.region_id; });
        if (has) hosting.push_back(r);
    }

    std::uniform_int_distribution<int> stagger(0, 600);
    for (const auto& spec : sc_.workloads) {
        auto& ws = workloads_[spec.id];
        ws.spec = &spec;
        ws.model = make_model(spec, sc_.seed);
        ws.active = best_compatible(eligibility(spec.hints, spec.util) & sc_.optimizations);
        const auto choice = opt::region_place(ws.active.contains(OptimizationId::RegionAgnostic), spec.region, hosting,
                                              sc_.region_price_weight);
        ws.region = choice.region;
        if (choice.moved) publish_decision("RegionAgnostic", "place", spec.id + "@" + choice.region, spec.vm_count, 0);
        ws.target = spec.vm_count;
        ws.metrics.id = spec.id;
        ws.metrics.model = std::string(to_string(spec.model));
        ws.metrics.pricing = ws.active.empty() ? "regular" : to_string(ws.active);
        ws.metrics.min_vms = spec.vm_count;
        trace_.add(0, spec.id, "workload",
                   kv({{"model", ws.metrics.model}, {"region", ws.region}, {"active", ws.metrics.pricing}}));
        for (int k = 0; k < spec.vm_count; ++k) {
            // Initial VMs were created over the preceding ten minutes.
            const TimeMs created = -1000LL * stagger(rng_);
            auto id = place_vm(ws, 0, 0);
            if (!id) {
                throw ScenarioValidationError("workloads", "not enough capacity to deploy " + spec.id);
            }
            vms_.at(*id).created_at_ms = created;
        }
    }
    for (auto& [wid, ws] : workloads_) {
        for (const auto& id : vms_of(wid)) {
            const auto& vm = vms_.at(id);
            ws.model->on_vm_removed(id, 0);
            ws.model->on_vm_added({id, vm.base_cores, vm.cores(), vm.speed(), vm.ready, vm.created_at_ms}, 0);
        }
    }

    for (std::size_t i = 0; i < sc_.events.size(); ++i) {
        Event e;
        e.t = sc_.events[i].at_ms;
        e.kind = EventKind::Scripted;
        e.index = i;
        push(e);
    }
    Event t;
    t.t = 0;
    t.kind = EventKind::Tick;
    push(t);
}

void Simulation::tick(TimeMs now) {
    const TimeMs dt = std::min(sc_.tick_ms, sc_.duration_ms - now);

    for (auto& [id, vm] : vms_) {
        if (!vm.ready && vm.ready_at_ms <= now) {
            vm.ready = true;
            trace_.add(now, id, "ready");
        }
    }

    // Scheduled events reach the workload before it acts.
    for (auto& [wid, ws] : workloads_) {
        for (const auto& id : vms_of(wid)) {
            auto& agent = *agents_.at(vms_.at(id).server);
            for (const auto& n : agent.read_scheduled_events(id, now)) {
                ws.model->on_notification(n, now);
                agent.acknowledge(id, n.id);
            }
        }
    }

    for (auto& [wid, ws] : workloads_) {
        if (ws.released) continue;
        const auto v = views(ws);
        ws.model->step(v, now, dt);
        double sum = 0.0;
        int n = 0;
        for (const auto& view : v) {
            auto& vm = vms_.at(view.id);
            const double u = ws.model->vm_util_pct(view.id);
            vm.interval_peak_util = std::max(vm.interval_peak_util, u);
            if (view.ready) {
                sum += u;
                ++n;
            }
        }
        if (n > 0) ws.util_series.push_back(sum / n);
        for (const auto& h : ws.model->take_hints(now)) {
            agents_.at(vms_.at(h.vm_id).server)->write_hint(h);
        }
    }

    std::vector<PreparedBatch> batches;
    if (sc_.parallel_agents) {
        std::vector<std::future<PreparedBatch>> futures;
        for (auto& [sid, agent] : agents_) {
            futures.push_back(std::async(std::launch::async, [a = agent.get(), now] { return a->prepare(now); }));
        }
        for (auto& f : futures) batches.push_back(f.get());
    } else {
        for (auto& [sid, agent] : agents_) batches.push_back(agent->prepare(now));
    }
    for (const auto& b : batches) {
        const auto r = agents_.at(b.server)->commit(b);
        for (const auto& [h, seq] : r.published) {
            ++workloads_.at(vms_.at(h.vm_id).workload).metrics.hints_published;
            trace_.add(now, h.vm_id, "hint",
                       kv({{"kind", std::string(to_string(h.kind))}, {"value", str(h.value)}, {"seq", str(std::int64_t(seq))}}));
        }
        for (const auto& ig : r.ignored) {
            ++workloads_.at(vms_.at(ig.hint.vm_id).workload).metrics.hints_ignored;
            trace_.add(now, ig.hint.vm_id, "hint_ignored",
                       kv({{"kind", std::string(to_string(ig.hint.kind))}, {"value", str(ig.hint.value)}}));
        }
        for (const auto& h : r.rate_limited) {
            ++workloads_.at(vms_.at(h.vm_id).workload).metrics.hints_rate_limited;
            trace_.add(now, h.vm_id, "rate_limited", kv({{"kind", std::string(to_string(h.kind))}}));
        }
    }

    contention(now);
    account(now, dt);

    for (auto& [wid, ws] : workloads_) {
        if (ws.released || !ws.model->finished()) continue;
        ws.released = true;
        ws.target = 0;
        trace_.add(now + dt, wid, "finished");
        for (const auto& id : vms_of(wid)) remove_vm(id, now + dt, "finished");
    }

    fill_crunches(now);
    replenish(now);

    if (now > 0 && now % sc_.optimizer_interval_ms == 0) optimizers(now);

    for (auto& [wid, ws] : workloads_) {
        if (ws.released) continue;
        const int n = alive(ws);
        ws.metrics.min_vms = std::min(ws.metrics.min_vms, n);
        ws.metrics.max_vms = std::max(ws.metrics.max_vms, n);
    }

    if (now + dt < sc_.duration_ms) {
        Event e;
        e.t = now + dt;
        e.kind = EventKind::Tick;
        push(e);
    }
}

void Simulation::contention(TimeMs now) {
    std::map<ServerId, std::vector<opt::OversubVm>> by_server;
    for (auto& [id, vm] : vms_) {
        vm.throttle = 1.0;
        const auto& ws = workloads_.at(vm.workload);
        const double demand = double(vm.cores()) * ws.model->vm_util_pct(id) / 100.0 *
                              opt::frequency_multiplier(vm.level);
        by_server[vm.server].push_back(
            {id, ws.active.contains(OptimizationId::Oversubscription), priority_of_vm(id), demand});
    }
    for (const auto& [sid, list] : by_server) {
        const auto& s = servers_.at(sid);
        const double physical = double(s.spec.cores - s.crunch - s.pool);
        const auto d = opt::oversub_admit(physical, list, sc_.oversub);
        for (const auto& t : d.throttles) {
            auto& vm = vms_.at(t.vm_id);
            for (const auto& o : list) {
                if (o.vm_id == t.vm_id && o.cpu_demand_cores > 0.0) {
                    vm.throttle = std::max(0.0, 1.0 - t.cores / o.cpu_demand_cores * 0.5);
                }
            }
            trace_.add(now, t.vm_id, "throttle", kv({{"cores", num(t.cores)}}));
        }
    }
}

void Simulation::account(TimeMs now, TimeMs dt) {
    (void)now;
    const double hours = double(dt) / kMsPerHour;
    for (const auto& [id, vm] : vms_) {
        auto& ws = workloads_.at(vm.workload);
        auto& m = ws.metrics;
        const auto& region = regions_.at(vm.region);
        UsageRecord u;
        u.cores = vm.base_cores;
        u.vm_hours = hours;
        u.region_price_factor = region.price_factor;
        u.harvested_core_hours = double(vm.harvested) * hours;
        u.overclocked_core_hours = vm.level > 0 ? double(vm.base_cores) * hours : 0.0;
        m.cost += vm_price(book_, ws.active, u);
        m.vm_hours[m.pricing] += hours;
        metrics_.core_hours[vm.region] += double(vm.cores()) * hours;
        if (vm.speed() < 1.0 - 1e-12) m.throttle_seconds += double(dt) / 1000.0;
    }
}

void Simulation::arbitrate_frequency(const VmId& id, TimeMs now) {
    auto it = vms_.find(id);
    if (it == vms_.end()) return;
    auto& vm = it->second;
    std::vector<ResourceClaim> claims;
    for (const auto& p : power_) {
        if (!p.active) continue;
        for (const auto& c : p.claims) {
            if (c.scope.size() >= 2 && c.scope[1] == id) claims.push_back(c);
        }
    }
    if (auto f = freq_claims_.find(id); f != freq_claims_.end()) {
        claims.insert(claims.end(), f->second.begin(), f->second.end());
    }
    int level = 0;
    std::string by = "none";
    if (!claims.empty()) {
        const ResourcePool pool{"freq/" + id, ResourceKind::CpuFrequency, vm.cores()};
        const auto grants = resolve(pool, claims, sc_.seed);
        std::vector<std::size_t> order(claims.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return claims[a].priority < claims[b].priority; });
        for (auto i : order) {
            const auto& c = claims[i];
            const auto g = grants[i].granted;
            trace_.add(now, pool.name, "arbitrate",
                       kv({{"claim", str(std::int64_t(c.id))}, {"opt", c.optimization}, {"requested", str(c.amount)},
                           {"granted", str(g)}}));
        }
        for (auto i : order) {
            const auto& c = claims[i];
            const auto g = grants[i].granted;
            if (g <= 0) continue;
            if (c.level < 0) {
                if (g < c.amount) continue;
                level = c.level;
            } else {
                level = int(std::min<std::int64_t>(c.level, g / std::max<std::int64_t>(1, vm.cores())));
                if (level <= 0) continue;
            }
            by = c.optimization;
            break;
        }
    }
    if (level != vm.level) {
        trace_.add(now, id, "frequency", kv({{"from", str(vm.level)}, {"to", str(level)}, {"by", by}}));
        vm.level = level;
        PlatformNotification n;
        n.vm_id = id;
        n.kind = NotificationKind::FrequencyChange;
        n.effective_at_ms = now;
        n.payload = level;
        n.detail = by;
        notify(n, now, by);
    }
}

void Simulation::scripted(std::size_t index, TimeMs now) {
    const auto& ev = sc_.events[index];
    if (ev.kind == ScriptedEventKind::CapacityCrunch) {
        crunches_.resize(std::max(crunches_.size(), index + 1));
        auto& c = crunches_[index];
        c.region = ev.region;
        c.demand = ev.cores;
        trace_.add(now, ev.region, "crunch_start", kv({{"cores", str(ev.cores)}, {"until", str(now + ev.duration_ms)}}));

        // The on-demand request outranks harvest growth for spare cores.
        std::int64_t spare = 0;
        std::int64_t harvested = 0;
        for (const auto& [sid, s] : servers_) {
            if (s.spec.region != ev.region) continue;
            spare += std::max<std::int64_t>(0, std::int64_t(std::floor(s.free_unharvested() + 1e-9)));
            harvested += s.harvested;
        }
        std::vector<ResourceClaim> claims(1);
        claims[0].id = next_id();
        claims[0].optimization = "OnDemand";
        claims[0].priority = priority_of(OptimizationId::OnDemand);
        claims[0].amount = ev.cores;
        claims[0].timestamp_ms = now;
        if (harvested > 0) {
            ResourceClaim h;
            h.id = next_id();
            h.optimization = "HarvestVMs";
            h.priority = priority_of(OptimizationId::HarvestVMs);
            h.amount = harvested;
            h.timestamp_ms = now;
            claims.push_back(h);
        }
        const ResourcePool pool{"spare/" + ev.region, ResourceKind::SpareCompute, spare + harvested};
        const auto grants = resolve(pool, claims, sc_.seed);
        for (std::size_t i = 0; i < claims.size(); ++i) {
            trace_.add(now, pool.name, "arbitrate",
                       kv({{"claim", str(std::int64_t(claims[i].id))}, {"opt", claims[i].optimization},
                           {"requested", str(claims[i].amount)}, {"granted", str(grants[i].granted)}}));
        }

        fill_crunches(now);
        std::int64_t need = c.demand - c.placed;
        for (auto& [sid, s] : servers_) {
            if (need <= 0) break;
            if (s.spec.region != ev.region || s.harvested == 0) continue;
            const auto take = std::min(need, s.harvested);
            shrink_harvest(s, take, now);
            need -= take;
        }
        fill_crunches(now);
        need = c.demand - c.placed;
        if (need > 0) {
            std::vector<opt::SpotCandidate> cands;
            for (const auto& [id, vm] : vms_) {
                if (vm.region != ev.region || vm.leaving) continue;
                const auto& ws = workloads_.at(vm.workload);
                if (!ws.active.contains(OptimizationId::SpotVMs) && !ws.active.contains(OptimizationId::HarvestVMs)) {
                    continue;
                }
                if (effective_preemptibility(id) <= 0) continue;
                cands.push_back({id, vm.workload, vm.base_cores, vm.created_at_ms, priority_of_vm(id)});
            }
            const auto plan = opt::spot_reclaim(need, cands, budgets(), now, sc_.agent.eviction_notice_ms);
            publish_decision("SpotVMs", "reclaim", ev.region, plan.freed_cores, now);
            if (plan.insufficient_capacity) {
                trace_.add(now, ev.region, "reclaim_short", kv({{"need", str(need)}, {"freed", str(plan.freed_cores)}}));
            }
            for (auto n : plan.notifications) notify(std::move(n), now, "SpotVMs");
        }
        Event end;
        end.t = now + ev.duration_ms;
        end.kind = EventKind::EndCrunch;
        end.index = index;
        push(end);
    } else {
        power_.resize(std::max(power_.size(), index + 1));
        std::vector<opt::MadcVm> mv;
        for (const auto& [id, vm] : vms_) {
            if (vm.leaving) continue;
            if (!ev.servers.empty() && std::find(ev.servers.begin(), ev.servers.end(), vm.server) == ev.servers.end()) {
                continue;
            }
            const auto& ws = workloads_.at(vm.workload);
            const bool spot = ws.active.contains(OptimizationId::SpotVMs) || ws.active.contains(OptimizationId::HarvestVMs);
            mv.push_back({id, vm.workload, vm.server, vm.cores(), vm.level, ws.active.contains(OptimizationId::MADC),
                          spot && effective_preemptibility(id) > 0, priority_of_vm(id), vm.created_at_ms});
        }
        auto plan = opt::madc_power_event(ev.severity, mv, budgets(), now, now + ev.lead_ms,
                                          sc_.agent.eviction_notice_ms);
        trace_.add(now, "power", "power_event",
                   kv({{"severity", num(ev.severity)}, {"target_shed", num(plan.target_shed)}, {"shed", num(plan.shed)},
                       {"shortfall", num(plan.shortfall.value_or(0.0))},
                       {"emergency_evictions", str(plan.emergency_evictions)}}));
        publish_decision("MADC", "shed", "power", std::llround(plan.shed), now);
        for (auto& c : plan.throttle_claims) c.id = next_id();
        power_[index].claims = plan.throttle_claims;
        for (const auto& c : plan.throttle_claims) arbitrate_frequency(c.scope.at(1), now);
        for (auto n : plan.notifications) {
            if (is_eviction_kind(n.kind)) notify(std::move(n), now, "MADC");
        }
        Event end;
        end.t = now + ev.duration_ms;
        end.kind = EventKind::EndPower;
        end.index = index;
        push(end);
    }
}

void Simulation::apply_eviction(const Event& e, TimeMs now) {
    const auto& n = e.notification;
    auto it = vms_.find(n.vm_id);
    if (it == vms_.end()) return;
    auto& m = workloads_.at(it->second.workload).metrics;
    if (n.emergency) {
        ++m.emergency_evictions;
    } else {
        ++m.evictions_with_notice;
    }
    trace_.add(now, n.vm_id, "evict",
               kv({{"id", str(std::int64_t(n.id))},
                   {"kind", std::string(to_string(n.kind))},
                   {"issued", str(n.issued_at_ms)},
                   {"notice_ms", str(now - n.issued_at_ms)},
                   {"emergency", n.emergency ? "1" : "0"},
                   {"by", e.by}}));
    remove_vm(n.vm_id, now, "evicted");
    fill_crunches(now);
}

void Simulation::end_crunch(std::size_t index, TimeMs now) {
    auto& c = crunches_.at(index);
    c.active = false;
    for (const auto& [sid, cores] : c.on) servers_.at(sid).crunch -= cores;
    trace_.add(now, c.region, "crunch_end", kv({{"released", str(c.placed)}}));
    c.on.clear();
}

void Simulation::end_power(std::size_t index, TimeMs now) {
    auto& p = power_.at(index);
    p.active = false;
    trace_.add(now, "power", "power_restored");
    for (const auto& c : p.claims) arbitrate_frequency(c.scope.at(1), now);
}

void Simulation::optimizers(TimeMs now) {
    const auto& enabled = sc_.optimizations;

    // Utilization history and rightsizing.
    for (auto& [id, vm] : vms_) {
        auto& ws = workloads_.at(vm.workload);
        const double peak = vm.interval_peak_util;
        vm.interval_peak_util = 0.0;
        if (!enabled.contains(OptimizationId::Rightsizing) || !vm.ready) continue;
        auto& h = ws.history[id];
        h.push_back({now, peak, peak * 0.8, 0.0});
        while (!h.empty() && h.front().time_ms < now - opt::RightsizeConfig{}.window_ms) h.erase(h.begin());
    }
    if (enabled.contains(OptimizationId::Rightsizing)) {
        for (auto& [wid, ws] : workloads_) {
            for (const auto& id : vms_of(wid)) {
                auto& vm = vms_.at(id);
                auto hit = ws.history.find(id);
                if (vm.leaving || hit == ws.history.end() || hit->second.empty()) continue;
                if (now - hit->second.front().time_ms < opt::RightsizeConfig{}.window_ms) continue;
                opt::RightsizeResult r;
                try {
                    r = opt::rightsize_recommend(hit->second, vm.base_cores, broker_->effective(id).current());
                } catch (const opt::InsufficientHistory&) {
                    continue;
                }
                if (!r.resize) continue;
                trace_.add(now, id, "rightsize",
                           kv({{"from", str(vm.base_cores)}, {"to", str(r.new_cores)},
                               {"automated", r.automated ? "1" : "0"}}));
                publish_decision("Rightsizing", r.automated ? "resize" : "recommend", id, r.new_cores, now);
                hit->second.clear();
                if (!r.automated) continue;
                auto& s = servers_.at(vm.server);
                const double ratio = vm.alloc / double(vm.base_cores);
                const double grow = double(r.new_cores - vm.base_cores) * ratio;
                if (grow > 0.0 && s.free_unharvested() + 1e-9 < grow) continue;
                s.allocated += grow;
                vm.alloc += grow;
                vm.base_cores = r.new_cores;
                PlatformNotification n;
                n.vm_id = id;
                n.kind = grow > 0 ? NotificationKind::ScaleUp : NotificationKind::ScaleDown;
                n.effective_at_ms = now;
                n.payload = r.new_cores;
                n.detail = "rightsize";
                notify(n, now, "Rightsizing");
            }
        }
    }

    // Auto-scaling, with strict-deploy workloads served from a warm pool.
    for (auto& [wid, ws] : workloads_) {
        const auto& spec = *ws.spec;
        if (ws.released || !spec.autoscale.enabled || !ws.active.contains(OptimizationId::AutoScaling)) {
            ws.util_series.clear();
            continue;
        }
        const int current = alive(ws);
        const bool strict = spec.hints.deploy_time_ms < EligibilityThresholds{}.not_strict_deploy_ms;
        const auto a = opt::autoscale_tick(ws.util_series, spec.autoscale.policy, current, now, strict);
        ws.util_series.clear();
        if (a.target == current) continue;
        trace_.add(now, wid, "autoscale",
                   kv({{"from", str(current)}, {"to", str(a.target)}, {"via_pool", a.via_preprovision_pool ? "1" : "0"}}));
        publish_decision("AutoScaling", a.target > current ? "scale_out" : "scale_in", wid, a.target - current, now);
        if (a.target > current) {
            ws.last_scale_out = a.target - current;
            for (int k = current; k < a.target; ++k) {
                if (a.via_preprovision_pool && !ws.pool.empty()) {
                    const auto slot = ws.pool.back();
                    ws.pool.pop_back();
                    servers_.at(slot.server).pool -= slot.cores;
                    place_vm(ws, now, now, &slot.server);
                } else {
                    place_vm(ws, now, now + sc_.boot_time_ms);
                }
            }
        } else {
            std::vector<std::pair<TimeMs, VmId>> young;
            for (const auto& id : vms_of(wid)) {
                const auto& vm = vms_.at(id);
                if (!vm.leaving) young.emplace_back(vm.created_at_ms, id);
            }
            std::sort(young.rbegin(), young.rend());
            for (int k = 0; k < current - a.target && k < int(young.size()); ++k) {
                remove_vm(young[std::size_t(k)].second, now, "scale_in");
            }
        }
        ws.target = a.target;
    }

    // Pre-provisioned pools for strict-deploy workloads that auto-scale.
    for (auto& [wid, ws] : workloads_) {
        const auto& spec = *ws.spec;
        if (ws.released || !spec.autoscale.enabled || !ws.active.contains(OptimizationId::AutoScaling)) continue;
        const opt::PreprovisionInput in{wid, spec.hints.deploy_time_ms, ws.last_scale_out, spec.cores_per_vm};
        const auto d = opt::preprovision_policy(std::span(&in, 1), now);
        if (!d.claim) continue;
        int have = int(ws.pool.size());
        std::int64_t region_free = 0;
        for (const auto& [sid, s] : servers_) {
            if (s.spec.region == ws.region) region_free += std::int64_t(std::floor(s.free_unharvested() + 1e-9));
        }
        auto claim = *d.claim;
        claim.id = next_id();
        claim.amount = std::int64_t(d.pool_vms - have) * spec.cores_per_vm;
        if (claim.amount <= 0) continue;
        const ResourcePool pool{"capacity/" + ws.region, ResourceKind::Capacity, region_free};
        const auto g = resolve(pool, std::span(&claim, 1), sc_.seed);
        trace_.add(now, pool.name, "arbitrate",
                   kv({{"claim", str(std::int64_t(claim.id))}, {"opt", claim.optimization},
                       {"requested", str(claim.amount)}, {"granted", str(g[0].granted)}}));
        if (g[0].granted < claim.amount) continue;
        for (; have < d.pool_vms; ++have) {
            ServerState* best = nullptr;
            for (auto& [sid, s] : servers_) {
                if (s.spec.region != ws.region || s.free_unharvested() + 1e-9 < double(spec.cores_per_vm)) continue;
                if (!best || s.free_unharvested() < best->free_unharvested()) best = &s;
            }
            if (!best) break;
            best->pool += spec.cores_per_vm;
            ws.pool.push_back({best->spec.id, spec.cores_per_vm});
        }
        publish_decision("NonPreProvision", "pool", wid, std::int64_t(ws.pool.size()), now);
    }

    // Harvest VMs grow into spare cores.
    for (auto& [sid, s] : servers_) {
        const auto spare = std::int64_t(std::floor(s.free_unharvested() + 1e-9));
        if (spare <= 0) continue;
        std::vector<opt::HarvestVm> hv;
        for (const auto& [id, vm] : vms_) {
            if (vm.server != sid || vm.leaving || !vm.ready) continue;
            if (!workloads_.at(vm.workload).active.contains(OptimizationId::HarvestVMs)) continue;
            hv.push_back({id, vm.base_cores, vm.harvested, broker_->effective(id).scale_preference});
        }
        if (hv.empty()) continue;
        const auto plan = opt::harvest_rebalance(spare, hv, now);
        for (const auto& a : plan.actions) {
            vms_.at(a.vm_id).harvested += a.delta;
            s.harvested += a.delta;
            trace_.add(now, a.vm_id, "harvest", kv({{"delta", str(a.delta)}, {"cores", str(a.new_cores)}}));
        }
        for (auto n : plan.notifications) notify(std::move(n), now, "HarvestVMs");
    }

    // Frequency: over- and underclocking claims, arbitrated per VM.
    double carbon_mid = 0.0;
    {
        std::vector<double> c;
        for (const auto& [rid, r] : regions_) c.push_back(r.carbon_g_per_kwh);
        std::sort(c.begin(), c.end());
        carbon_mid = c[c.size() / 2];
    }
    std::map<VmId, std::vector<ResourceClaim>> next;
    for (const auto& [sid, s] : servers_) {
        std::vector<opt::FrequencyCandidate> oc, uc;
        for (const auto& [id, vm] : vms_) {
            if (vm.server != sid || !vm.ready || vm.leaving) continue;
            const auto& ws = workloads_.at(vm.workload);
            const double u = ws.model->vm_util_pct(id);
            opt::FrequencyCandidate c{id, vm.workload, vm.cores(), priority_of_vm(id), u > 80.0 ? 2 : 1, u, false};
            if (ws.active.contains(OptimizationId::Overclocking)) {
                c.eligible = u > EligibilityThresholds{}.overclock_min_p95_max_cpu_pct;
                oc.push_back(c);
            }
            if (ws.active.contains(OptimizationId::Underclocking)) {
                c.eligible = true;
                uc.push_back(c);
            }
        }
        if (!oc.empty()) {
            auto d = opt::overclock_decide(s.spec.power_budget_slots, s.spec.power_budget_slots, oc, now);
            for (auto& c : d.claims) {
                c.id = next_id();
                next[c.scope.front()].push_back(c);
            }
        }
        if (!uc.empty()) {
            const bool pressure = regions_.at(s.spec.region).carbon_g_per_kwh > carbon_mid;
            auto d = opt::underclock_decide(pressure, uc, now, sc_.underclock);
            for (auto& c : d.claims) {
                c.id = next_id();
                next[c.scope.front()].push_back(c);
            }
        }
    }
    std::set<VmId> touched;
    for (const auto& [id, c] : freq_claims_) touched.insert(id);
    for (const auto& [id, c] : next) touched.insert(id);
    freq_claims_ = std::move(next);
    for (const auto& id : touched) arbitrate_frequency(id, now);
}

RunResult Simulation::run() {
    setup();
    while (!queue_.empty()) {
        auto e = queue_.top();
        queue_.pop();
        if (e.t >= sc_.duration_ms) continue;
        switch (e.kind) {
            case EventKind::Tick: tick(e.t); break;
            case EventKind::Scripted: scripted(e.index, e.t); break;
            case EventKind::ApplyEviction: apply_eviction(e, e.t); break;
            case EventKind::EndCrunch: end_crunch(e.index, e.t); break;
            case EventKind::EndPower: end_power(e.index, e.t); break;
        }
    }

    for (auto& [wid, ws] : workloads_) {
        auto& m = ws.metrics;
        const auto& st = ws.model->stats();
        m.critical_evictions = st.critical_evictions;
        m.work = st.work;
        m.makespan_ms = st.makespan_ms;
        m.requests_generated = st.requests_generated;
        m.requests_completed = st.requests_completed;
        m.requests_dropped = st.requests_dropped;
        m.tasks_requeued = st.tasks_requeued;
        metrics_.total_cost += m.cost;
        metrics_.workloads.push_back(m);
    }
    for (const auto& r : trace_.rows()) ++metrics_.event_counts[r.event];
    metrics_.notice_violations = notice_violations(trace_, sc_.agent.eviction_notice_ms);

    RunResult out;
    out.metrics = std::move(metrics_);
    out.trace = std::move(trace_);
    out.broker_log = broker_->log_bytes();
    out.live_store = broker_->store();
    return out;
}

double served_ratio(const WorkloadMetrics& m) {
    return m.requests_generated > 0.0 ? m.requests_completed / m.requests_generated : 1.0;
}

}  // namespace

RunResult run(const Scenario& scenario, const RunOptions& options) {
    validate(scenario);
    auto result = Simulation(scenario).run();
    if (!options.with_baseline) {
        for (auto& w : result.metrics.workloads) w.baseline_cost = w.cost;
        result.metrics.baseline_cost = result.metrics.total_cost;
        return result;
    }
    Scenario base = scenario;
    base.optimizations = {};
    const auto b = Simulation(base).run();
    result.metrics.baseline_cost = b.metrics.total_cost;
    for (auto& w : result.metrics.workloads) {
        const auto& bw = b.metrics.workload(w.id);
        w.baseline_cost = bw.cost;
        if (w.makespan_ms && bw.makespan_ms && *bw.makespan_ms > 0) {
            w.slowdown = double(*w.makespan_ms) / double(*bw.makespan_ms);
        } else if (served_ratio(w) > 0.0) {
            w.slowdown = served_ratio(bw) / served_ratio(w);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Reports

json to_json(const MetricsReport& m) {
    json j;
    j["scenario"] = m.scenario;
    j["seed"] = m.seed;
    j["duration_ms"] = m.duration_ms;
    j["total_cost"] = m.total_cost;
    j["baseline_cost"] = m.baseline_cost;
    j["notice_violations"] = m.notice_violations;
    j["core_hours"] = m.core_hours;
    j["event_counts"] = m.event_counts;
    j["workloads"] = json::array();
    for (const auto& w : m.workloads) {
        json wj;
        wj["id"] = w.id;
        wj["model"] = w.model;
        wj["pricing"] = w.pricing;
        wj["vm_hours"] = w.vm_hours;
        wj["preemption_notices"] = w.preemption_notices;
        wj["evictions_with_notice"] = w.evictions_with_notice;
        wj["emergency_evictions"] = w.emergency_evictions;
        wj["critical_evictions"] = w.critical_evictions;
        wj["throttle_seconds"] = w.throttle_seconds;
        wj["work"] = w.work;
        wj["makespan_ms"] = w.makespan_ms ? json(*w.makespan_ms) : json(nullptr);
        wj["requests_generated"] = w.requests_generated;
        wj["requests_completed"] = w.requests_completed;
        wj["requests_dropped"] = w.requests_dropped;
        wj["tasks_requeued"] = w.tasks_requeued;
        wj["hints_published"] = w.hints_published;
        wj["hints_ignored"] = w.hints_ignored;
        wj["hints_rate_limited"] = w.hints_rate_limited;
        wj["min_vms"] = w.min_vms;
        wj["max_vms"] = w.max_vms;
        wj["slowdown"] = w.slowdown;
        wj["cost"] = w.cost;
        wj["baseline_cost"] = w.baseline_cost;
        j["workloads"].push_back(wj);
    }
    return j;
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport m;
    m.scenario = j.at("scenario").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.duration_ms = j.at("duration_ms").get<TimeMs>();
    m.total_cost = j.at("total_cost").get<double>();
    m.baseline_cost = j.at("baseline_cost").get<double>();
    m.notice_violations = j.at("notice_violations").get<int>();
    m.core_hours = j.at("core_hours").get<std::map<RegionId, double>>();
    m.event_counts = j.at("event_counts").get<std::map<std::string, std::int64_t>>();
    for (const auto& wj : j.at("workloads")) {
        WorkloadMetrics w;
        w.id = wj.at("id").get<std::string>();
        w.model = wj.at("model").get<std::string>();
        w.pricing = wj.at("pricing").get<std::string>();
        w.vm_hours = wj.at("vm_hours").get<std::map<std::string, double>>();
        w.preemption_notices = wj.at("preemption_notices").get<int>();
        w.evictions_with_notice = wj.at("evictions_with_notice").get<int>();
        w.emergency_evictions = wj.at("emergency_evictions").get<int>();
        w.critical_evictions = wj.at("critical_evictions").get<int>();
        w.throttle_seconds = wj.at("throttle_seconds").get<double>();
        w.work = wj.at("work").get<double>();
        if (!wj.at("makespan_ms").is_null()) w.makespan_ms = wj.at("makespan_ms").get<TimeMs>();
        w.requests_generated = wj.at("requests_generated").get<double>();
        w.requests_completed = wj.at("requests_completed").get<double>();
        w.requests_dropped = wj.at("requests_dropped").get<double>();
        w.tasks_requeued = wj.at("tasks_requeued").get<int>();
        w.hints_published = wj.at("hints_published").get<int>();
        w.hints_ignored = wj.at("hints_ignored").get<int>();
        w.hints_rate_limited = wj.at("hints_rate_limited").get<int>();
        w.min_vms = wj.at("min_vms").get<int>();
        w.max_vms = wj.at("max_vms").get<int>();
        w.slowdown = wj.at("slowdown").get<double>();
        w.cost = wj.at("cost").get<double>();
        w.baseline_cost = wj.at("baseline_cost").get<double>();
        m.workloads.push_back(std::move(w));
    }
    return m;
}

std::string summary_text(const MetricsReport& m) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    const double saved = m.baseline_cost > 0 ? 100.0 * (1.0 - m.total_cost / m.baseline_cost) : 0.0;
    int notices = 0, evictions = 0, emergency = 0, critical = 0;
    for (const auto& w : m.workloads) {
        notices += w.preemption_notices;
        evictions += w.evictions_with_notice;
        emergency += w.emergency_evictions;
        critical += w.critical_evictions;
    }
    os << "scenario " << m.scenario << " seed " << m.seed << ": cost " << m.total_cost << " vs baseline "
       << m.baseline_cost << " (" << saved << "% saved); evictions " << evictions << " with notice, " << emergency
       << " emergency, " << critical << " critical; notice violations " << m.notice_violations << "\n";
    for (const auto& w : m.workloads) {
        os << "  " << w.id << " [" << w.model << ", " << w.pricing << "] cost " << w.cost << " baseline "
           << w.baseline_cost << " slowdown " << std::setprecision(3) << w.slowdown << std::setprecision(2);
        if (w.makespan_ms) os << " makespan_s " << double(*w.makespan_ms) / 1000.0;
        if (w.requests_generated > 0) os << " dropped " << w.requests_dropped;
        os << "\n";
    }
    return os.str();
}

}  // namespace wi
