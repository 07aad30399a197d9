#include "wi/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wi {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::mt19937_64 seeded(std::uint64_t seed, std::string_view id) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(fnv1a(id)),
                      std::uint32_t(fnv1a(id) >> 32)};
    return std::mt19937_64(seq);
}

double diurnal(double trough, double peak, TimeMs t, TimeMs period) {
    const double phase = 2.0 * std::numbers::pi * double(t % period) / double(period);
    return trough + (peak - trough) * 0.5 * (1.0 - std::cos(phase));
}

const VmView* find_view(std::span<const VmView> vms, const VmId& id) {
    for (const auto& v : vms) {
        if (v.id == id) return &v;
    }
    return nullptr;
}

}  // namespace

WorkloadModel::WorkloadModel(const WorkloadSpec& spec, std::uint64_t seed)
    : spec_(spec), rng_(seeded(seed, spec.id)) {}

void WorkloadModel::on_vm_added(const VmView&, TimeMs) {}

void WorkloadModel::on_vm_removed(const VmId& vm, TimeMs) {
    draining_.erase(vm);
    forget(vm);
}

void WorkloadModel::on_notification(const PlatformNotification& n, TimeMs) {
    if (is_eviction_kind(n.kind)) draining_.insert(n.vm_id);
}

std::vector<RuntimeHint> WorkloadModel::take_hints(TimeMs now_ms) {
    std::vector<RuntimeHint> out;
    if (!spec_.runtime_hints) {
        desired_.clear();
        return out;
    }
    for (const auto& [key, value] : desired_) {
        auto it = sent_.find(key);
        if (it != sent_.end() && it->second == value) continue;
        sent_[key] = value;
        RuntimeHint h;
        h.vm_id = key.first;
        h.kind = key.second;
        h.value = value;
        h.timestamp_ms = now_ms;
        out.push_back(std::move(h));
    }
    return out;
}

void WorkloadModel::forget(const VmId& vm) {
    for (auto* m : {&desired_, &sent_}) {
        for (auto it = m->begin(); it != m->end();) {
            it = it->first.first == vm ? m->erase(it) : std::next(it);
        }
    }
}

std::unique_ptr<WorkloadModel> make_model(const WorkloadSpec& spec, std::uint64_t seed) {
    switch (spec.model) {
        case WorkloadModelKind::BatchAnalytics: return std::make_unique<BatchModel>(spec, seed);
        case WorkloadModelKind::Microservices: return std::make_unique<MicroservicesModel>(spec, seed);
        case WorkloadModelKind::VideoConference: return std::make_unique<VideoConfModel>(spec, seed);
    }
    throw Error("unknown workload model");
}

// ---------------------------------------------------------------------------
// Batch

BatchModel::BatchModel(const WorkloadSpec& spec, std::uint64_t seed) : WorkloadModel(spec, seed) {
    const double j = spec.batch.task_ms_jitter;
    std::uniform_real_distribution<double> jitter(1.0 - j, 1.0 + j);
    for (const auto& js : spec.batch.jobs) {
        Job job;
        job.arrival_ms = js.arrival_ms;
        for (const auto& st : js.stages) {
            const double f = j > 0.0 ? jitter(rng_) : 1.0;
            job.stage_ms.push_back(std::max<TimeMs>(1, std::llround(double(st.task_ms) * f)));
        }
        job.master = containers_.size();
        Container m;
        m.job = jobs_.size();
        m.master = true;
        containers_.push_back(m);
        jobs_.push_back(std::move(job));
    }
}

void BatchModel::on_vm_added(const VmView& vm, TimeMs) {
    rank_[vm.id] = rng_();
    slots_[vm.id] = vm.cores;
    used_[vm.id] = 0;
}

void BatchModel::requeue(std::size_t c, TimeMs) {
    auto& ct = containers_[c];
    if (!ct.vm || ct.done) return;
    --used_[*ct.vm];
    ct.vm.reset();
    ct.progress_ms = ct.checkpoint_ms;
    if (!ct.master) ++stats_.tasks_requeued;
}

void BatchModel::on_notification(const PlatformNotification& n, TimeMs now_ms) {
    WorkloadModel::on_notification(n, now_ms);
    if (!is_eviction_kind(n.kind) || !slots_.count(n.vm_id)) return;
    if (critical(n.vm_id, now_ms)) {
        critical_at_notice_.insert(n.vm_id);
        ++stats_.high_priority_notices;
    }
    // Drain: tasks go back to the queue; a master restarts elsewhere and
    // takes its job's running tasks down with it.
    for (std::size_t c = 0; c < containers_.size(); ++c) {
        auto& ct = containers_[c];
        if (ct.done || ct.vm != n.vm_id) continue;
        if (ct.master) {
            ++stats_.am_restarts;
            jobs_[ct.job].master_delay_ms = spec_.batch.am_restart_ms;
            for (std::size_t t = 0; t < containers_.size(); ++t) {
                if (!containers_[t].master && containers_[t].job == ct.job) requeue(t, now_ms);
            }
        }
        requeue(c, now_ms);
    }
}

void BatchModel::on_vm_removed(const VmId& vm, TimeMs now_ms) {
    if (critical_at_notice_.erase(vm)) ++stats_.critical_evictions;
    for (std::size_t c = 0; c < containers_.size(); ++c) {
        if (containers_[c].vm == vm) {
            if (containers_[c].master) {
                ++stats_.am_restarts;
                jobs_[containers_[c].job].master_delay_ms = spec_.batch.am_restart_ms;
            }
            requeue(c, now_ms);
        }
    }
    slots_.erase(vm);
    used_.erase(vm);
    rank_.erase(vm);
    WorkloadModel::on_vm_removed(vm, now_ms);
}

void BatchModel::start_stage(std::size_t j, TimeMs) {
    auto& job = jobs_[j];
    const auto& st = spec_.batch.jobs[j].stages[job.stage];
    job.stage_remaining = st.tasks;
    for (int k = 0; k < st.tasks; ++k) {
        Container c;
        c.job = j;
        c.duration_ms = job.stage_ms[job.stage];
        containers_.push_back(c);
    }
}

void BatchModel::schedule(std::span<const VmView> vms, TimeMs now_ms) {
    auto master_up = [&](const Job& job) {
        const auto& m = containers_[job.master];
        return m.vm.has_value() && m.runs_from_ms <= now_ms;
    };
    // Masters first, then tasks, each in creation order.
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < containers_.size(); ++c) {
            auto& ct = containers_[c];
            if (ct.done || ct.vm || ct.master != (pass == 0)) continue;
            const auto& job = jobs_[ct.job];
            if (!job.started || job.completed_ms) continue;
            if (!ct.master && !master_up(job)) continue;

            const VmView* best = nullptr;
            std::int64_t best_free = 0;
            for (const auto& v : vms) {
                if (!v.ready || draining(v.id) || !slots_.count(v.id)) continue;
                const auto free = slots_[v.id] - used_[v.id];
                if (free < 1) continue;
                if (!best || free < best_free || (free == best_free && rank_[v.id] < rank_[best->id])) {
                    best = &v;
                    best_free = free;
                }
            }
            if (!best) return;
            ct.vm = best->id;
            ++used_[best->id];
            ct.runs_from_ms = now_ms + spec_.batch.container_start_ms;
            if (ct.master) {
                ct.runs_from_ms += jobs_[ct.job].master_delay_ms;
                jobs_[ct.job].master_delay_ms = 0;
            }
        }
    }
}

void BatchModel::step(std::span<const VmView> vms, TimeMs now_ms, TimeMs dt_ms) {
    for (const auto& v : vms) {
        if (!slots_.count(v.id)) continue;
        slots_[v.id] = v.cores;
        // Shrunk below its load: newest tasks leave first.
        while (used_[v.id] > slots_[v.id]) {
            std::optional<std::size_t> victim;
            for (std::size_t c = 0; c < containers_.size(); ++c) {
                const auto& ct = containers_[c];
                if (ct.done || ct.master || ct.vm != v.id) continue;
                if (!victim || ct.runs_from_ms >= containers_[*victim].runs_from_ms) victim = c;
            }
            if (!victim) break;
            requeue(*victim, now_ms);
        }
    }

    for (std::size_t j = 0; j < jobs_.size(); ++j) {
        auto& job = jobs_[j];
        if (!job.started && job.arrival_ms <= now_ms) {
            job.started = true;
            start_stage(j, now_ms);
        }
    }

    schedule(vms, now_ms);

    const TimeMs end = now_ms + dt_ms;
    const auto ckpt = double(spec_.batch.checkpoint_interval_ms);
    for (std::size_t c = 0; c < containers_.size(); ++c) {
        auto& ct = containers_[c];
        if (ct.done || ct.master || !ct.vm || ct.runs_from_ms >= end) continue;
        const VmView* v = find_view(vms, *ct.vm);
        const double speed = v ? v->speed : 0.0;
        if (speed <= 0.0) continue;
        const TimeMs from = std::max(now_ms, ct.runs_from_ms);
        const double avail = double(end - from) * speed;
        const double left = double(ct.duration_ms) - ct.progress_ms;
        if (avail >= left) {
            stats_.work += left / 1000.0;
            ct.progress_ms = double(ct.duration_ms);
            ct.done = true;
            --used_[*ct.vm];
            auto& job = jobs_[ct.job];
            const auto finish = from + TimeMs(std::ceil(left / speed));
            if (--job.stage_remaining == 0) {
                if (job.stage + 1 < job.stage_ms.size()) {
                    ++job.stage;
                    start_stage(ct.job, finish);
                } else {
                    job.completed_ms = finish;
                    auto& m = containers_[job.master];
                    if (m.vm) --used_[*m.vm];
                    m.done = true;
                    m.vm.reset();
                }
            }
        } else {
            stats_.work += avail / 1000.0;
            ct.progress_ms += avail;
            ct.checkpoint_ms = std::floor(ct.progress_ms / ckpt) * ckpt;
        }
    }

    if (finished() && !stats_.makespan_ms && !jobs_.empty()) {
        TimeMs first = jobs_.front().arrival_ms;
        TimeMs last = 0;
        for (const auto& job : jobs_) {
            first = std::min(first, job.arrival_ms);
            last = std::max(last, *job.completed_ms);
        }
        stats_.makespan_ms = last - first;
    }

    for (const auto& v : vms) {
        if (slots_.count(v.id)) want(v.id, HintKind::PreemptionPriority, std::int64_t(priority(v.id, end)));
    }
}

bool BatchModel::finished() const {
    return std::all_of(jobs_.begin(), jobs_.end(), [](const Job& j) { return j.completed_ms.has_value(); });
}

int BatchModel::containers_on(const VmId& vm) const {
    auto it = used_.find(vm);
    return it == used_.end() ? 0 : it->second;
}

bool BatchModel::critical(const VmId& vm, TimeMs now_ms) const {
    for (const auto& ct : containers_) {
        if (ct.done || ct.vm != vm) continue;
        if (ct.master) return true;
        if (now_ms - ct.runs_from_ms > spec_.batch.critical_age_ms) return true;
    }
    return false;
}

PreemptionPriority BatchModel::priority(const VmId& vm, TimeMs now_ms) const {
    if (critical(vm, now_ms)) return PreemptionPriority::High;
    return containers_on(vm) == 0 ? PreemptionPriority::Low : PreemptionPriority::Normal;
}

double BatchModel::vm_util_pct(const VmId& vm) const {
    auto s = slots_.find(vm);
    if (s == slots_.end() || s->second <= 0) return 0.0;
    return std::min(100.0, 100.0 * containers_on(vm) / double(s->second));
}

// ---------------------------------------------------------------------------
// Microservices

MicroservicesModel::MicroservicesModel(const WorkloadSpec& spec, std::uint64_t seed) : WorkloadModel(spec, seed) {}

double MicroservicesModel::rps(TimeMs t) const {
    return diurnal(spec_.micro.trough_rps, spec_.micro.peak_rps, t, spec_.micro.period_ms);
}

int MicroservicesModel::pods_on(const VmId& vm) const {
    auto it = pods_.find(vm);
    return it == pods_.end() ? 0 : it->second;
}

void MicroservicesModel::on_vm_removed(const VmId& vm, TimeMs now_ms) {
    pods_.erase(vm);
    cap_.erase(vm);
    util_cache_.erase(vm);
    WorkloadModel::on_vm_removed(vm, now_ms);
}

void MicroservicesModel::rebalance(std::span<const VmView> vms, int wanted) {
    std::vector<VmId> active;
    for (const auto& v : vms) {
        if (v.ready && !draining(v.id)) active.push_back(v.id);
    }
    auto headroom = [&](const VmId& id) { return cap_[id] - pods_[id]; };
    auto least_loaded = [&]() -> const VmId* {
        const VmId* best = nullptr;
        for (const auto& id : active) {
            if (headroom(id) <= 0) continue;
            if (!best || pods_[id] < pods_[*best]) best = &id;
        }
        return best;
    };

    // Drain nodes that are leaving or not serving.
    for (const auto& v : vms) {
        if (v.ready && !draining(v.id)) continue;
        while (pods_[v.id] > 0) {
            const auto* to = least_loaded();
            if (!to) break;
            --pods_[v.id];
            ++pods_[*to];
        }
    }

    int total = 0;
    for (const auto& [id, n] : pods_) total += n;
    while (total < wanted) {
        const auto* to = least_loaded();
        if (!to) break;
        ++pods_[*to];
        ++total;
    }
    while (total > wanted) {
        VmId* from = nullptr;
        for (auto& id : active) {
            if (pods_[id] > 0 && (!from || pods_[id] >= pods_[*from])) from = &id;
        }
        if (!from) break;
        --pods_[*from];
        --total;
    }
}

void MicroservicesModel::step(std::span<const VmView> vms, TimeMs now_ms, TimeMs dt_ms) {
    const auto& p = spec_.micro;
    for (const auto& v : vms) {
        pods_[v.id];
        cap_[v.id] = v.ready ? std::max<std::int64_t>(1, p.pods_per_node * v.cores / std::max<std::int64_t>(1, v.base_cores))
                             : 0;
    }
    const double load = rps(now_ms);
    const int wanted = int(std::ceil(load / p.rps_per_pod - 1e-9));
    rebalance(vms, wanted);

    double capacity = 0.0;
    int pods = 0;
    for (const auto& v : vms) {
        if (!v.ready) continue;
        capacity += double(pods_[v.id]) * p.rps_per_pod * v.speed;
        pods += pods_[v.id];
    }
    const double secs = double(dt_ms) / 1000.0;
    const double generated = load * secs;
    const double served = std::min(generated, capacity * secs);
    stats_.requests_generated += generated;
    stats_.requests_completed += served;
    stats_.requests_dropped += generated - served;
    stats_.work += served / p.rps_per_pod * double(spec_.cores_per_vm) / double(p.pods_per_node);

    const double pod_busy = pods > 0 ? std::min(1.0, load / (double(pods) * p.rps_per_pod)) : 0.0;
    for (auto& [id, u] : util_cache_) u = 0.0;
    for (const auto& v : vms) {
        const auto nominal = double(p.pods_per_node) * double(v.cores) / double(std::max<std::int64_t>(1, v.base_cores));
        util_cache_[v.id] = nominal > 0 ? std::min(100.0, 100.0 * pods_[v.id] * pod_busy / nominal) : 0.0;
    }

    // Anchor: the oldest serving node keeps the cluster alive.
    const VmView* anchor = nullptr;
    for (const auto& v : vms) {
        if (!v.ready || draining(v.id)) continue;
        if (!anchor || v.created_at_ms < anchor->created_at_ms ||
            (v.created_at_ms == anchor->created_at_ms && v.id < anchor->id)) {
            anchor = &v;
        }
    }
    anchor_ = anchor ? anchor->id : VmId{};
    const bool rising = rps(now_ms + dt_ms) > load;
    for (const auto& v : vms) {
        if (!v.ready) continue;
        want(v.id, HintKind::Preemptibility, preemptibility_hint(v.id));
        want(v.id, HintKind::ScalePreference,
             std::int64_t(rising ? ScalePreference::PreferGrow : ScalePreference::Neutral));
    }
}

std::int64_t MicroservicesModel::preemptibility_hint(const VmId& vm) const {
    if (vm == anchor_) return 0;
    auto c = cap_.find(vm);
    if (c != cap_.end() && pods_on(vm) >= c->second) return 0;
    return 100;
}

double MicroservicesModel::vm_util_pct(const VmId& vm) const {
    auto it = util_cache_.find(vm);
    return it == util_cache_.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------------------
// Video conferencing

VideoConfModel::VideoConfModel(const WorkloadSpec& spec, std::uint64_t seed) : WorkloadModel(spec, seed) {}

double VideoConfModel::plateau(TimeMs t) const {
    return diurnal(spec_.conf.trough_calls, spec_.conf.peak_calls, t, spec_.conf.period_ms);
}

double VideoConfModel::calls(TimeMs t) const {
    constexpr TimeMs hour = 3'600'000;
    constexpr TimeMs half = hour / 2;
    const TimeMs in_half = (t % hour) % half;
    const bool spike = in_half < spec_.conf.spike_duration_ms;
    return plateau(t) * (spike ? 1.0 + spec_.conf.spike_amplitude : 1.0);
}

void VideoConfModel::on_vm_removed(const VmId& vm, TimeMs now_ms) {
    util_.erase(vm);
    WorkloadModel::on_vm_removed(vm, now_ms);
}

void VideoConfModel::step(std::span<const VmView> vms, TimeMs now_ms, TimeMs dt_ms) {
    const auto& p = spec_.conf;
    double capacity = 0.0;
    for (const auto& v : vms) {
        if (!v.ready || draining(v.id)) continue;
        capacity += p.calls_per_vm * double(v.cores) / double(spec_.cores_per_vm) * v.speed;
    }
    const double load = calls(now_ms);
    const double secs = double(dt_ms) / 1000.0;
    const double served = std::min(load, capacity);
    stats_.requests_generated += load * secs;
    stats_.requests_completed += served * secs;
    stats_.requests_dropped += (load - served) * secs;
    stats_.work += served * secs * double(spec_.cores_per_vm) / p.calls_per_vm;

    const double util = capacity > 0.0 ? std::min(100.0, 100.0 * load / capacity) : 0.0;
    for (const auto& v : vms) {
        const bool serving = v.ready && !draining(v.id);
        util_[v.id] = serving ? util : 0.0;
        if (!v.ready) continue;
        const auto pr = serving && util > p.high_load_pct ? PreemptionPriority::High : PreemptionPriority::Normal;
        want(v.id, HintKind::PreemptionPriority, std::int64_t(pr));
    }
}

double VideoConfModel::vm_util_pct(const VmId& vm) const {
    auto it = util_.find(vm);
    return it == util_.end() ? 0.0 : it->second;
}

}  // namespace wi
