#include "wi/documents.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "document.hpp"

namespace wi {

using nlohmann::json;
using detail::idx;
using detail::Obj;

namespace {

OptimizationId optimization_at(const json& v, const std::string& path) {
    if (!v.is_string()) Obj::fail(path, "expected an optimization name");
    const auto id = parse_optimization(v.get<std::string>());
    if (!id) Obj::fail(path, "unknown optimization " + v.get<std::string>());
    return *id;
}

std::string name(OptimizationId id) { return std::string(to_string(id)); }

double fraction_at(const Obj& o, const std::string& key) {
    if (!o.has(key)) Obj::fail(o.at(key), "missing required field");
    const double f = o.number(key, 0.0);
    if (f < 0.0 || f > 1.0) Obj::fail(o.at(key), "must be a fraction in [0,1]");
    return f;
}

std::vector<SetFraction> parse_sets(const Obj& o, const std::string& key) {
    std::vector<SetFraction> out;
    if (!o.has(key)) return out;
    const auto& list = o.array(key);
    for (std::size_t i = 0; i < list.size(); ++i) {
        Obj e(list[i], idx(o.at(key), i));
        e.only({"set", "fraction"});
        SetFraction sf;
        const auto& set = e.array("set");
        for (std::size_t k = 0; k < set.size(); ++k) sf.set.push_back(optimization_at(set[k], idx(e.at("set"), k)));
        sf.fraction = fraction_at(e, "fraction");
        out.push_back(std::move(sf));
    }
    return out;
}

json sets_to_json(const std::vector<SetFraction>& sets) {
    json out = json::array();
    for (const auto& sf : sets) {
        json names = json::array();
        for (auto id : sf.set) names.push_back(name(id));
        out.push_back({{"set", names}, {"fraction", sf.fraction}});
    }
    return out;
}

}  // namespace

std::vector<WorkloadProfile> parse_population(const json& doc) {
    Obj o(doc, "");
    o.only({"workloads"});
    std::vector<WorkloadProfile> out;
    if (!o.has("workloads")) return out;
    const auto& list = o.array("workloads");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto path = idx("workloads", i);
        Obj w(list[i], path);
        w.only({"id", "cores", "hints", "util"});
        WorkloadProfile p;
        p.id = w.str("id", "w" + std::to_string(i));
        p.cores = w.integer("cores", 1);
        if (p.cores < 1) Obj::fail(w.at("cores"), "must be at least 1");
        p.hints = w.has("hints") ? detail::parse_hints(w.raw("hints"), w.at("hints")) : conservative_default();
        if (w.has("util")) p.util = detail::parse_util(w.raw("util"), w.at("util"), {});
        out.push_back(std::move(p));
    }
    return out;
}

json population_to_json(std::span<const WorkloadProfile> population) {
    json list = json::array();
    for (const auto& p : population) {
        json hints;
        for (const auto& [k, v] : to_field_map(p.hints)) {
            if (v == "true" || v == "false") {
                hints[k] = v == "true";
            } else {
                hints[k] = std::stoll(v);
            }
        }
        list.push_back({{"id", p.id},
                        {"cores", p.cores},
                        {"hints", hints},
                        {"util",
                         {{"p95_cpu_pct", p.util.p95_cpu_pct},
                          {"p95_max_cpu_pct", p.util.p95_max_cpu_pct},
                          {"max_cpu_pct", p.util.max_cpu_pct},
                          {"max_memory_pct", p.util.max_memory_pct},
                          {"max_disk_pct", p.util.max_disk_pct}}}});
    }
    return {{"workloads", list}};
}

JointConstraints parse_constraints(const json& doc) {
    Obj o(doc, "");
    o.only({"optimizations", "marginals", "pairwise", "scenarios"});
    JointConstraints c;
    const auto& opts = o.array("optimizations");
    for (std::size_t i = 0; i < opts.size(); ++i) {
        c.optimizations.push_back(optimization_at(opts[i], idx("optimizations", i)));
    }
    if (!o.has("marginals")) Obj::fail("marginals", "missing required field");
    const auto& marginals = o.raw("marginals");
    Obj m(marginals, "marginals");
    for (auto it = marginals.begin(); it != marginals.end(); ++it) {
        const auto id = optimization_at(json(it.key()), m.at(it.key()));
        if (std::find(c.optimizations.begin(), c.optimizations.end(), id) == c.optimizations.end()) {
            Obj::fail(m.at(it.key()), "not listed in optimizations");
        }
    }
    for (auto id : c.optimizations) c.marginals.push_back(fraction_at(m, name(id)));
    c.pairwise = parse_sets(o, "pairwise");
    c.scenarios = parse_sets(o, "scenarios");
    return c;
}

json constraints_to_json(const JointConstraints& c) {
    json opts = json::array();
    json marg = json::object();
    for (std::size_t i = 0; i < c.optimizations.size(); ++i) {
        opts.push_back(name(c.optimizations[i]));
        marg[name(c.optimizations[i])] = c.marginals.at(i);
    }
    return {{"optimizations", opts},
            {"marginals", marg},
            {"pairwise", sets_to_json(c.pairwise)},
            {"scenarios", sets_to_json(c.scenarios)}};
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DocumentError(path, "cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DocumentError("<root>", std::string("not valid JSON: ") + e.what());
    }
}

json to_json(const SavingsReport& r) {
    json contrib = json::array();
    for (auto id : r.order) contrib.push_back({{"optimization", name(id)}, {"pp", r.contribution(id)}});
    return {{"total_pct", r.total_pct},
            {"regular_cost", r.regular_cost},
            {"discounted_cost", r.discounted_cost},
            {"contributions", contrib}};
}

SavingsReport savings_from_json(const json& j) {
    SavingsReport r;
    r.total_pct = j.at("total_pct").get<double>();
    r.regular_cost = j.at("regular_cost").get<double>();
    r.discounted_cost = j.at("discounted_cost").get<double>();
    for (const auto& c : j.at("contributions")) {
        const auto id = parse_optimization(c.at("optimization").get<std::string>());
        if (!id) throw DocumentError("contributions", "unknown optimization");
        r.order.push_back(*id);
        r.contribution_pp[*id] = c.at("pp").get<double>();
    }
    return r;
}

std::string savings_csv(const SavingsReport& r) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "optimization,contribution_pp\n";
    for (auto id : r.order) os << to_string(id) << ',' << r.contribution(id) << '\n';
    os << "total," << r.total_pct << '\n';
    return os.str();
}

json to_json(const CarbonReport& r) {
    json contrib = json::object();
    for (const auto& [id, pp] : r.contribution_pp) contrib[name(id)] = pp;
    return {{"baseline_g", r.baseline_g},
            {"optimized_g", r.optimized_g},
            {"reduction_pct", r.reduction_pct},
            {"contributions", contrib}};
}

json to_json(const JointEstimate& e) {
    return {{"min_savings", e.min_savings},
            {"max_savings", e.max_savings},
            {"independence_savings", e.independence_savings},
            {"width", e.width()},
            {"constraint_rows", e.constraint_rows},
            {"joint", e.joint}};
}

}  // namespace wi
