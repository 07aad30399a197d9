#include "document.hpp"

namespace wi {

using nlohmann::json;

DocumentError::DocumentError(std::string path, std::string reason)
    : Error(path + ": " + reason), path_(std::move(path)), reason_(std::move(reason)) {}

namespace detail {

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

HintSet parse_hints(const json& j, const std::string& path) {
    Obj o(j, path);
    FieldMap raw;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& v = it.value();
        if (v.is_boolean()) {
            raw[it.key()] = v.get<bool>() ? "true" : "false";
        } else if (v.is_number_integer()) {
            raw[it.key()] = std::to_string(v.get<std::int64_t>());
        } else {
            Obj::fail(o.at(it.key()), "expected an integer or boolean");
        }
    }
    try {
        return validate(raw);
    } catch (const ValidationError& e) {
        const auto& first = e.errors().front();
        Obj::fail(o.at(first.field), first.reason);
    }
}

UtilStats parse_util(const json& j, const std::string& path, UtilStats u) {
    Obj o(j, path);
    o.only({"p95_cpu_pct", "p95_max_cpu_pct", "max_cpu_pct", "max_memory_pct", "max_disk_pct"});
    u.p95_cpu_pct = o.number("p95_cpu_pct", u.p95_cpu_pct);
    u.p95_max_cpu_pct = o.number("p95_max_cpu_pct", u.p95_max_cpu_pct);
    u.max_cpu_pct = o.number("max_cpu_pct", u.max_cpu_pct);
    u.max_memory_pct = o.number("max_memory_pct", u.max_memory_pct);
    u.max_disk_pct = o.number("max_disk_pct", u.max_disk_pct);
    try {
        validate_util(u);
    } catch (const ValidationError& e) {
        Obj::fail(o.at(e.errors().front().field), e.errors().front().reason);
    }
    return u;
}

}  // namespace detail
}  // namespace wi
