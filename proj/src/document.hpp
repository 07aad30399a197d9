#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "wi/hints.hpp"
#include "wi/scenario.hpp"

namespace wi::detail {

// Typed access to one JSON object; every failure carries the full path.
class Obj {
public:
    Obj(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& why) {
        throw DocumentError(path.empty() ? "<root>" : path, why);
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    /// Rejects keys outside `allowed` so typos do not pass silently.
    void only(std::initializer_list<const char*> allowed) const {
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!ok.count(it.key())) fail(at(it.key()), "unknown field");
        }
    }

    const nlohmann::json& raw(const std::string& key) const { return j_.at(key); }

    std::string str(const std::string& key) const {
        const auto& v = need(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string str(const std::string& key, const std::string& dflt) const { return has(key) ? str(key) : dflt; }

    std::int64_t integer(const std::string& key) const {
        const auto& v = need(key);
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        return v.get<std::int64_t>();
    }
    std::int64_t integer(const std::string& key, std::int64_t dflt) const { return has(key) ? integer(key) : dflt; }

    double number(const std::string& key, double dflt) const {
        if (!has(key)) return dflt;
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        return v.get<double>();
    }

    bool boolean(const std::string& key, bool dflt) const {
        if (!has(key)) return dflt;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) fail(at(key), "expected true or false");
        return v.get<bool>();
    }

    const nlohmann::json& array(const std::string& key) const {
        const auto& v = need(key);
        if (!v.is_array()) fail(at(key), "expected a list");
        return v;
    }

private:
    const nlohmann::json& need(const std::string& key) const {
        if (!has(key)) fail(at(key), "missing required field");
        return j_.at(key);
    }

    const nlohmann::json& j_;
    std::string path_;
};

std::string idx(const std::string& path, std::size_t i);
HintSet parse_hints(const nlohmann::json& j, const std::string& path);
UtilStats parse_util(const nlohmann::json& j, const std::string& path, UtilStats u);

}  // namespace wi::detail
