#include "wi/types.hpp"

namespace wi {

namespace {
constexpr std::array<std::string_view, kBuiltinOptimizationCount> kOptimizationNames = {
    "OnDemand",       "MADC",          "Rightsizing",  "Oversubscription",
    "AutoScaling",    "NonPreProvision", "RegionAgnostic", "Underclocking",
    "Overclocking",   "SpotVMs",       "HarvestVMs",
};
}  // namespace

std::string_view to_string(OptimizationId id) {
    return kOptimizationNames[static_cast<std::size_t>(id)];
}

std::optional<OptimizationId> parse_optimization(std::string_view name) {
    for (std::size_t i = 0; i < kOptimizationNames.size(); ++i) {
        if (kOptimizationNames[i] == name) return static_cast<OptimizationId>(i);
    }
    return std::nullopt;
}

std::vector<OptimizationId> OptimizationSet::members() const {
    std::vector<OptimizationId> out;
    for (auto id : kAllOptimizations) {
        if (contains(id)) out.push_back(id);
    }
    return out;
}

std::string to_string(OptimizationSet set) {
    std::string out = "{";
    bool first = true;
    for (auto id : set.members()) {
        if (!first) out += ",";
        out += to_string(id);
        first = false;
    }
    out += "}";
    return out;
}

std::string_view to_string(PreemptionPriority p) {
    switch (p) {
        case PreemptionPriority::Low: return "Low";
        case PreemptionPriority::Normal: return "Normal";
        case PreemptionPriority::High: return "High";
    }
    return "?";
}

std::string_view to_string(ScalePreference p) {
    switch (p) {
        case ScalePreference::PreferGrow: return "PreferGrow";
        case ScalePreference::Neutral: return "Neutral";
        case ScalePreference::PreferShrink: return "PreferShrink";
    }
    return "?";
}

std::optional<PreemptionPriority> parse_preemption_priority(std::string_view s) {
    if (s == "Low") return PreemptionPriority::Low;
    if (s == "Normal") return PreemptionPriority::Normal;
    if (s == "High") return PreemptionPriority::High;
    return std::nullopt;
}

std::optional<ScalePreference> parse_scale_preference(std::string_view s) {
    if (s == "PreferGrow") return ScalePreference::PreferGrow;
    if (s == "Neutral") return ScalePreference::Neutral;
    if (s == "PreferShrink") return ScalePreference::PreferShrink;
    return std::nullopt;
}

}  // namespace wi
