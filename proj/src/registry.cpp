#include "wi/registry.hpp"

#include <algorithm>

namespace wi {

std::string to_string(const HintWiring& w) {
    switch (w.action) {
        case WiringAction::ConsumeDeployment: return "Consume deployment " + w.subject + " hints.";
        case WiringAction::ConsumeRuntime: return "Consume runtime " + w.subject + " priority.";
        case WiringAction::PublishRuntime: return "Publish runtime " + w.subject + " notification.";
    }
    return {};
}

std::vector<NotificationKind> notification_kinds_for(std::string_view subject) {
    if (subject == "preemption") return {NotificationKind::Preemption};
    if (subject == "scale up/down") return {NotificationKind::ScaleUp, NotificationKind::ScaleDown};
    if (subject == "scale up") return {NotificationKind::ScaleUp};
    if (subject == "scale down") return {NotificationKind::ScaleDown};
    return {};
}

const RegisteredOptimization& OptimizationRegistry::onboard(OptimizationDescriptor d) {
    if (d.name.empty()) throw RegistryError("optimization name must not be empty");
    if (entries_.count(d.name)) throw RegistryError("optimization '" + d.name + "' already registered");
    if (priorities_.count(d.priority)) {
        throw DuplicatePriority("priority " + std::to_string(d.priority) + " already used");
    }
    if (d.priority < 0) throw RegistryError("priority must be >= 0");
    if (!(d.owner_benefit >= 0.0 && d.owner_benefit < 1.0)) {
        throw RegistryError("owner benefit of '" + d.name + "' must be in [0,1)");
    }

    RegisteredOptimization reg;
    for (const auto& r : d.resources) {
        auto kind = parse_resource_kind(r);
        if (!kind) throw UnknownResourceKind("unknown resource kind '" + r + "'");
        reg.resources.push_back(*kind);
    }
    for (const auto& w : d.wiring) {
        if (w.action == WiringAction::PublishRuntime && notification_kinds_for(w.subject).empty()) {
            throw RegistryError("'" + d.name + "' publishes unknown notification '" + w.subject + "'");
        }
    }
    priorities_.insert(d.priority);
    reg.descriptor = std::move(d);
    auto name = reg.descriptor.name;
    return entries_.emplace(std::move(name), std::move(reg)).first->second;
}

const RegisteredOptimization* OptimizationRegistry::find(std::string_view name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

const RegisteredOptimization& OptimizationRegistry::at(std::string_view name) const {
    if (const auto* r = find(name)) return *r;
    throw RegistryError("unknown optimization '" + std::string(name) + "'");
}

std::vector<const RegisteredOptimization*> OptimizationRegistry::by_priority() const {
    std::vector<const RegisteredOptimization*> out;
    for (const auto& [_, r] : entries_) out.push_back(&r);
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) {
        return a->descriptor.priority < b->descriptor.priority;
    });
    return out;
}

bool OptimizationRegistry::may_publish(std::string_view name, NotificationKind kind) const {
    const auto* r = find(name);
    if (!r) return false;
    for (const auto& w : r->descriptor.wiring) {
        if (w.action != WiringAction::PublishRuntime) continue;
        auto kinds = notification_kinds_for(w.subject);
        if (std::find(kinds.begin(), kinds.end(), kind) != kinds.end()) return true;
    }
    return false;
}

namespace {
HintWiring dep(std::string s) { return {WiringAction::ConsumeDeployment, std::move(s)}; }
HintWiring rt(std::string s) { return {WiringAction::ConsumeRuntime, std::move(s)}; }
HintWiring pub(std::string s) { return {WiringAction::PublishRuntime, std::move(s)}; }
}  // namespace

OptimizationDescriptor builtin_descriptor(OptimizationId id) {
    OptimizationDescriptor d;
    d.name = std::string(to_string(id));
    d.priority = priority_of(id);
    switch (id) {
        case OptimizationId::OnDemand:
            d.resources = {"SpareCompute", "Capacity"};
            d.cost_model = "regular VM price";
            break;
        case OptimizationId::MADC:
            d.resources = {"CpuFrequency"};
            d.owner_benefit = 0.40;
            d.pricing = PricingRule::Factor;
            d.price_factor = 0.60;
            d.cost_model = "infrastructure cost";
            d.wiring = {dep("scale up/down"), dep("preemptible"), pub("scale down"), pub("preemption")};
            break;
        case OptimizationId::Rightsizing:
            d.resources = {"Capacity"};
            d.owner_benefit = 0.50;
            d.pricing = PricingRule::RightsizedVm;
            d.cost_model = "compute allocation";
            d.wiring = {dep("scale up/down"), dep("delay tolerance")};
            break;
        case OptimizationId::Oversubscription:
            d.resources = {"Capacity"};
            d.owner_benefit = 0.15;
            d.pricing = PricingRule::Factor;
            d.price_factor = 0.85;
            d.cost_model = "compute allocation";
            d.wiring = {dep("scale up/down"), dep("delay tolerance"), rt("scale down")};
            break;
        case OptimizationId::AutoScaling:
            d.resources = {"Capacity"};
            d.owner_benefit = 0.19;
            d.pricing = PricingRule::RunningVms;
            d.cost_model = "compute allocation";
            d.wiring = {dep("scale in/out")};
            break;
        case OptimizationId::NonPreProvision:
            d.resources = {"SpareCompute", "Capacity"};
            d.owner_benefit = 0.02;
            d.pricing = PricingRule::Factor;
            d.price_factor = 0.98;
            d.cost_model = "compute allocation";
            d.wiring = {dep("deployment time")};
            break;
        case OptimizationId::RegionAgnostic:
            d.resources = {"RegionSlot"};
            d.owner_benefit = 0.22;
            d.pricing = PricingRule::RegionPrice;
            d.cost_model = "efficient region";
            d.wiring = {dep("locality")};
            break;
        case OptimizationId::Underclocking:
            d.resources = {"CpuFrequency"};
            d.owner_benefit = 0.01;
            d.pricing = PricingRule::Factor;
            d.price_factor = 0.99;
            d.cost_model = "power, energy";
            d.wiring = {dep("scale up/down"), rt("scale down"), pub("scale down")};
            break;
        case OptimizationId::Overclocking:
            d.resources = {"CpuFrequency"};
            d.owner_benefit = 0.11;
            d.pricing = PricingRule::RegularPlusOcTime;
            d.cost_model = "reliability, power/energy";
            d.wiring = {dep("scale up/down"), rt("scale up"), pub("scale up")};
            break;
        case OptimizationId::SpotVMs:
            d.resources = {"SpareCompute"};
            d.owner_benefit = 0.85;
            d.pricing = PricingRule::Factor;
            d.price_factor = 0.15;
            d.cost_model = "compute allocation";
            d.wiring = {dep("preemptible"), rt("preemption"), pub("preemption")};
            break;
        case OptimizationId::HarvestVMs:
            d.resources = {"SpareCompute"};
            d.owner_benefit = 0.91;
            d.pricing = PricingRule::SpotPlusHarvested;
            d.cost_model = "compute allocation";
            d.wiring = {dep("preemptible"), rt("preemption"), pub("preemption"),
                        rt("scale up/down"), pub("scale up/down")};
            break;
    }
    return d;
}

OptimizationRegistry builtin_registry() {
    OptimizationRegistry reg;
    for (auto id : kAllOptimizations) reg.onboard(builtin_descriptor(id));
    return reg;
}

}  // namespace wi
