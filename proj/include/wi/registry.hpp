#pragma once

// Optimization onboarding: managed resources, arbitration priority, owner
// benefit, pricing rule, and the hints each optimization consumes/publishes.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wi/arbiter.hpp"
#include "wi/hints.hpp"
#include "wi/types.hpp"

namespace wi {

enum class WiringAction : std::uint8_t { ConsumeDeployment, ConsumeRuntime, PublishRuntime };

/// One line of an optimization's hint wiring, e.g. {ConsumeRuntime,
/// "preemption"} renders as "Consume runtime preemption priority."
struct HintWiring {
    WiringAction action;
    std::string subject;

    bool operator==(const HintWiring&) const = default;
};

std::string to_string(const HintWiring& w);

/// Notification kinds a PublishRuntime subject permits.
std::vector<NotificationKind> notification_kinds_for(std::string_view subject);

enum class PricingRule : std::uint8_t {
    Regular,            // pays the regular price
    Factor,             // fixed fraction of the regular price
    RunningVms,         // pays for VMs actually running
    SpotPlusHarvested,  // Spot price plus harvested cores at the Spot rate
    RegularPlusOcTime,  // regular price plus overclocked core-hours
    RegionPrice,        // price factor of the hosting region
    RightsizedVm,       // price of the resized VM
};

struct OptimizationDescriptor {
    std::string name;
    int priority = 0;
    std::vector<std::string> resources;  // ResourceKind names
    double owner_benefit = 0.0;          // average fractional cost reduction
    PricingRule pricing = PricingRule::Regular;
    double price_factor = 1.0;           // for PricingRule::Factor
    std::string cost_model;
    std::vector<HintWiring> wiring;
};

struct RegisteredOptimization {
    OptimizationDescriptor descriptor;
    std::vector<ResourceKind> resources;
};

class RegistryError : public Error {
public:
    using Error::Error;
};
class DuplicatePriority : public RegistryError {
public:
    using RegistryError::RegistryError;
};
class UnknownResourceKind : public RegistryError {
public:
    using RegistryError::RegistryError;
};

class OptimizationRegistry {
public:
    const RegisteredOptimization& onboard(OptimizationDescriptor descriptor);

    const RegisteredOptimization* find(std::string_view name) const;
    const RegisteredOptimization& at(std::string_view name) const;

    /// Registered optimizations in ascending priority.
    std::vector<const RegisteredOptimization*> by_priority() const;

    int priority(std::string_view name) const { return at(name).descriptor.priority; }

    bool may_publish(std::string_view name, NotificationKind kind) const;

    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, RegisteredOptimization, std::less<>> entries_;
    std::set<int> priorities_;
};

/// Descriptor of a built-in optimization (pricing per the platform price
/// list, wiring per the optimization's hint extensions).
OptimizationDescriptor builtin_descriptor(OptimizationId id);

/// A registry holding On-demand plus the ten built-in optimizations, each
/// registered through onboard().
OptimizationRegistry builtin_registry();

}  // namespace wi
