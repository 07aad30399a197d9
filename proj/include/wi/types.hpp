#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wi {

/// Logical simulation time in milliseconds.
using TimeMs = std::int64_t;

using VmId = std::string;
using WorkloadId = std::string;
using ServerId = std::string;
using RegionId = std::string;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The built-in optimizations. The underlying value is the arbitration
// priority; lower numbers win conflicts.
enum class OptimizationId : std::uint8_t {
    OnDemand = 0,
    MADC = 1,
    Rightsizing = 2,
    Oversubscription = 3,
    AutoScaling = 4,
    NonPreProvision = 5,
    RegionAgnostic = 6,
    Underclocking = 7,
    Overclocking = 8,
    SpotVMs = 9,
    HarvestVMs = 10,
};

inline constexpr int kBuiltinOptimizationCount = 11;

inline constexpr std::array<OptimizationId, kBuiltinOptimizationCount> kAllOptimizations = {
    OptimizationId::OnDemand,        OptimizationId::MADC,
    OptimizationId::Rightsizing,     OptimizationId::Oversubscription,
    OptimizationId::AutoScaling,     OptimizationId::NonPreProvision,
    OptimizationId::RegionAgnostic,  OptimizationId::Underclocking,
    OptimizationId::Overclocking,    OptimizationId::SpotVMs,
    OptimizationId::HarvestVMs,
};

constexpr int priority_of(OptimizationId id) { return static_cast<int>(id); }

std::string_view to_string(OptimizationId id);
std::optional<OptimizationId> parse_optimization(std::string_view name);

/// A set of built-in optimizations stored as a bit mask (bit i = priority i).
class OptimizationSet {
public:
    constexpr OptimizationSet() = default;
    constexpr OptimizationSet(std::initializer_list<OptimizationId> ids) {
        for (auto id : ids) insert(id);
    }
    static constexpr OptimizationSet from_bits(std::uint32_t bits) {
        OptimizationSet s;
        s.bits_ = bits;
        return s;
    }

    constexpr void insert(OptimizationId id) { bits_ |= bit(id); }
    constexpr void erase(OptimizationId id) { bits_ &= ~bit(id); }
    constexpr bool contains(OptimizationId id) const { return (bits_ & bit(id)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int size() const { return std::popcount(bits_); }
    constexpr std::uint32_t bits() const { return bits_; }

    constexpr OptimizationSet operator&(OptimizationSet o) const { return from_bits(bits_ & o.bits_); }
    constexpr OptimizationSet operator|(OptimizationSet o) const { return from_bits(bits_ | o.bits_); }
    constexpr bool is_subset_of(OptimizationSet o) const { return (bits_ & ~o.bits_) == 0; }
    constexpr bool operator==(const OptimizationSet&) const = default;

    /// Members in ascending priority order.
    std::vector<OptimizationId> members() const;

    static constexpr OptimizationSet all_builtin() {
        return from_bits((1u << kBuiltinOptimizationCount) - 1u);
    }

private:
    static constexpr std::uint32_t bit(OptimizationId id) {
        return 1u << static_cast<unsigned>(id);
    }
    std::uint32_t bits_ = 0;
};

std::string to_string(OptimizationSet set);

enum class PreemptionPriority : std::uint8_t { Low = 0, Normal = 1, High = 2 };
enum class ScalePreference : std::uint8_t { PreferGrow = 0, Neutral = 1, PreferShrink = 2 };

std::string_view to_string(PreemptionPriority p);
std::string_view to_string(ScalePreference p);
std::optional<PreemptionPriority> parse_preemption_priority(std::string_view s);
std::optional<ScalePreference> parse_scale_preference(std::string_view s);

}  // namespace wi
