#pragma once

// Conflict resolution between optimizations that compete for one resource
// pool: strict priority classes, then fair share (compressible pools) or
// earliest-request-first whole grants (incompressible pools).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wi/types.hpp"

namespace wi {

enum class ResourceKind : std::uint8_t { SpareCompute = 0, CpuFrequency, Capacity, RegionSlot };

constexpr bool is_compressible(ResourceKind kind) { return kind == ResourceKind::CpuFrequency; }

std::string_view to_string(ResourceKind kind);
std::optional<ResourceKind> parse_resource_kind(std::string_view name);

struct ResourcePool {
    std::string name;
    ResourceKind kind = ResourceKind::SpareCompute;
    std::int64_t capacity = 0;

    bool compressible() const { return is_compressible(kind); }
};

/// An optimization's demand on a pool. `amount` is in pool units: cores for
/// SpareCompute/Capacity, boosted-core-slots for CpuFrequency, slots for
/// RegionSlot.
struct ResourceClaim {
    std::uint64_t id = 0;
    std::string optimization;
    int priority = 0;
    ResourceKind resource = ResourceKind::SpareCompute;
    std::int64_t amount = 0;
    WorkloadId owner;               // empty: the claim is its own owner
    std::vector<std::string> scope; // server / vm ids the claim acts on
    TimeMs timestamp_ms = 0;
    int level = 0;                  // frequency level delta for CpuFrequency claims

    bool compressible() const { return is_compressible(resource); }
};

struct Allocation {
    std::uint64_t claim_id = 0;
    std::int64_t requested = 0;
    std::int64_t granted = 0;

    bool operator==(const Allocation&) const = default;
};

class ArbiterError : public Error {
public:
    using Error::Error;
};

/// Thrown when a claim targets a different resource kind than the pool.
class MixedResourceKinds : public ArbiterError {
public:
    using ArbiterError::ArbiterError;
};

/// Seeded, order-independent random key used to break timestamp ties.
std::uint64_t tie_break_key(std::uint64_t seed, std::uint64_t claim_id);

/// Claims sorted by (timestamp, tie_break_key, id). Both branches of
/// resolve() consume claims in this order.
std::vector<std::size_t> canonical_order(std::span<const ResourceClaim> claims, std::uint64_t seed);

/// Allocations are returned in the input order of `claims`.
std::vector<Allocation> resolve(const ResourcePool& pool, std::span<const ResourceClaim> claims,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Fair share

/// Single-level integral max-min. Units that cannot be split evenly go to
/// the earliest indices (largest remainder, ties by position).
std::vector<std::int64_t> water_fill(std::span<const std::int64_t> demands, std::int64_t capacity);

/// Continuous max-min water level allocation.
std::vector<double> water_fill(std::span<const double> demands, double capacity);

struct ShareDemand {
    std::string owner;  // empty: claimant is its own owner
    std::int64_t demand = 0;
};

/// Two-level max-min: capacity is split across owners first (owners ordered
/// by first appearance), then each owner's share across its claimants.
/// Grants are returned in input order.
std::vector<std::int64_t> fair_share(std::span<const ShareDemand> demands, std::int64_t capacity);

}  // namespace wi
