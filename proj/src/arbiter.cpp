#include "wi/arbiter.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace wi {

namespace {

constexpr std::array<std::string_view, 4> kResourceNames = {
    "SpareCompute", "CpuFrequency", "Capacity", "RegionSlot"};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(ResourceKind kind) { return kResourceNames[static_cast<std::size_t>(kind)]; }

std::optional<ResourceKind> parse_resource_kind(std::string_view name) {
    for (std::size_t i = 0; i < kResourceNames.size(); ++i) {
        if (kResourceNames[i] == name) return static_cast<ResourceKind>(i);
    }
    return std::nullopt;
}

std::uint64_t tie_break_key(std::uint64_t seed, std::uint64_t claim_id) {
    return splitmix64(seed ^ splitmix64(claim_id));
}

std::vector<std::size_t> canonical_order(std::span<const ResourceClaim> claims, std::uint64_t seed) {
    std::vector<std::size_t> order(claims.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = claims[a];
        const auto& cb = claims[b];
        if (ca.timestamp_ms != cb.timestamp_ms) return ca.timestamp_ms < cb.timestamp_ms;
        auto ka = tie_break_key(seed, ca.id);
        auto kb = tie_break_key(seed, cb.id);
        if (ka != kb) return ka < kb;
        if (ca.id != cb.id) return ca.id < cb.id;
        return a < b;
    });
    return order;
}

std::vector<Allocation> resolve(const ResourcePool& pool, std::span<const ResourceClaim> claims,
                                std::uint64_t seed) {
    if (pool.capacity < 0) throw ArbiterError("pool '" + pool.name + "' has negative capacity");
    for (const auto& c : claims) {
        if (c.resource != pool.kind) {
            throw MixedResourceKinds("claim " + std::to_string(c.id) + " targets " +
                                     std::string(to_string(c.resource)) + " but pool '" + pool.name +
                                     "' is " + std::string(to_string(pool.kind)));
        }
        if (c.amount <= 0) throw ArbiterError("claim " + std::to_string(c.id) + " has non-positive amount");
    }

    std::vector<Allocation> out(claims.size());
    for (std::size_t i = 0; i < claims.size(); ++i) {
        out[i] = Allocation{claims[i].id, claims[i].amount, 0};
    }

    // Canonical order is shared by every priority class; filter per class.
    const auto order = canonical_order(claims, seed);
    std::map<int, std::vector<std::size_t>> classes;
    for (auto idx : order) classes[claims[idx].priority].push_back(idx);

    std::int64_t remaining = pool.capacity;
    for (const auto& [prio, members] : classes) {
        if (remaining == 0) break;
        if (pool.compressible()) {
            std::vector<ShareDemand> demands;
            demands.reserve(members.size());
            for (auto idx : members) demands.push_back({claims[idx].owner, claims[idx].amount});
            auto grants = fair_share(demands, remaining);
            for (std::size_t k = 0; k < members.size(); ++k) {
                out[members[k]].granted = grants[k];
                remaining -= grants[k];
            }
        } else {
            // Whole claims by earliest request; skip ahead past claims that no
            // longer fit.
            for (auto idx : members) {
                if (claims[idx].amount <= remaining) {
                    out[idx].granted = claims[idx].amount;
                    remaining -= claims[idx].amount;
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<std::int64_t> water_fill(std::span<const std::int64_t> demands, std::int64_t capacity) {
    std::vector<std::int64_t> grants(demands.size(), 0);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < demands.size(); ++i) {
        if (demands[i] > 0) active.push_back(i);
    }
    std::int64_t remaining = std::max<std::int64_t>(capacity, 0);

    while (!active.empty() && remaining > 0) {
        const auto k = static_cast<std::int64_t>(active.size());
        // Residual demands at or below the current level saturate.
        std::vector<std::size_t> still;
        std::int64_t saturated = 0;
        for (auto i : active) {
            if (demands[i] * k <= remaining) {
                grants[i] = demands[i];
                saturated += demands[i];
            } else {
                still.push_back(i);
            }
        }
        if (still.size() == active.size()) {
            const std::int64_t level = remaining / k;
            std::int64_t extra = remaining % k;
            for (auto i : active) {
                grants[i] = level + (extra > 0 ? 1 : 0);
                if (extra > 0) --extra;
            }
            remaining = 0;
            break;
        }
        remaining -= saturated;
        active = std::move(still);
    }
    return grants;
}

std::vector<double> water_fill(std::span<const double> demands, double capacity) {
    std::vector<double> grants(demands.size(), 0.0);
    std::vector<std::size_t> idx(demands.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return demands[a] < demands[b]; });
    double remaining = std::max(capacity, 0.0);
    std::size_t left = idx.size();
    for (auto i : idx) {
        const double level = remaining / static_cast<double>(left);
        const double g = std::min(std::max(demands[i], 0.0), level);
        grants[i] = g;
        remaining -= g;
        --left;
    }
    return grants;
}

std::vector<std::int64_t> fair_share(std::span<const ShareDemand> demands, std::int64_t capacity) {
    // Group claimants by owner, preserving first-appearance order.
    std::vector<std::vector<std::size_t>> groups;
    std::map<std::string, std::size_t> group_of;
    for (std::size_t i = 0; i < demands.size(); ++i) {
        const auto& owner = demands[i].owner;
        if (owner.empty()) {
            groups.push_back({i});
            continue;
        }
        auto [it, inserted] = group_of.try_emplace(owner, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(i);
    }

    std::vector<std::int64_t> owner_demand;
    owner_demand.reserve(groups.size());
    for (const auto& g : groups) {
        std::int64_t sum = 0;
        for (auto i : g) sum += std::max<std::int64_t>(demands[i].demand, 0);
        owner_demand.push_back(sum);
    }
    const auto owner_grant = water_fill(std::span<const std::int64_t>(owner_demand), capacity);

    std::vector<std::int64_t> grants(demands.size(), 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<std::int64_t> inner;
        inner.reserve(groups[g].size());
        for (auto i : groups[g]) inner.push_back(std::max<std::int64_t>(demands[i].demand, 0));
        const auto split = water_fill(std::span<const std::int64_t>(inner), owner_grant[g]);
        for (std::size_t k = 0; k < groups[g].size(); ++k) grants[groups[g][k]] = split[k];
    }
    return grants;
}

}  // namespace wi
