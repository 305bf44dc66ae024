#pragma once

#include <zmix/config.hpp>

#include <set>
#include <vector>

namespace zmix {

/// One user moving one coin through the pool: deposit, zz_hops private
/// transfers, then withdrawal of every part.
struct FlowPlan {
    std::uint64_t user = 0;
    std::size_t flow = 0;
    Tick start = 0;
    Amount value;
    /// Ticks waited after each confirmation; size zz_hops + 1, each >= 1.
    std::vector<Tick> think;

    bool operator==(const FlowPlan&) const = default;
};

struct Workload {
    std::vector<FlowPlan> flows; // ordered by (start, user, flow)
    std::set<std::uint64_t> advice_group;
    /// Hash of the flow plans only, so runs that differ in behavior mix or
    /// routing still share a fingerprint.
    std::uint64_t fingerprint = 0;
};

/// Seeded stream indices; each consumer draws from its own generator.
enum class Stream : std::uint64_t { Values = 1, AdviceGroup = 2, Mixnet = 3 };

/// Grid-quantized draw from the value spec.
Amount draw_value(const ValueSpec& spec, Amount grid, Rng& rng);

/// Deterministic in (config minus routing and behavior, seed). The advice
/// group holds exactly llround(advised * users) users. Throws ConfigError when
/// unique values cannot be satisfied.
Workload generate_workload(const ScenarioConfig& config);

} // namespace zmix
