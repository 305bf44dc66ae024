#include <zmix/workload.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zmix {

namespace {

struct GridRange {
    std::uint64_t lo = 0; // in grid units
    std::uint64_t hi = 0;
};

GridRange grid_range(const ValueSpec& spec, std::uint64_t g) {
    return {(spec.min.zatoshi() + g - 1) / g, spec.max.zatoshi() / g};
}

std::uint64_t fold(std::uint64_t h, std::uint64_t x) { return mix64(h ^ x); }

} // namespace

Amount draw_value(const ValueSpec& spec, Amount grid, Rng& rng) {
    const std::uint64_t g = std::max<std::uint64_t>(1, grid.zatoshi());
    const GridRange r = grid_range(spec, g);
    if (r.hi < r.lo) throw Error(ErrorCode::ConfigInvalid, "no grid value in the value range");

    const double lo = static_cast<double>(spec.min.zatoshi());
    const double hi = static_cast<double>(spec.max.zatoshi());
    const double u = rng.uniform01();
    const double v = spec.distribution == ValueDistribution::LogUniform
                         ? std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)))
                         : lo + u * (hi - lo);
    const auto units = static_cast<std::uint64_t>(std::llround(v / static_cast<double>(g)));
    return Amount(std::clamp(units, r.lo, r.hi) * g);
}

Workload generate_workload(const ScenarioConfig& config) {
    if (auto d = validate(config); !d.empty()) throw ConfigError(std::move(d));

    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(Stream::Values)));
    const Amount grid = config.advisor.policy.grid;
    const std::uint64_t g = grid.zatoshi();
    const GridRange range = grid_range(config.values, g);
    std::set<Amount> used;

    auto unique_value = [&]() -> Amount {
        for (int attempt = 0; attempt < 64; ++attempt) {
            Amount v = draw_value(config.values, grid, rng);
            if (used.insert(v).second) return v;
        }
        // Dense ranges: probe outward from a fresh draw to the nearest free value.
        const std::uint64_t seed_units = draw_value(config.values, grid, rng).zatoshi() / g;
        for (std::uint64_t off = 1; off <= range.hi - range.lo; ++off) {
            if (seed_units + off <= range.hi && used.insert(Amount((seed_units + off) * g)).second)
                return Amount((seed_units + off) * g);
            if (seed_units >= range.lo + off && used.insert(Amount((seed_units - off) * g)).second)
                return Amount((seed_units - off) * g);
        }
        throw ConfigError({"values.unique: ran out of distinct grid values"});
    };

    Workload w;
    for (std::uint64_t u = 0; u < config.users; ++u) {
        std::vector<Tick> starts;
        if (config.tx_rate > 0.0) {
            starts = poisson_arrivals(config.tx_rate, 0, config.duration, rng);
        } else {
            for (std::size_t i = 0; i < config.flows_per_user; ++i)
                starts.push_back(rng.uniform_int(0, config.duration - 1));
            std::sort(starts.begin(), starts.end());
        }
        for (std::size_t i = 0; i < starts.size(); ++i) {
            FlowPlan p;
            p.user = u;
            p.flow = i;
            p.start = starts[i];
            p.value = config.values.unique ? unique_value() : draw_value(config.values, grid, rng);
            for (std::size_t h = 0; h <= config.zz_hops; ++h)
                p.think.push_back(std::max<Tick>(1, static_cast<Tick>(std::llround(rng.exponential(config.think_time)))));
            w.flows.push_back(std::move(p));
        }
    }
    std::sort(w.flows.begin(), w.flows.end(), [](const FlowPlan& a, const FlowPlan& b) {
        return std::tie(a.start, a.user, a.flow) < std::tie(b.start, b.user, b.flow);
    });

    std::uint64_t h = 0;
    for (const auto& f : w.flows) {
        h = fold(h, f.user);
        h = fold(h, f.flow);
        h = fold(h, f.start);
        h = fold(h, f.value.zatoshi());
        for (Tick t : f.think) h = fold(h, t);
    }
    w.fingerprint = h;

    Rng group_rng(derive_seed(config.seed, static_cast<std::uint64_t>(Stream::AdviceGroup)));
    std::vector<std::uint64_t> users(config.users);
    std::iota(users.begin(), users.end(), std::uint64_t{0});
    const auto n = static_cast<std::size_t>(std::llround(config.behavior.advised * static_cast<double>(config.users)));
    for (std::size_t i = 0; i < n; ++i) std::swap(users[i], users[group_rng.uniform_int(i, users.size() - 1)]);
    w.advice_group.insert(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(n));
    return w;
}

} // namespace zmix
