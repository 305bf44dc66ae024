#include <zmix/rng.hpp>

#include <cmath>
#include <cstring>
#include <limits>

namespace zmix {

std::uint64_t Rng::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) std::swap(lo, hi);
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max()) return engine_();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % range);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return lo + x % range;
}

double Rng::exponential(double mean) {
    // 1 - u lies in (0, 1], so the log is finite.
    return -mean * std::log(1.0 - uniform01());
}

void Rng::fill(std::uint8_t* out, std::size_t n) {
    while (n > 0) {
        const std::uint64_t w = engine_();
        const std::size_t k = n < 8 ? n : 8;
        std::memcpy(out, &w, k);
        out += k;
        n -= k;
    }
}

std::vector<Tick> poisson_arrivals(double rate, Tick start, Tick end, Rng& rng) {
    std::vector<Tick> out;
    if (!(rate > 0.0) || end <= start) return out;
    const double mean_gap = 1.0 / rate;
    double t = static_cast<double>(start);
    const double stop = static_cast<double>(end);
    for (;;) {
        t += rng.exponential(mean_gap);
        if (t >= stop) break;
        out.push_back(static_cast<Tick>(t));
    }
    return out;
}

} // namespace zmix
