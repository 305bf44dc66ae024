#include <zmix/scenario.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace zmix {

namespace {

using nlohmann::json;

constexpr const char* kAxisKeys[] = {"lambda", "mix_lambda", "mu", "k", "L", "cascades", "users", "advised"};

bool known_key(const std::string& key) {
    for (const char* k : kAxisKeys)
        if (key == k) return true;
    return false;
}

double parse_number(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError({"vary: " + what + " '" + text + "' is not a number"});
    }
}

std::size_t as_count(const std::string& key, double v) {
    if (v < 0.0 || std::abs(v - std::round(v)) > 1e-9)
        throw ConfigError({"vary." + key + ": " + std::to_string(v) + " is not a non-negative integer"});
    return static_cast<std::size_t>(std::llround(v));
}

} // namespace

std::vector<double> SweepAxis::values() const {
    if (step == 0.0) return {start};
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    std::vector<double> out;
    for (std::size_t i = 0; i <= n; ++i) out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    return out;
}

SweepAxis parse_sweep_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError({"vary: expected key=start:stop:step, got '" + text + "'"});
    SweepAxis axis;
    axis.key = text.substr(0, eq);
    if (!known_key(axis.key)) throw ConfigError({"vary: unknown key '" + axis.key + "'"});

    const std::string range = text.substr(eq + 1);
    const auto c1 = range.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : range.find(':', c1 + 1);
    if (c2 == std::string::npos || range.find(':', c2 + 1) != std::string::npos)
        throw ConfigError({"vary: expected start:stop:step, got '" + range + "'"});
    axis.start = parse_number(range.substr(0, c1), "start");
    axis.stop = parse_number(range.substr(c1 + 1, c2 - c1 - 1), "stop");
    axis.step = parse_number(range.substr(c2 + 1), "step");
    if (axis.step < 0.0 || (axis.step == 0.0 && axis.stop != axis.start) || axis.stop < axis.start)
        throw ConfigError({"vary: need start <= stop and a positive step"});
    return axis;
}

ScenarioConfig apply_axis(ScenarioConfig c, const std::string& key, double v) {
    auto need_mixnet = [&]() -> MixnetConfig& {
        if (!c.mixnet) throw ConfigError({"vary." + key + ": the scenario has no mixnet"});
        return *c.mixnet;
    };
    if (key == "lambda") {
        need_mixnet().cover_rate = v;
    } else if (key == "mix_lambda") {
        need_mixnet().mix_cover_rate = v;
    } else if (key == "mu") {
        need_mixnet().mean_delay = v;
    } else if (key == "k") {
        need_mixnet().redundancy = as_count(key, v);
    } else if (key == "L") {
        need_mixnet().length = as_count(key, v);
    } else if (key == "cascades") {
        need_mixnet().cascades = as_count(key, v);
    } else if (key == "users") {
        c.users = as_count(key, v);
    } else if (key == "advised") {
        c.behavior.advised = v;
        c.behavior.naive = 1.0 - v;
    } else {
        throw ConfigError({"vary: unknown key '" + key + "'"});
    }
    if (auto d = validate(c); !d.empty()) throw ConfigError(std::move(d));
    return c;
}

SweepResult sweep(const ScenarioConfig& base, const SweepAxis& axis, unsigned threads) {
    const auto values = axis.values();
    std::vector<ScenarioConfig> configs;
    for (double v : values) configs.push_back(apply_axis(base, axis.key, v));

    SweepResult result;
    result.axis = axis;
    result.points.resize(values.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, values.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            try {
                result.points[i] = SweepPoint{values[i], run_scenario(configs[i])};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 1; i < result.points.size(); ++i)
        if (result.points[i].report.activity_advantage > result.points[i - 1].report.activity_advantage)
            result.advantage_monotone_nonincreasing = false;
    return result;
}

void write_sweep(const SweepResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "sweep.csv", std::ios::binary);
        if (!csv) throw Error(ErrorCode::Malformed, "cannot write sweep.csv");
        csv << result.axis.key << ',' << report_csv_header() << '\n';
        for (const auto& p : result.points) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.10g", p.value);
            csv << buf << ',' << report_csv_row(p.report) << '\n';
        }
    }
    json points = json::array();
    for (const auto& p : result.points) points.push_back({{"value", p.value}, {"report", to_json(p.report)}});
    const json j{{"axis",
                  {{"key", result.axis.key}, {"start", result.axis.start}, {"stop", result.axis.stop},
                   {"step", result.axis.step}}},
                 {"points", points},
                 {"advantage_monotone_nonincreasing", result.advantage_monotone_nonincreasing}};
    std::ofstream out(dir / "sweep.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::Malformed, "cannot write sweep.json");
    out << j.dump(2) << '\n';
}

} // namespace zmix
