#include <zmix/config.hpp>

#include <cmath>
#include <fstream>
#include <set>

namespace zmix {

namespace {

using nlohmann::json;

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out = "invalid scenario config";
    for (const auto& l : lines) out += "\n  " + l;
    return out;
}

/// Typed field access on one JSON object. Every fault is appended to the
/// shared diagnostics instead of throwing.
class Fields {
public:
    Fields(const json& obj, std::string path, std::vector<std::string>& diag, std::set<std::string> allowed)
        : obj_(obj), path_(std::move(path)), diag_(diag) {
        if (!obj_.is_object()) {
            fail("", "expected an object");
            ok_ = false;
            return;
        }
        for (const auto& [key, _] : obj_.items())
            if (!allowed.contains(key)) fail(key, "unknown field");
    }

    bool ok() const { return ok_; }
    bool has(const char* key) const { return ok_ && obj_.contains(key) && !obj_.at(key).is_null(); }
    const json& at(const char* key) const { return obj_.at(key); }
    std::string path(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    void fail(const std::string& key, const std::string& what) { diag_.push_back(path(key) + ": " + what); }

    void get(const char* key, std::uint64_t& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_number_unsigned()) return fail(key, "expected a non-negative integer");
        out = v.get<std::uint64_t>();
    }

    void get(const char* key, double& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_number()) return fail(key, "expected a number");
        out = v.get<double>();
    }

    void get(const char* key, bool& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_boolean()) return fail(key, "expected true or false");
        out = v.get<bool>();
    }

    void get(const char* key, std::string& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_string()) return fail(key, "expected a string");
        out = v.get<std::string>();
    }

    void get_zec(const char* key, Amount& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_number()) return fail(key, "expected an amount in ZEC");
        try {
            out = Amount::from_zec(v.get<double>());
        } catch (const Error& e) {
            fail(key, e.what());
        }
    }

    template <class E>
    void get_enum(const char* key, E& out, std::initializer_list<std::pair<const char*, E>> names) {
        if (!has(key)) return;
        const auto& v = at(key);
        std::string allowed;
        for (const auto& [n, e] : names) {
            if (v.is_string() && v.get<std::string>() == n) {
                out = e;
                return;
            }
            allowed += allowed.empty() ? n : std::string(", ") + n;
        }
        fail(key, "expected one of " + allowed);
    }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& diag_;
    bool ok_ = true;
};

void parse_values(const json& j, ValueSpec& out, std::vector<std::string>& diag) {
    Fields f(j, "values", diag, {"distribution", "min_zec", "max_zec", "unique"});
    if (!f.ok()) return;
    f.get_enum("distribution", out.distribution,
               {{"log_uniform", ValueDistribution::LogUniform}, {"uniform", ValueDistribution::Uniform}});
    f.get_zec("min_zec", out.min);
    f.get_zec("max_zec", out.max);
    f.get("unique", out.unique);
}

void parse_behavior(const json& j, BehaviorMix& out, std::vector<std::string>& diag) {
    Fields f(j, "behavior", diag, {"naive", "advised"});
    if (!f.ok()) return;
    f.get("naive", out.naive);
    f.get("advised", out.advised);
}

void parse_advisor(const json& j, AdvisorSettings& out, std::vector<std::string>& diag) {
    Fields f(j, "advisor", diag, {"enabled", "grid_zec", "objective", "denominations_zec", "live_history"});
    if (!f.ok()) return;
    f.get("enabled", out.enabled);
    f.get_zec("grid_zec", out.policy.grid);
    f.get_enum("objective", out.policy.objective,
               {{"min_count", SplitObjective::MinCount}, {"sum_log_count", SplitObjective::SumLogCount}});
    f.get("live_history", out.live_history);
    if (f.has("denominations_zec")) {
        const auto& arr = f.at("denominations_zec");
        if (!arr.is_array()) {
            f.fail("denominations_zec", "expected an array of ZEC amounts");
        } else {
            out.policy.denominations.clear();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string key = "denominations_zec[" + std::to_string(i) + "]";
                if (!arr[i].is_number()) {
                    f.fail(key, "expected an amount in ZEC");
                    continue;
                }
                try {
                    out.policy.denominations.push_back(Amount::from_zec(arr[i].get<double>()));
                } catch (const Error& e) {
                    f.fail(key, e.what());
                }
            }
        }
    }
}

void parse_mixnet(const json& j, MixnetConfig& out, std::vector<std::string>& diag) {
    Fields f(j, "mixnet", diag,
             {"cascades", "length", "mean_delay", "cover_rate", "mix_cover_rate", "droppers", "redundancy",
              "selection", "sealing", "cover_exit"});
    if (!f.ok()) return;
    f.get("cascades", out.cascades);
    f.get("length", out.length);
    f.get("mean_delay", out.mean_delay);
    f.get("cover_rate", out.cover_rate);
    f.get("mix_cover_rate", out.mix_cover_rate);
    f.get("redundancy", out.redundancy);
    f.get_enum("selection", out.selection, {{"random", CascadeSelection::Random}, {"first", CascadeSelection::First}});
    f.get_enum("sealing", out.sealing, {{"keyed-prp", SealingScheme::KeyedPrp}, {"sodium", SealingScheme::Sodium}});
    f.get_enum("cover_exit", out.cover_exit, {{"drop", CoverExit::Drop}, {"decoy", CoverExit::Decoy}});
    if (f.has("droppers")) {
        const auto& arr = f.at("droppers");
        if (!arr.is_array()) {
            f.fail("droppers", "expected an array of {cascade, position}");
        } else {
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Fields d(arr[i], f.path("droppers[" + std::to_string(i) + "]"), diag, {"cascade", "position"});
                if (!d.ok()) continue;
                if (!d.has("cascade") || !d.has("position")) {
                    d.fail("", "needs cascade and position");
                    continue;
                }
                MixPosition p;
                d.get("cascade", p.cascade);
                d.get("position", p.position);
                out.droppers.push_back(p);
            }
        }
    }
}

void parse_adversary(const json& j, AdversaryToggles& out, std::vector<std::string>& diag) {
    Fields f(j, "adversary", diag, {"value", "network"});
    if (!f.ok()) return;
    f.get("value", out.value);
    f.get("network", out.network);
}

bool unit_fraction(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

} // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : Error(ErrorCode::ConfigInvalid, join_lines(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::vector<std::string> validate(const ScenarioConfig& c) {
    std::vector<std::string> d;
    if (c.id.empty()) d.push_back("id: must not be empty");
    if (c.users == 0) d.push_back("users: must be positive");
    if (c.flows_per_user == 0) d.push_back("flows_per_user: must be positive");
    if (!std::isfinite(c.tx_rate) || c.tx_rate < 0.0) d.push_back("tx_rate: must be a non-negative rate");
    if (c.duration == 0) d.push_back("duration: must be positive");
    if (!std::isfinite(c.think_time) || c.think_time <= 0.0) d.push_back("think_time: must be positive");

    const Amount grid = c.advisor.policy.grid;
    if (grid.is_zero()) d.push_back("advisor.grid_zec: must be positive");
    if (c.values.min.is_zero()) d.push_back("values.min_zec: must be positive");
    if (c.values.min > c.values.max) d.push_back("values: min_zec exceeds max_zec");
    if (!grid.is_zero() && c.values.min <= c.values.max) {
        const std::uint64_t g = grid.zatoshi();
        const std::uint64_t lo = (c.values.min.zatoshi() + g - 1) / g;
        const std::uint64_t hi = c.values.max.zatoshi() / g;
        if (hi < lo) {
            d.push_back("values: no grid value lies in [min_zec, max_zec]");
        } else if (c.values.unique && c.tx_rate == 0.0 && c.users > 0 &&
                   hi - lo + 1 < static_cast<std::uint64_t>(c.users) * c.flows_per_user) {
            d.push_back("values.unique: fewer grid values in range than flows");
        }
    }
    for (std::size_t i = 0; i < c.advisor.policy.denominations.size(); ++i)
        if (c.advisor.policy.denominations[i].is_zero())
            d.push_back("advisor.denominations_zec[" + std::to_string(i) + "]: must be positive");

    if (!unit_fraction(c.behavior.naive)) d.push_back("behavior.naive: must lie in [0, 1]");
    if (!unit_fraction(c.behavior.advised)) d.push_back("behavior.advised: must lie in [0, 1]");
    if (std::abs(c.behavior.naive + c.behavior.advised - 1.0) > 1e-9)
        d.push_back("behavior: naive + advised must equal 1");

    if (c.mixnet) {
        const auto& m = *c.mixnet;
        if (m.cascades == 0) d.push_back("mixnet.cascades: must be positive");
        if (m.length == 0) d.push_back("mixnet.length: must be positive");
        if (!std::isfinite(m.mean_delay) || m.mean_delay <= 0.0) d.push_back("mixnet.mean_delay: must be positive");
        if (!std::isfinite(m.cover_rate) || m.cover_rate < 0.0) d.push_back("mixnet.cover_rate: must be non-negative");
        if (!std::isfinite(m.mix_cover_rate) || m.mix_cover_rate < 0.0)
            d.push_back("mixnet.mix_cover_rate: must be non-negative");
        if (m.redundancy == 0 || m.redundancy > m.cascades)
            d.push_back("mixnet.redundancy: must lie in [1, cascades]");
        if (m.length > 0 && payload_capacity(m.length, *make_sealer(m.sealing)) < 256)
            d.push_back("mixnet.length: too many layers for the fixed packet size");
        for (std::size_t i = 0; i < m.droppers.size(); ++i)
            if (m.droppers[i].cascade >= m.cascades || m.droppers[i].position >= m.length)
                d.push_back("mixnet.droppers[" + std::to_string(i) + "]: outside the mixnet");
    }
    return d;
}

ScenarioConfig parse_config(const json& j) {
    std::vector<std::string> diag;
    ScenarioConfig c;
    Fields f(j, "", diag,
             {"$schema", "id", "seed", "users", "flows_per_user", "tx_rate", "duration", "values", "zz_hops",
              "think_time", "behavior", "advisor", "mixnet", "adversary", "deposit_visibility"});
    if (!f.ok()) throw ConfigError(std::move(diag));

    f.get("id", c.id);
    f.get("seed", c.seed);
    f.get("users", c.users);
    f.get("flows_per_user", c.flows_per_user);
    f.get("tx_rate", c.tx_rate);
    f.get("duration", c.duration);
    f.get("zz_hops", c.zz_hops);
    f.get("think_time", c.think_time);
    f.get_enum("deposit_visibility", c.deposit_visibility,
               {{"total", DepositVisibility::Total}, {"per_output", DepositVisibility::PerOutput}});
    if (f.has("values")) parse_values(f.at("values"), c.values, diag);
    if (f.has("behavior")) parse_behavior(f.at("behavior"), c.behavior, diag);
    if (f.has("advisor")) parse_advisor(f.at("advisor"), c.advisor, diag);
    if (f.has("adversary")) parse_adversary(f.at("adversary"), c.adversary, diag);
    if (f.has("mixnet")) {
        MixnetConfig m;
        parse_mixnet(f.at("mixnet"), m, diag);
        c.mixnet = m;
    }

    for (auto& d : validate(c)) diag.push_back(std::move(d));
    if (!diag.empty()) throw ConfigError(std::move(diag));
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path.string() + ": cannot open"});
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError({path.string() + ": " + e.what()});
    }
    return parse_config(j);
}

json to_json(const ScenarioConfig& c) {
    auto zec = [](Amount a) { return a.zec(); };
    json denoms = json::array();
    for (Amount d : c.advisor.policy.denominations) denoms.push_back(zec(d));
    json j{{"id", c.id},
           {"seed", c.seed},
           {"users", c.users},
           {"flows_per_user", c.flows_per_user},
           {"tx_rate", c.tx_rate},
           {"duration", c.duration},
           {"values",
            {{"distribution", c.values.distribution == ValueDistribution::LogUniform ? "log_uniform" : "uniform"},
             {"min_zec", zec(c.values.min)},
             {"max_zec", zec(c.values.max)},
             {"unique", c.values.unique}}},
           {"zz_hops", c.zz_hops},
           {"think_time", c.think_time},
           {"behavior", {{"naive", c.behavior.naive}, {"advised", c.behavior.advised}}},
           {"advisor",
            {{"enabled", c.advisor.enabled},
             {"grid_zec", zec(c.advisor.policy.grid)},
             {"objective", c.advisor.policy.objective == SplitObjective::MinCount ? "min_count" : "sum_log_count"},
             {"denominations_zec", denoms},
             {"live_history", c.advisor.live_history}}},
           {"adversary", {{"value", c.adversary.value}, {"network", c.adversary.network}}},
           {"deposit_visibility", c.deposit_visibility == DepositVisibility::PerOutput ? "per_output" : "total"}};
    if (c.mixnet) {
        const auto& m = *c.mixnet;
        json droppers = json::array();
        for (const auto& p : m.droppers) droppers.push_back({{"cascade", p.cascade}, {"position", p.position}});
        j["mixnet"] = {{"cascades", m.cascades},
                       {"length", m.length},
                       {"mean_delay", m.mean_delay},
                       {"cover_rate", m.cover_rate},
                       {"mix_cover_rate", m.mix_cover_rate},
                       {"droppers", droppers},
                       {"redundancy", m.redundancy},
                       {"selection", m.selection == CascadeSelection::Random ? "random" : "first"},
                       {"sealing", std::string(to_string(m.sealing))},
                       {"cover_exit", m.cover_exit == CoverExit::Drop ? "drop" : "decoy"}};
    } else {
        j["mixnet"] = nullptr;
    }
    return j;
}

} // namespace zmix
