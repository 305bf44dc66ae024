#pragma once

#include <zmix/advisor.hpp>
#include <zmix/ledger.hpp>
#include <zmix/mixnet.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace zmix {

enum class ValueDistribution : std::uint8_t { LogUniform, Uniform };

struct ValueSpec {
    ValueDistribution distribution = ValueDistribution::LogUniform;
    Amount min{kZatoshiPerZec / 100};
    Amount max{100 * kZatoshiPerZec};
    bool unique = false; // no two flows share a value
};

/// Fractions of users by deposit behavior; they sum to 1.
struct BehaviorMix {
    double naive = 1.0;
    double advised = 0.0;
};

struct AdvisorSettings {
    bool enabled = true;
    AdvisorPolicy policy;
    bool live_history = true; // drop coins the value attack already pinned
};

struct AdversaryToggles {
    bool value = true;
    bool network = true;
};

struct ScenarioConfig {
    std::string id = "scenario";
    std::uint64_t seed = 1;
    std::size_t users = 100;
    /// Flows per user when tx_rate is 0; start ticks uniform over the duration.
    std::size_t flows_per_user = 1;
    /// Poisson flow starts per user per tick; overrides flows_per_user when > 0.
    double tx_rate = 0.0;
    Tick duration = 10'000;
    ValueSpec values;
    std::size_t zz_hops = 1;
    double think_time = 100.0; // mean ticks between a confirmation and the next step
    BehaviorMix behavior;
    AdvisorSettings advisor;
    std::optional<MixnetConfig> mixnet;
    AdversaryToggles adversary;
    DepositVisibility deposit_visibility = DepositVisibility::PerOutput;
};

/// Error(ConfigInvalid) carrying one "<field>: <problem>" line per fault.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

/// Empty when the config is usable.
std::vector<std::string> validate(const ScenarioConfig& config);

/// Unknown keys, wrong types and invariant violations are all reported
/// together. Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioConfig& config);

} // namespace zmix
