#pragma once

#include <zmix/adversary.hpp>
#include <zmix/advisor.hpp>
#include <zmix/config.hpp>
#include <zmix/mixnet.hpp>
#include <zmix/network.hpp>
#include <zmix/workload.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace zmix {

/// Everything a run is judged by. Deterministic in (config, seed); no wall
/// clock or host detail enters it.
struct MetricsReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::uint64_t workload_fingerprint = 0;
    bool mixnet = false;

    std::optional<AttackScore> value_attack;
    std::optional<AttackScore> network_attack;
    double network_mean_user_recall = 0.0;

    std::size_t submitted = 0; // user transactions handed to the network or mixnet
    std::size_t delivered = 0; // of those, applied to the ledger
    double delivery_rate = 0.0;
    double latency_mean = 0.0; // ticks from submission to first application
    double latency_p95 = 0.0;  // nearest rank

    std::size_t cover_packets = 0;
    /// Real share of the packets users send into the mixnet; 1 without cover.
    double activity_advantage = 1.0;

    std::size_t advice_group_flows = 0;
    std::size_t advised_flows = 0;
    std::size_t advice_fallbacks = 0;
    /// Mean over advice-group withdrawals of their value candidate-set size.
    double advice_group_mean_set_size = 0.0;

    std::size_t transactions = 0;
    std::size_t broadcasts = 0;
    std::size_t rejected = 0;
    std::size_t conservation_violations = 0;

    bool operator==(const MetricsReport&) const = default;
};

nlohmann::json to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

/// Flat numeric view of a report, in a fixed order.
std::vector<std::pair<std::string, double>> report_metrics(const MetricsReport& r);
std::string report_csv_header();
std::string report_csv_row(const MetricsReport& r);

struct MintRecord {
    std::size_t ledger_size = 0; // transactions applied before the mint
    Address to;
    Amount value;
};

/// A finished simulation with every artifact it produced.
struct ScenarioRun {
    ScenarioConfig config;
    Workload workload;
    MetricsReport report;
    RunRecord record;
    std::vector<MintRecord> mints;
    std::vector<Transaction> transactions;
    std::vector<BroadcastEvent> trace;
    std::vector<WireObservation> wire;
    std::map<TxId, std::uint64_t> owners; // tx id -> user index
    std::set<NetAddr> user_addrs;
    std::set<NetAddr> exit_addrs;
    std::vector<std::vector<NetAddr>> cascade_addrs;  // entry first
    std::map<NetAddr, std::set<NetAddr>> observed;    // per mix
    std::vector<MixLogEntry> mix_log;
    std::vector<std::string> advice_transcript;
    std::optional<MixnetStats> mixnet_stats;
    std::vector<Tick> latencies; // per delivered user tx, submission order
    std::vector<std::size_t> prefix_violations; // ledger sizes where conservation failed
};

/// User NetAddrs are 1 + user index; mixes start here.
inline constexpr std::uint64_t kMixAddrBase = 1ULL << 40;

inline NetAddr user_addr(std::uint64_t user) { return NetAddr{1 + user}; }

/// Throws ConfigError for an invalid config.
ScenarioRun simulate(const ScenarioConfig& config);

MetricsReport run_scenario(const ScenarioConfig& config);

/// report.json, report.csv, ledger_public.jsonl, ledger_truth.jsonl,
/// trace.jsonl, wire.jsonl, and mix_log.jsonl / advice.jsonl when present.
void write_artifacts(const ScenarioRun& run, const std::filesystem::path& dir);

std::string dump_report(const MetricsReport& r);

struct MetricDelta {
    std::string metric;
    double baseline = 0.0;
    double treatment = 0.0;
    double delta = 0.0;
    bool regression = false;
};

struct DeltaReport {
    std::string baseline;
    std::string treatment;
    std::uint64_t seed = 0;
    std::vector<MetricDelta> deltas;
    bool any_regression = false;
};

/// Per-metric treatment minus baseline. A regression is a move in the
/// worse direction: higher attack success, smaller anonymity sets, lower
/// delivery or higher latency. Throws Error(MismatchedBaseline) unless both
/// reports share seed and workload fingerprint.
DeltaReport compare(const MetricsReport& baseline, const MetricsReport& treatment);

nlohmann::json to_json(const DeltaReport& d);

/// `key=start:stop:step`, both ends inclusive.
struct SweepAxis {
    std::string key;
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;

    std::vector<double> values() const;
};

/// Keys: lambda, mix_lambda, mu, k, L, cascades, users, advised.
/// Throws ConfigError on bad syntax or an unknown key.
SweepAxis parse_sweep_axis(const std::string& text);

/// Throws ConfigError if the value does not fit the key or the result is
/// invalid.
ScenarioConfig apply_axis(ScenarioConfig config, const std::string& key, double value);

struct SweepPoint {
    double value = 0.0;
    MetricsReport report;
};

struct SweepResult {
    SweepAxis axis;
    std::vector<SweepPoint> points;
    /// activity_advantage never rises along the axis.
    bool advantage_monotone_nonincreasing = true;
};

/// Points run on up to `threads` workers, each with isolated state; results
/// do not depend on the thread count.
SweepResult sweep(const ScenarioConfig& base, const SweepAxis& axis, unsigned threads = 0);

/// sweep.csv and sweep.json.
void write_sweep(const SweepResult& result, const std::filesystem::path& dir);

} // namespace zmix
