#include <zmix/scenario.hpp>

#include <zmix/json_io.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <unordered_map>

namespace zmix {

namespace {

using nlohmann::json;

/// One flow's progress through deposit, hops and withdrawal.
struct FlowState {
    std::size_t plan = 0;
    std::size_t record = 0;
    std::size_t confirmed = 0; // deposit plus completed hops
    std::vector<Endpoint> coins;
};

class Simulation {
public:
    explicit Simulation(const ScenarioConfig& config)
        : config_(config), workload_(generate_workload(config)), network_(sched_, ledger_, config.deposit_visibility) {
        if (config.mixnet) {
            mixnet_ = std::make_unique<Mixnet>(
                *config.mixnet, network_, derive_seed(config.seed, static_cast<std::uint64_t>(Stream::Mixnet)),
                kMixAddrBase);
            channel_ = std::make_unique<AdvisoryChannel>(*mixnet_, [this](Amount x) { return advise(x); });
        }
        network_.on_applied([this](const Transaction& tx, NetAddr) { on_applied(tx); });
    }

    ScenarioRun run() {
        for (std::size_t i = 0; i < workload_.flows.size(); ++i) {
            const FlowPlan& p = workload_.flows[i];
            FlowRecord rec;
            rec.user = p.user;
            rec.flow = p.flow;
            rec.value = p.value;
            rec.advice_group = workload_.advice_group.contains(p.user);
            record_.flows.push_back(rec);
            flows_.push_back(FlowState{i, i, 0, {}});
            sched_.schedule(p.start, [this, i] { start(i); });
        }
        if (mixnet_) schedule_cover();
        sched_.run();
        return finish();
    }

private:
    Address fresh_t() { return Address::transparent(next_t_++); }
    Address fresh_z() { return Address::shielded(next_z_++); }
    TxId fresh_id() { return next_tx_++; }

    SplitRecommendation advise(Amount x) const {
        const DepositHistogram h = config_.advisor.live_history ? build_live_histogram(views_) : build_histogram(views_);
        return recommend_split(x, h, config_.advisor.policy);
    }

    void check_conservation() {
        if (!ledger_.conserved()) prefix_violations_.push_back(ledger_.size());
    }

    void submit(std::uint64_t user, const Transaction& tx) {
        owners_[tx.id] = user;
        submitted_at_.emplace(tx.id, sched_.now());
        submit_order_.push_back(tx.id);
        if (mixnet_) {
            mixnet_->submit(user_addr(user), tx);
        } else {
            network_.direct_broadcast(user_addr(user), tx, sched_.now());
        }
    }

    void start(std::size_t i) {
        const FlowPlan& p = workload_.flows[i];
        FlowRecord& rec = record_.flows[flows_[i].record];

        const Address source = fresh_t();
        ledger_.mint(source, p.value);
        mints_.push_back({ledger_.size(), source, p.value});
        check_conservation();

        Amount a = p.value, b{};
        if (rec.advice_group && config_.advisor.enabled) {
            const std::size_t cascade = mixnet_ ? p.user % mixnet_->cascades().size() : 0;
            const SplitRecommendation r = channel_ ? channel_->exchange(user_addr(p.user), p.value, cascade) : advise(p.value);
            rec.advice = r;
            a = r.a;
            b = r.b;
        }
        Transaction tz{fresh_id(), TxKind::TZ, {{source, p.value}}, {{fresh_z(), a}, {fresh_z(), b}}, 0};
        for (const auto& out : tz.outputs)
            if (!out.amount.is_zero()) flows_[i].coins.push_back(out);
        rec.deposit = tz.id;
        waiting_[tz.id] = i;
        submit(p.user, tz);
    }

    void advance(std::size_t i) {
        FlowState& f = flows_[i];
        const FlowPlan& p = workload_.flows[f.plan];
        if (f.confirmed <= config_.zz_hops) {
            Transaction zz{fresh_id(), TxKind::ZZ, f.coins, {}, 0};
            for (auto& c : f.coins) {
                c.address = fresh_z();
                zz.outputs.push_back(c);
            }
            waiting_[zz.id] = i;
            submit(p.user, zz);
            return;
        }
        for (const auto& c : f.coins) {
            Transaction zt{fresh_id(), TxKind::ZT, {c}, {{fresh_t(), c.amount}}, 0};
            record_.flows[f.record].withdrawals.push_back(zt.id);
            submit(p.user, zt);
        }
    }

    void on_applied(const Transaction& tx) {
        check_conservation();
        views_.push_back(public_view(tx, config_.deposit_visibility));
        if (auto it = submitted_at_.find(tx.id); it != submitted_at_.end())
            applied_at_.emplace(tx.id, sched_.now());
        auto w = waiting_.find(tx.id);
        if (w == waiting_.end()) return;
        const std::size_t i = w->second;
        waiting_.erase(w);
        FlowState& f = flows_[i];
        const Tick think = workload_.flows[f.plan].think.at(f.confirmed);
        ++f.confirmed;
        sched_.schedule_after(think, [this, i] { advance(i); });
    }

    void schedule_cover() {
        const auto& m = *config_.mixnet;
        if (m.cover_rate > 0.0)
            for (std::uint64_t u = 0; u < config_.users; ++u) mixnet_->emit_cover(user_addr(u), m.cover_rate, 0, config_.duration);
        if (m.mix_cover_rate > 0.0)
            for (std::size_t c = 0; c < m.cascades; ++c)
                for (std::size_t p = 0; p + 1 < m.length; ++p)
                    mixnet_->emit_mix_cover({c, p}, m.mix_cover_rate, 0, config_.duration);
    }

    ScenarioRun finish();

    ScenarioConfig config_;
    Workload workload_;
    Scheduler sched_;
    Ledger ledger_;
    Network network_;
    std::unique_ptr<Mixnet> mixnet_;
    std::unique_ptr<AdvisoryChannel> channel_;

    std::vector<FlowState> flows_;
    RunRecord record_;
    std::vector<PublicTxView> views_;
    std::unordered_map<TxId, std::size_t> waiting_;
    std::map<TxId, std::uint64_t> owners_;
    std::unordered_map<TxId, Tick> submitted_at_;
    std::unordered_map<TxId, Tick> applied_at_;
    std::vector<TxId> submit_order_;
    std::vector<std::size_t> prefix_violations_;
    std::vector<MintRecord> mints_;
    std::uint64_t next_t_ = 1;
    std::uint64_t next_z_ = 1;
    TxId next_tx_ = 1;
};

double mean_of(const std::vector<double>& xs) {
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

ScenarioRun Simulation::finish() {
    ScenarioRun out;
    out.config = config_;
    out.workload = workload_;
    out.mints = mints_;
    out.transactions = ledger_.transactions();
    out.trace = network_.trace();
    out.wire = network_.wire();
    out.owners = owners_;
    out.prefix_violations = prefix_violations_;
    for (std::uint64_t u = 0; u < config_.users; ++u) out.user_addrs.insert(user_addr(u));

    MetricsReport& r = out.report;
    r.scenario = config_.id;
    r.seed = config_.seed;
    r.workload_fingerprint = workload_.fingerprint;
    r.mixnet = mixnet_ != nullptr;

    if (config_.adversary.value) {
        const auto hyps = link_by_value(views_);
        r.value_attack = score(hyps, make_value_truth(out.transactions));
    }
    if (config_.adversary.network) {
        NetworkGroundTruth truth;
        for (const auto& [id, user] : owners_) truth.owner[id] = user_addr(user);
        truth.user_addrs = out.user_addrs;
        if (mixnet_)
            truth.cover_events.insert(mixnet_->decoy_trace_indices().begin(), mixnet_->decoy_trace_indices().end());
        const auto result = link_by_network(out.trace, truth);
        r.network_attack = result.score;
        r.network_mean_user_recall = result.mean_user_recall;
    }

    r.submitted = submit_order_.size();
    std::vector<double> lat;
    for (TxId id : submit_order_) {
        auto it = applied_at_.find(id);
        if (it == applied_at_.end()) continue;
        const Tick l = it->second - submitted_at_.at(id);
        out.latencies.push_back(l);
        lat.push_back(static_cast<double>(l));
    }
    r.delivered = lat.size();
    r.delivery_rate = r.submitted == 0 ? 1.0 : static_cast<double>(r.delivered) / static_cast<double>(r.submitted);
    r.latency_mean = mean_of(lat);
    if (!lat.empty()) {
        std::vector<double> sorted = lat;
        std::sort(sorted.begin(), sorted.end());
        const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
        r.latency_p95 = sorted[std::max<std::size_t>(rank, 1) - 1];
    }

    if (mixnet_) {
        const MixnetStats& s = mixnet_->stats();
        out.mixnet_stats = s;
        r.cover_packets = s.cover_packets;
        const std::size_t ingress = s.real_packets + s.user_cover_packets;
        r.activity_advantage = ingress == 0 ? 1.0 : static_cast<double>(s.real_packets) / static_cast<double>(ingress);
        out.exit_addrs = mixnet_->exit_addrs();
        for (const auto& c : mixnet_->cascades()) {
            std::vector<NetAddr> addrs;
            for (const auto& n : c.nodes) addrs.push_back(n.addr);
            out.cascade_addrs.push_back(std::move(addrs));
        }
        out.observed = mixnet_->observed();
        out.mix_log = mixnet_->log();
        out.advice_transcript = channel_->transcript();
    }

    std::map<TxId, std::size_t> sizes;
    for (const auto& w : analyze_by_value(views_).withdrawals) sizes[w.withdrawal] = w.candidates.size();
    std::vector<double> group_sizes;
    for (const auto& f : record_.flows) {
        if (!f.advice_group) continue;
        ++r.advice_group_flows;
        if (f.advice) {
            ++r.advised_flows;
            if (f.advice->fallback) ++r.advice_fallbacks;
        }
        for (TxId w : f.withdrawals)
            if (auto it = sizes.find(w); it != sizes.end()) group_sizes.push_back(static_cast<double>(it->second));
    }
    r.advice_group_mean_set_size = mean_of(group_sizes);
    if (mixnet_ == nullptr) {
        std::vector<std::string> lines;
        for (const auto& f : record_.flows)
            if (f.advice)
                lines.push_back(json{{"user", f.user}, {"flow", f.flow}, {"amount", f.value.zatoshi()},
                                     {"advice", json::parse(to_json_string(*f.advice))}}
                                    .dump());
        out.advice_transcript = std::move(lines);
    }

    r.transactions = ledger_.size();
    r.broadcasts = out.trace.size();
    r.rejected = network_.rejected();
    r.conservation_violations = prefix_violations_.size();

    record_.seed = config_.seed;
    record_.workload_fingerprint = workload_.fingerprint;
    record_.views = views_;
    out.record = record_;
    return out;
}

json score_json(const std::optional<AttackScore>& s) { return s ? to_json(*s) : json(); }

std::optional<AttackScore> score_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return attack_score_from_json(j);
}

enum class Better { Higher, Lower, Neither };

struct MetricSpec {
    const char* name;
    Better better;
};

constexpr MetricSpec kMetrics[] = {
    {"value_precision", Better::Lower},
    {"value_recall", Better::Lower},
    {"value_mean_anonymity_set", Better::Higher},
    {"value_median_anonymity_set", Better::Higher},
    {"value_mean_entropy_bits", Better::Higher},
    {"value_asserted", Better::Lower},
    {"network_precision", Better::Lower},
    {"network_recall", Better::Lower},
    {"network_mean_anonymity_set", Better::Higher},
    {"network_mean_user_recall", Better::Lower},
    {"submitted", Better::Neither},
    {"delivered", Better::Neither},
    {"delivery_rate", Better::Higher},
    {"latency_mean", Better::Lower},
    {"latency_p95", Better::Lower},
    {"cover_packets", Better::Neither},
    {"activity_advantage", Better::Lower},
    {"advice_group_flows", Better::Neither},
    {"advised_flows", Better::Neither},
    {"advice_fallbacks", Better::Neither},
    {"advice_group_mean_set_size", Better::Higher},
    {"transactions", Better::Neither},
    {"broadcasts", Better::Neither},
    {"rejected", Better::Lower},
    {"conservation_violations", Better::Lower},
};

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Malformed, "cannot write " + path.string());
    out << text;
}

template <class F>
void write_lines(const std::filesystem::path& path, F&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Malformed, "cannot write " + path.string());
    body(out);
}

} // namespace

ScenarioRun simulate(const ScenarioConfig& config) {
    if (auto d = validate(config); !d.empty()) throw ConfigError(std::move(d));
    Simulation sim(config);
    return sim.run();
}

MetricsReport run_scenario(const ScenarioConfig& config) { return simulate(config).report; }

json to_json(const MetricsReport& r) {
    return json{{"scenario", r.scenario},
                {"seed", r.seed},
                {"workload_fingerprint", r.workload_fingerprint},
                {"mixnet", r.mixnet},
                {"value_attack", score_json(r.value_attack)},
                {"network_attack", score_json(r.network_attack)},
                {"network_mean_user_recall", r.network_mean_user_recall},
                {"submitted", r.submitted},
                {"delivered", r.delivered},
                {"delivery_rate", r.delivery_rate},
                {"latency_mean", r.latency_mean},
                {"latency_p95", r.latency_p95},
                {"cover_packets", r.cover_packets},
                {"activity_advantage", r.activity_advantage},
                {"advice_group_flows", r.advice_group_flows},
                {"advised_flows", r.advised_flows},
                {"advice_fallbacks", r.advice_fallbacks},
                {"advice_group_mean_set_size", r.advice_group_mean_set_size},
                {"transactions", r.transactions},
                {"broadcasts", r.broadcasts},
                {"rejected", r.rejected},
                {"conservation_violations", r.conservation_violations}};
}

MetricsReport report_from_json(const json& j) {
    try {
        MetricsReport r;
        r.scenario = j.at("scenario").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.workload_fingerprint = j.at("workload_fingerprint").get<std::uint64_t>();
        r.mixnet = j.at("mixnet").get<bool>();
        r.value_attack = score_from(j.at("value_attack"));
        r.network_attack = score_from(j.at("network_attack"));
        r.network_mean_user_recall = j.at("network_mean_user_recall").get<double>();
        r.submitted = j.at("submitted").get<std::size_t>();
        r.delivered = j.at("delivered").get<std::size_t>();
        r.delivery_rate = j.at("delivery_rate").get<double>();
        r.latency_mean = j.at("latency_mean").get<double>();
        r.latency_p95 = j.at("latency_p95").get<double>();
        r.cover_packets = j.at("cover_packets").get<std::size_t>();
        r.activity_advantage = j.at("activity_advantage").get<double>();
        r.advice_group_flows = j.at("advice_group_flows").get<std::size_t>();
        r.advised_flows = j.at("advised_flows").get<std::size_t>();
        r.advice_fallbacks = j.at("advice_fallbacks").get<std::size_t>();
        r.advice_group_mean_set_size = j.at("advice_group_mean_set_size").get<double>();
        r.transactions = j.at("transactions").get<std::size_t>();
        r.broadcasts = j.at("broadcasts").get<std::size_t>();
        r.rejected = j.at("rejected").get<std::size_t>();
        r.conservation_violations = j.at("conservation_violations").get<std::size_t>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Malformed, std::string("bad report: ") + e.what());
    }
}

std::vector<std::pair<std::string, double>> report_metrics(const MetricsReport& r) {
    const double nan = std::nan("");
    const auto& v = r.value_attack;
    const auto& n = r.network_attack;
    auto d = [](std::size_t x) { return static_cast<double>(x); };
    const double values[] = {
        v && v->precision_defined ? v->precision : nan,
        v && v->recall_defined ? v->recall : nan,
        v ? v->mean_anonymity_set : nan,
        v ? v->median_anonymity_set : nan,
        v ? v->mean_entropy_bits : nan,
        v ? d(v->asserted) : nan,
        n && n->precision_defined ? n->precision : nan,
        n && n->recall_defined ? n->recall : nan,
        n ? n->mean_anonymity_set : nan,
        n ? r.network_mean_user_recall : nan,
        d(r.submitted),
        d(r.delivered),
        r.delivery_rate,
        r.latency_mean,
        r.latency_p95,
        d(r.cover_packets),
        r.activity_advantage,
        d(r.advice_group_flows),
        d(r.advised_flows),
        d(r.advice_fallbacks),
        r.advice_group_mean_set_size,
        d(r.transactions),
        d(r.broadcasts),
        d(r.rejected),
        d(r.conservation_violations),
    };
    static_assert(std::size(values) == std::size(kMetrics));
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < std::size(kMetrics); ++i) out.emplace_back(kMetrics[i].name, values[i]);
    return out;
}

std::string report_csv_header() {
    std::string h = "scenario,seed,workload_fingerprint";
    for (const auto& m : kMetrics) h += std::string(",") + m.name;
    return h;
}

std::string report_csv_row(const MetricsReport& r) {
    std::string row = csv_field(r.scenario) + "," + std::to_string(r.seed) + "," + std::to_string(r.workload_fingerprint);
    for (const auto& [_, v] : report_metrics(r)) row += "," + format_number(v);
    return row;
}

std::string dump_report(const MetricsReport& r) { return to_json(r).dump(2) + "\n"; }

void write_artifacts(const ScenarioRun& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", dump_report(run.report));
    write_file(dir / "report.csv", report_csv_header() + "\n" + report_csv_row(run.report) + "\n");
    write_file(dir / "config.json", to_json(run.config).dump(2) + "\n");
    write_lines(dir / "ledger_public.jsonl", [&](std::ostream& o) { write_public_log(o, run.record.views); });
    write_lines(dir / "ledger_truth.jsonl", [&](std::ostream& o) { write_ground_truth(o, run.transactions, run.owners); });
    write_lines(dir / "trace.jsonl", [&](std::ostream& o) { write_trace_jsonl(o, run.trace); });
    write_lines(dir / "wire.jsonl", [&](std::ostream& o) {
        for (const auto& w : run.wire)
            o << json{{"time", w.time}, {"from", w.from.value}, {"to", w.to.value}, {"size", w.size}}.dump() << '\n';
    });
    if (run.report.mixnet)
        write_lines(dir / "mix_log.jsonl", [&](std::ostream& o) { write_mix_log_jsonl(o, run.mix_log); });
    if (!run.advice_transcript.empty())
        write_lines(dir / "advice.jsonl", [&](std::ostream& o) {
            for (const auto& line : run.advice_transcript) o << line << '\n';
        });
}

DeltaReport compare(const MetricsReport& baseline, const MetricsReport& treatment) {
    if (baseline.seed != treatment.seed || baseline.workload_fingerprint != treatment.workload_fingerprint)
        throw Error(ErrorCode::MismatchedBaseline, "reports differ in seed or workload fingerprint");
    DeltaReport d;
    d.baseline = baseline.scenario;
    d.treatment = treatment.scenario;
    d.seed = baseline.seed;
    const auto b = report_metrics(baseline);
    const auto t = report_metrics(treatment);
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (std::isnan(b[i].second) || std::isnan(t[i].second)) continue;
        MetricDelta m{b[i].first, b[i].second, t[i].second, t[i].second - b[i].second, false};
        if (kMetrics[i].better == Better::Higher) m.regression = m.delta < 0.0;
        if (kMetrics[i].better == Better::Lower) m.regression = m.delta > 0.0;
        d.any_regression = d.any_regression || m.regression;
        d.deltas.push_back(std::move(m));
    }
    return d;
}

json to_json(const DeltaReport& d) {
    json deltas = json::array();
    for (const auto& m : d.deltas)
        deltas.push_back({{"metric", m.metric},
                          {"baseline", m.baseline},
                          {"treatment", m.treatment},
                          {"delta", m.delta},
                          {"regression", m.regression}});
    return json{{"baseline", d.baseline},
                {"treatment", d.treatment},
                {"seed", d.seed},
                {"deltas", deltas},
                {"any_regression", d.any_regression}};
}

} // namespace zmix
