#include <zmix/advisor.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace zmix {

void DepositHistogram::add(Amount value, std::size_t n) {
    if (value.is_zero() || n == 0) return;
    counts_[value] += n;
}

void DepositHistogram::remove(Amount value) {
    auto it = counts_.find(value);
    if (it == counts_.end()) return;
    if (--it->second == 0) counts_.erase(it);
}

std::size_t DepositHistogram::count(Amount value) const {
    auto it = counts_.find(value);
    return it == counts_.end() ? 0 : it->second;
}

DepositHistogram build_histogram(std::span<const PublicTxView> views) {
    DepositHistogram h;
    for (const auto& v : views)
        for (const auto& coin : deposit_coins(v)) h.add(coin.value);
    return h;
}

DepositHistogram build_live_histogram(std::span<const PublicTxView> views) {
    DepositHistogram h = build_histogram(views);
    for (const auto& coin : analyze_by_value(views).consumed) h.remove(coin.value);
    return h;
}

namespace {

double objective_of(SplitObjective objective, std::size_t ca, std::size_t cb) {
    if (objective == SplitObjective::MinCount) return static_cast<double>(std::min(ca, cb));
    if (ca == 0 || cb == 0) return -std::numeric_limits<double>::infinity();
    return std::log(static_cast<double>(ca)) + std::log(static_cast<double>(cb));
}

} // namespace

SplitRecommendation recommend_split(Amount total, const DepositHistogram& hist, const AdvisorPolicy& policy) {
    if (total.zatoshi() < 2)
        throw Error(ErrorCode::AmountTooSmall, "cannot split " + std::to_string(total.zatoshi()) + " zatoshi");
    const std::uint64_t grid = std::max<std::uint64_t>(1, policy.grid.zatoshi());
    const std::uint64_t half = total.zatoshi() / 2;

    // A split with both parts in the history needs a in the history, so the
    // scan only visits histogram keys.
    std::optional<SplitRecommendation> best;
    std::size_t best_sum = 0;
    for (const auto& [a, ca] : hist.counts()) {
        if (a.zatoshi() > half) break;
        if (a.zatoshi() % grid != 0) continue;
        const Amount b = total - a;
        const std::size_t cb = hist.count(b);
        if (cb == 0) continue;
        const double obj = objective_of(policy.objective, ca, cb);
        const std::size_t sum = ca + cb;
        if (!best || obj > best->objective || (obj == best->objective && sum > best_sum)) {
            best = SplitRecommendation{a, b, std::min(ca, cb), obj, false};
            best_sum = sum;
        }
    }
    if (best) return *best;

    std::optional<Amount> denom;
    std::size_t denom_count = 0;
    for (Amount d : policy.denominations) {
        if (d.is_zero() || d.zatoshi() > half) continue;
        const std::size_t c = hist.count(d);
        if (!denom || c > denom_count || (c == denom_count && d > *denom)) {
            denom = d;
            denom_count = c;
        }
    }
    const std::uint64_t half_on_grid = half / grid * grid;
    const Amount a = denom ? *denom : Amount(half_on_grid > 0 ? half_on_grid : half);
    const Amount b = total - a;
    const std::size_t ca = hist.count(a), cb = hist.count(b);
    return SplitRecommendation{a, b, std::min(ca, cb), objective_of(policy.objective, ca, cb), true};
}

namespace {

std::map<TxId, std::size_t> candidate_sizes(std::span<const PublicTxView> views) {
    std::map<TxId, std::size_t> out;
    for (const auto& w : analyze_by_value(views).withdrawals) out[w.withdrawal] = w.candidates.size();
    return out;
}

const PublicTxView* find_view(std::span<const PublicTxView> views, TxId id) {
    for (const auto& v : views)
        if (v.id == id) return &v;
    return nullptr;
}

} // namespace

AdviceEvaluation evaluate_advice(const RunRecord& treated, const RunRecord& baseline) {
    if (treated.seed != baseline.seed || treated.workload_fingerprint != baseline.workload_fingerprint)
        throw Error(ErrorCode::MismatchedBaseline, "runs differ in seed or workload");

    std::map<std::pair<std::uint64_t, std::size_t>, const FlowRecord*> base_flows;
    for (const auto& f : baseline.flows) base_flows[{f.user, f.flow}] = &f;

    const auto treated_sizes = candidate_sizes(treated.views);
    const auto base_sizes = candidate_sizes(baseline.views);

    AdviceEvaluation eval;
    std::vector<double> before, after;
    for (const auto& f : treated.flows) {
        if (!f.advice_group) continue;
        auto bit = base_flows.find({f.user, f.flow});
        if (bit == base_flows.end() || bit->second->value != f.value)
            throw Error(ErrorCode::MismatchedBaseline, "baseline lacks flow for user " + std::to_string(f.user));
        const FlowRecord& b = *bit->second;
        if (b.withdrawals.empty() || f.withdrawals.empty()) continue;

        AdviceOutcome o;
        o.user = f.user;
        o.flow = f.flow;
        o.advised = f.advice.has_value();
        auto sz = base_sizes.find(b.withdrawals.front());
        if (sz == base_sizes.end()) continue;
        o.before = sz->second;
        bool complete = true;
        for (TxId w : f.withdrawals) {
            auto it = treated_sizes.find(w);
            if (it == treated_sizes.end()) {
                complete = false;
                break;
            }
            o.after.push_back(it->second);
        }
        if (!complete) continue;
        o.after_min = *std::min_element(o.after.begin(), o.after.end());

        if (f.deposit) {
            if (const PublicTxView* dv = find_view(treated.views, *f.deposit)) {
                std::vector<PublicTxView> prefix;
                for (const auto& v : treated.views)
                    if (v.timestamp < dv->timestamp || (v.timestamp == dv->timestamp && v.kind == TxKind::ZT))
                        prefix.push_back(v);
                const DepositHistogram live = build_live_histogram(prefix);
                if (f.advice) {
                    o.prior_live = {live.count(f.advice->a), live.count(f.advice->b)};
                } else {
                    o.prior_live = {live.count(f.value)};
                }
            }
        }
        before.push_back(static_cast<double>(o.before));
        after.push_back(static_cast<double>(o.after_min));
        eval.outcomes.push_back(std::move(o));
    }
    auto mean = [](const std::vector<double>& xs) {
        return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    };
    eval.mean_before = mean(before);
    eval.mean_after = mean(after);
    return eval;
}

std::string to_json_string(const SplitRecommendation& rec) {
    nlohmann::json j{{"a", rec.a.zatoshi()},
                     {"b", rec.b.zatoshi()},
                     {"score", rec.score},
                     {"fallback", rec.fallback}};
    if (std::isfinite(rec.objective)) j["objective"] = rec.objective;
    return j.dump();
}

SplitRecommendation split_recommendation_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        SplitRecommendation r;
        r.a = Amount(j.at("a").get<std::uint64_t>());
        r.b = Amount(j.at("b").get<std::uint64_t>());
        r.score = j.at("score").get<std::size_t>();
        r.fallback = j.at("fallback").get<bool>();
        r.objective = j.contains("objective") ? j["objective"].get<double>() : -std::numeric_limits<double>::infinity();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Malformed, std::string("bad advice response: ") + e.what());
    }
}

namespace {

// Channel messages are padded so they occupy one wire packet.
Bytes pad_message(const std::string& text, const Sealer& sealer) {
    const std::size_t room = kPacketSize - sealer.overhead();
    if (text.size() >= room) throw Error(ErrorCode::Malformed, "advice message too long");
    Bytes out(room, 0);
    std::copy(text.begin(), text.end(), out.begin());
    return out;
}

std::string unpad_message(const Bytes& bytes) {
    auto end = std::find(bytes.begin(), bytes.end(), std::uint8_t{0});
    return std::string(bytes.begin(), end);
}

} // namespace

SplitRecommendation AdvisoryChannel::exchange(NetAddr user, Amount total, std::size_t cascade) {
    const auto& mix = mixnet_.cascades().at(cascade).nodes.front();
    const Sealer& sealer = mixnet_.sealer();
    Rng& rng = mixnet_.rng();
    Network& net = mixnet_.network();

    const std::string request = nlohmann::json{{"type", "split_request"}, {"amount", total.zatoshi()}}.dump();
    const Bytes sealed_request = sealer.seal(mix.key, pad_message(request, sealer), rng);
    net.observe_wire(user, mix.addr, sealed_request.size());
    mixnet_.note_contact(mix.addr, user);

    const auto opened = sealer.open(mix.key, sealed_request);
    if (!opened) throw Error(ErrorCode::Malformed, "advice request failed to open");
    const auto req = nlohmann::json::parse(unpad_message(*opened));
    const SplitRecommendation rec = advisor_(Amount(req.at("amount").get<std::uint64_t>()));

    const std::string response = to_json_string(rec);
    const Bytes sealed_response = sealer.seal(mix.key, pad_message(response, sealer), rng);
    net.observe_wire(mix.addr, user, sealed_response.size());

    const auto reply = sealer.open(mix.key, sealed_response);
    if (!reply) throw Error(ErrorCode::Malformed, "advice response failed to open");

    const Tick now = net.scheduler().now();
    transcript_.push_back(nlohmann::json{{"time", now}, {"from", user.value}, {"to", mix.addr.value}, {"body", nlohmann::json::parse(request)}}.dump());
    transcript_.push_back(nlohmann::json{{"time", now}, {"from", mix.addr.value}, {"to", user.value}, {"body", nlohmann::json::parse(response)}}.dump());
    return split_recommendation_from_json(unpad_message(*reply));
}

} // namespace zmix
