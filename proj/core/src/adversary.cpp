#include <zmix/adversary.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace zmix {

std::vector<DepositCoin> deposit_coins(const PublicTxView& view) {
    std::vector<DepositCoin> coins;
    if (view.kind != TxKind::TZ) return coins;
    if (!view.visible_output_amounts.empty()) {
        for (std::size_t i = 0; i < view.visible_output_amounts.size(); ++i) {
            const Amount v = view.visible_output_amounts[i];
            if (!v.is_zero()) coins.push_back({view.id, i, v, view.timestamp});
        }
    } else if (view.visible_amount && !view.visible_amount->is_zero()) {
        coins.push_back({view.id, 0, *view.visible_amount, view.timestamp});
    }
    return coins;
}

ValueAnalysis analyze_by_value(std::span<const PublicTxView> views) {
    std::vector<std::size_t> order(views.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return views[a].timestamp < views[b].timestamp; });

    ValueAnalysis out;
    std::unordered_map<Amount, std::vector<DepositCoin>> live;
    for (std::size_t idx : order) {
        const PublicTxView& v = views[idx];
        if (v.kind == TxKind::TZ) {
            for (auto& coin : deposit_coins(v)) live[coin.value].push_back(coin);
            continue;
        }
        if (v.kind != TxKind::ZT || !v.visible_amount) continue;

        WithdrawalCandidates w{v.id, *v.visible_amount, v.timestamp, {}};
        auto it = live.find(w.value);
        if (it != live.end()) {
            for (const auto& coin : it->second)
                if (coin.timestamp < w.timestamp) w.candidates.push_back(coin);
            if (w.candidates.size() == 1) {
                const DepositCoin taken = w.candidates.front();
                std::erase(it->second, taken);
                out.consumed.push_back(taken);
            }
        }
        out.withdrawals.push_back(std::move(w));
    }
    return out;
}

std::vector<LinkHypothesis> link_by_value(std::span<const PublicTxView> views) {
    std::vector<LinkHypothesis> out;
    for (const auto& w : analyze_by_value(views).withdrawals) {
        for (const auto& coin : w.candidates)
            out.push_back({coin.deposit, coin.output, w.withdrawal, w.candidates.size()});
    }
    return out;
}

double uniform_entropy_bits(std::size_t candidate_set_size) {
    return candidate_set_size <= 1 ? 0.0 : std::log2(static_cast<double>(candidate_set_size));
}

ValueGroundTruth make_value_truth(std::span<const Transaction> txs) {
    ValueGroundTruth truth;
    for (const auto& link : derive_true_links(txs)) truth.links.insert(link);
    for (const auto& tx : txs) truth.known_txs.insert(tx.id);
    return truth;
}

namespace {

double median(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

} // namespace

AttackScore score(std::span<const LinkHypothesis> hypotheses, const ValueGroundTruth& truth) {
    AttackScore s;
    s.truth_size = truth.links.size();

    std::map<TxId, std::size_t> set_size_by_withdrawal;
    std::set<TrueLink> asserted_pairs;
    for (const auto& h : hypotheses) {
        if (!truth.known_txs.contains(h.deposit))
            throw Error(ErrorCode::UnknownTxId, "hypothesis names unknown deposit tx " + std::to_string(h.deposit));
        if (!truth.known_txs.contains(h.withdrawal))
            throw Error(ErrorCode::UnknownTxId, "hypothesis names unknown withdrawal tx " + std::to_string(h.withdrawal));
        set_size_by_withdrawal[h.withdrawal] = h.candidate_set_size;
        if (h.asserted()) asserted_pairs.insert({h.deposit, h.withdrawal});
    }

    s.asserted = asserted_pairs.size();
    for (const auto& p : asserted_pairs)
        if (truth.links.contains(p)) ++s.correct;

    s.precision_defined = s.asserted > 0;
    s.recall_defined = s.truth_size > 0;
    if (s.precision_defined) s.precision = static_cast<double>(s.correct) / static_cast<double>(s.asserted);
    if (s.recall_defined) s.recall = static_cast<double>(s.correct) / static_cast<double>(s.truth_size);

    std::vector<double> sizes;
    std::vector<double> entropies;
    for (const auto& [_, n] : set_size_by_withdrawal) {
        sizes.push_back(static_cast<double>(n));
        entropies.push_back(uniform_entropy_bits(n));
    }
    s.scored_targets = sizes.size();
    s.mean_anonymity_set = mean(sizes);
    s.median_anonymity_set = median(sizes);
    s.mean_entropy_bits = mean(entropies);
    return s;
}

NetworkLinkResult link_by_network(std::span<const BroadcastEvent> trace, const NetworkGroundTruth& truth) {
    NetworkLinkResult out;
    std::map<NetAddr, std::size_t> cluster_of;
    std::unordered_set<TxId> seen;

    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (truth.cover_events.contains(i)) continue;
        const auto& e = trace[i];
        if (!seen.insert(e.view.id).second) continue;
        auto [it, fresh] = cluster_of.try_emplace(e.origin, out.clusters.size());
        if (fresh) out.clusters.push_back(UserCluster{e.origin, {}});
        out.clusters[it->second].txs.push_back(e.view.id);
    }

    std::map<NetAddr, std::size_t> owned;
    std::map<NetAddr, std::size_t> recovered;
    std::vector<double> sizes;
    std::size_t attributed = 0;
    for (const auto& c : out.clusters) {
        const bool origin_is_user = truth.user_addrs.contains(c.origin);
        for (TxId id : c.txs) {
            auto owner = truth.owner.find(id);
            if (owner == truth.owner.end()) continue;
            ++attributed;
            ++owned[owner->second];
            if (owner->second == c.origin) {
                ++out.score.correct;
                ++recovered[owner->second];
            }
            sizes.push_back(origin_is_user ? 1.0 : static_cast<double>(std::max<std::size_t>(1, truth.user_addrs.size())));
        }
    }

    auto& s = out.score;
    s.asserted = attributed;
    s.truth_size = attributed;
    s.precision_defined = attributed > 0;
    s.recall_defined = attributed > 0;
    if (attributed > 0) {
        s.precision = static_cast<double>(s.correct) / static_cast<double>(attributed);
        s.recall = s.precision;
    }
    s.scored_targets = sizes.size();
    s.mean_anonymity_set = mean(sizes);
    s.median_anonymity_set = median(sizes);
    std::vector<double> entropies;
    for (double n : sizes) entropies.push_back(uniform_entropy_bits(static_cast<std::size_t>(n)));
    s.mean_entropy_bits = mean(entropies);

    std::vector<double> recalls;
    for (const auto& [user, n] : owned) {
        const double r = static_cast<double>(recovered[user]) / static_cast<double>(n);
        out.per_user_recall[user] = r;
        recalls.push_back(r);
    }
    out.mean_user_recall = mean(recalls);
    return out;
}

} // namespace zmix
