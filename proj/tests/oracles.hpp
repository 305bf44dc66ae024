#pragma once

// Brute-force reference implementations. Each one recomputes a quantity from
// its definition with no shared code path beyond the data types.

#include <zmix/advisor.hpp>
#include <zmix/ledger.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <vector>

namespace oracle {

using zmix::Amount;
using zmix::PublicTxView;
using zmix::Transaction;
using zmix::TxId;
using zmix::TxKind;

struct Coin {
    TxId deposit;
    std::size_t output;
    std::uint64_t value;
    zmix::Tick time;
    auto operator<=>(const Coin&) const = default;
};

inline std::vector<Coin> coins_of(const std::vector<PublicTxView>& views) {
    std::vector<Coin> out;
    for (const auto& v : views) {
        if (v.kind != TxKind::TZ) continue;
        if (!v.visible_output_amounts.empty()) {
            for (std::size_t i = 0; i < v.visible_output_amounts.size(); ++i)
                if (v.visible_output_amounts[i].zatoshi() > 0)
                    out.push_back({v.id, i, v.visible_output_amounts[i].zatoshi(), v.timestamp});
        } else if (v.visible_amount && v.visible_amount->zatoshi() > 0) {
            out.push_back({v.id, 0, v.visible_amount->zatoshi(), v.timestamp});
        }
    }
    return out;
}

/// Candidate coins per withdrawal: every equal-valued coin deposited strictly
/// earlier, minus coins an earlier withdrawal faced alone. Withdrawals are
/// visited by (time, position in the input); each visit rescans every coin
/// and every earlier withdrawal from scratch.
inline std::map<TxId, std::vector<Coin>> value_candidates(const std::vector<PublicTxView>& views) {
    const auto coins = coins_of(views);
    std::vector<std::pair<zmix::Tick, std::size_t>> zt;
    for (std::size_t i = 0; i < views.size(); ++i)
        if (views[i].kind == TxKind::ZT && views[i].visible_amount) zt.emplace_back(views[i].timestamp, i);
    std::sort(zt.begin(), zt.end());

    std::map<TxId, std::vector<Coin>> result;
    std::vector<Coin> taken;
    for (const auto& [t, i] : zt) {
        const auto& w = views[i];
        std::vector<Coin> cands;
        for (const auto& c : coins) {
            if (c.value != w.visible_amount->zatoshi() || c.time >= t) continue;
            if (std::find(taken.begin(), taken.end(), c) != taken.end()) continue;
            cands.push_back(c);
        }
        if (cands.size() == 1) taken.push_back(cands.front());
        result[w.id] = cands;
    }
    return result;
}

/// Every value-matching (coin, withdrawal) pair with the set size it carries.
inline std::set<std::tuple<TxId, std::size_t, TxId, std::size_t>> value_hypotheses(
    const std::vector<PublicTxView>& views) {
    std::set<std::tuple<TxId, std::size_t, TxId, std::size_t>> out;
    for (const auto& [w, cands] : value_candidates(views))
        for (const auto& c : cands) out.insert({c.deposit, c.output, w, cands.size()});
    return out;
}

inline std::map<std::uint64_t, std::size_t> histogram(const std::vector<PublicTxView>& views) {
    std::map<std::uint64_t, std::size_t> h;
    for (const auto& c : coins_of(views)) ++h[c.value];
    return h;
}

/// Score of the best split of `total` by full enumeration of grid values.
inline std::size_t best_split_score(std::uint64_t total, const std::map<std::uint64_t, std::size_t>& hist,
                                    std::uint64_t grid) {
    auto count = [&](std::uint64_t v) {
        auto it = hist.find(v);
        return it == hist.end() ? std::size_t{0} : it->second;
    };
    std::size_t best = 0;
    for (std::uint64_t a = grid; a <= total / 2; a += grid) best = std::max(best, std::min(count(a), count(total - a)));
    return best;
}

/// (a, b) the documented tie-break picks among all maximal-score splits with
/// score > 0; empty when no split has both parts present.
inline std::optional<std::pair<std::uint64_t, std::uint64_t>> best_split(
    std::uint64_t total, const std::map<std::uint64_t, std::size_t>& hist, std::uint64_t grid) {
    auto count = [&](std::uint64_t v) {
        auto it = hist.find(v);
        return it == hist.end() ? std::size_t{0} : it->second;
    };
    std::optional<std::pair<std::uint64_t, std::uint64_t>> best;
    std::size_t best_score = 0, best_sum = 0;
    for (std::uint64_t a = grid; a <= total / 2; a += grid) {
        const std::size_t s = std::min(count(a), count(total - a));
        const std::size_t sum = count(a) + count(total - a);
        if (s == 0) continue;
        if (!best || s > best_score || (s == best_score && sum > best_sum)) {
            best = {a, total - a};
            best_score = s;
            best_sum = sum;
        }
    }
    return best;
}

/// Deposits whose value reached each withdrawal, by walking every shielded
/// input backwards through the producing transactions.
inline std::set<std::pair<TxId, TxId>> true_links(const std::vector<Transaction>& txs) {
    std::set<std::pair<TxId, TxId>> out;
    for (std::size_t w = 0; w < txs.size(); ++w) {
        if (txs[w].kind != TxKind::ZT) continue;
        std::vector<std::pair<zmix::Address, std::size_t>> frontier; // address spent before index
        for (const auto& in : txs[w].inputs) frontier.emplace_back(in.address, w);
        std::set<std::pair<zmix::Address, std::size_t>> visited;
        while (!frontier.empty()) {
            auto [addr, before] = frontier.back();
            frontier.pop_back();
            if (!visited.insert({addr, before}).second) continue;
            for (std::size_t p = 0; p < before; ++p) {
                const auto& tx = txs[p];
                const bool funds = std::any_of(tx.outputs.begin(), tx.outputs.end(), [&](const zmix::Endpoint& e) {
                    return e.address == addr && e.amount.zatoshi() > 0;
                });
                if (!funds) continue;
                if (tx.kind == TxKind::TZ) out.insert({tx.id, txs[w].id});
                if (tx.kind == TxKind::ZZ)
                    for (const auto& in : tx.inputs) frontier.emplace_back(in.address, p);
            }
        }
    }
    return out;
}

/// Replays mints and transactions in their recorded order and checks
/// pool + transparent == supply, pool == shielded and no negative balance
/// after every event. A mint at position i lands before txs[i].
struct Replay {
    bool every_prefix_conserved = true;
    std::size_t checked = 0;
};

struct Mint {
    std::size_t position;
    zmix::Address to;
    std::uint64_t value;
};

inline Replay replay_conservation(const std::vector<Mint>& mints, const std::vector<Transaction>& txs) {
    std::map<zmix::Address, __int128> bal;
    __int128 supply = 0, pool = 0;
    Replay r;
    auto check = [&] {
        __int128 t = 0, z = 0;
        for (const auto& [a, v] : bal) {
            (a.is_transparent() ? t : z) += v;
            if (v < 0) r.every_prefix_conserved = false;
        }
        ++r.checked;
        if (pool + t != supply || pool != z) r.every_prefix_conserved = false;
    };
    std::size_t m = 0;
    for (std::size_t i = 0; i <= txs.size(); ++i) {
        for (; m < mints.size() && mints[m].position == i; ++m) {
            bal[mints[m].to] += mints[m].value;
            supply += mints[m].value;
            check();
        }
        if (i == txs.size()) break;
        const auto& tx = txs[i];
        __int128 in_sum = 0;
        for (const auto& in : tx.inputs) {
            bal[in.address] -= in.amount.zatoshi();
            in_sum += in.amount.zatoshi();
        }
        for (const auto& out : tx.outputs) bal[out.address] += out.amount.zatoshi();
        if (tx.kind == TxKind::TZ) pool += in_sum;
        if (tx.kind == TxKind::ZT) pool -= in_sum;
        check();
    }
    return r;
}

} // namespace oracle
