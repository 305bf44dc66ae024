#pragma once

#include <zmix/ledger.hpp>
#include <zmix/network.hpp>

#include <map>
#include <set>
#include <span>
#include <vector>

namespace zmix {

/// One shielded coin the public ledger reveals a value for. Under
/// DepositVisibility::Total each nonzero deposit is a single coin
/// (output == 0); under PerOutput every nonzero output is its own coin.
struct DepositCoin {
    TxId deposit = 0;
    std::size_t output = 0;
    Amount value;
    Tick timestamp = 0;

    auto operator<=>(const DepositCoin&) const = default;
};

std::vector<DepositCoin> deposit_coins(const PublicTxView& view);

/// Attacker's hypothesis that `withdrawal` spends the coin of `deposit`.
struct LinkHypothesis {
    TxId deposit = 0;
    std::size_t deposit_output = 0;
    TxId withdrawal = 0;
    std::size_t candidate_set_size = 1;

    /// Singleton candidate sets are the only links the attacker commits to.
    bool asserted() const { return candidate_set_size == 1; }

    auto operator<=>(const LinkHypothesis&) const = default;
};

/// Every value-matching coin a single withdrawal faced, possibly none.
struct WithdrawalCandidates {
    TxId withdrawal = 0;
    Amount value;
    Tick timestamp = 0;
    std::vector<DepositCoin> candidates;
};

struct ValueAnalysis {
    std::vector<WithdrawalCandidates> withdrawals;
    std::vector<DepositCoin> consumed; // coins taken out by an asserted link
};

/// Walks the public ledger in time order. A ZT of value v faces every coin of
/// value v deposited strictly earlier and not yet consumed by a singleton
/// match; a singleton match consumes its coin.
ValueAnalysis analyze_by_value(std::span<const PublicTxView> views);

std::vector<LinkHypothesis> link_by_value(std::span<const PublicTxView> views);

struct AttackScore {
    double precision = 0.0;
    double recall = 0.0;
    bool precision_defined = false; // false when nothing was asserted
    bool recall_defined = false;    // false when ground truth holds no pairs
    double mean_anonymity_set = 0.0;
    double median_anonymity_set = 0.0;
    double mean_entropy_bits = 0.0;
    std::size_t asserted = 0;
    std::size_t correct = 0;
    std::size_t truth_size = 0;
    std::size_t scored_targets = 0; // withdrawals (value) or txs (network)

    bool operator==(const AttackScore&) const = default;
};

/// Ground truth the value attack is scored against.
struct ValueGroundTruth {
    std::set<TrueLink> links;
    std::set<TxId> known_txs;
};

ValueGroundTruth make_value_truth(std::span<const Transaction> txs);

/// Throws Error(UnknownTxId) if a hypothesis names a tx the truth lacks.
AttackScore score(std::span<const LinkHypothesis> hypotheses, const ValueGroundTruth& truth);

/// log2 of a uniform candidate set.
double uniform_entropy_bits(std::size_t candidate_set_size);

struct UserCluster {
    NetAddr origin;
    std::vector<TxId> txs;
};

struct NetworkGroundTruth {
    std::map<TxId, NetAddr> owner;       // user-originated txs only
    std::set<NetAddr> user_addrs;
    std::set<std::size_t> cover_events;  // trace indices carrying decoys
};

struct NetworkLinkResult {
    std::vector<UserCluster> clusters;
    AttackScore score;
    std::map<NetAddr, double> per_user_recall;
    double mean_user_recall = 0.0;
};

/// Groups the trace by broadcasting address. A tx seen several times joins
/// only the cluster of its first broadcast, so clusters are disjoint.
NetworkLinkResult link_by_network(std::span<const BroadcastEvent> trace, const NetworkGroundTruth& truth);

} // namespace zmix
