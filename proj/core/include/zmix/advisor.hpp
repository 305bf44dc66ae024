#pragma once

#include <zmix/adversary.hpp>
#include <zmix/ledger.hpp>
#include <zmix/mixnet.hpp>

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zmix {

/// Count of prior deposit coins per exact value. Zero-value coins never
/// appear.
class DepositHistogram {
public:
    void add(Amount value, std::size_t n = 1);
    /// Removes one occurrence; the key disappears when its count hits zero.
    void remove(Amount value);

    std::size_t count(Amount value) const;
    bool empty() const { return counts_.empty(); }
    std::size_t distinct() const { return counts_.size(); }
    const std::map<Amount, std::size_t>& counts() const { return counts_; }

    bool operator==(const DepositHistogram&) const = default;

private:
    std::map<Amount, std::size_t> counts_;
};

/// Every deposit coin in the projection, single pass.
DepositHistogram build_histogram(std::span<const PublicTxView> views);

/// Deposit coins an exact-value attacker has not yet pinned to a withdrawal.
DepositHistogram build_live_histogram(std::span<const PublicTxView> views);

enum class SplitObjective : std::uint8_t {
    MinCount,    ///< anonymity of the weaker part
    SumLogCount, ///< product of both parts' anonymity
};

struct AdvisorPolicy {
    Amount grid{kZatoshiPerZec / 100};
    SplitObjective objective = SplitObjective::MinCount;
    std::vector<Amount> denominations{Amount(kZatoshiPerZec / 10), Amount(kZatoshiPerZec), Amount(10 * kZatoshiPerZec)};
};

struct SplitRecommendation {
    Amount a; ///< smaller part
    Amount b;
    std::size_t score = 0;    ///< min(count(a), count(b))
    double objective = 0.0;   ///< value of the policy's objective
    bool fallback = false;

    bool operator==(const SplitRecommendation&) const = default;
};

/// Best two-way split of `total` among grid values 0 < a <= total/2.
/// Ties go to the larger count(a) + count(b), then to the smaller a. When no
/// split has both parts in the history, the split is taken at the most
/// common configured denomination <= total/2 (larger one on ties), or at
/// floor(total/2) rounded down to the grid if no denomination fits;
/// `fallback` is set either way.
/// Throws Error(AmountTooSmall) for totals under 2 zatoshi.
SplitRecommendation recommend_split(Amount total, const DepositHistogram& hist, const AdvisorPolicy& policy = {});

/// A user's flow through the pool as the simulator recorded it.
struct FlowRecord {
    std::uint64_t user = 0;
    std::size_t flow = 0;
    Amount value;
    bool advice_group = false;  // user belongs to the advised fraction
    std::optional<SplitRecommendation> advice;
    std::optional<TxId> deposit;
    std::vector<TxId> withdrawals;
};

/// What evaluate_advice needs from one finished run.
struct RunRecord {
    std::uint64_t seed = 0;
    std::uint64_t workload_fingerprint = 0;
    std::vector<PublicTxView> views;
    std::vector<FlowRecord> flows;
};

struct AdviceOutcome {
    std::uint64_t user = 0;
    std::size_t flow = 0;
    std::size_t before = 0;             ///< baseline withdrawal's candidate-set size
    std::vector<std::size_t> after;     ///< one per withdrawal in the treated run
    std::size_t after_min = 0;
    /// Live coins of each part's value from earlier ticks, after every
    /// withdrawal up to and including the treated deposit's tick.
    std::vector<std::size_t> prior_live;
    bool advised = false;
};

struct AdviceEvaluation {
    std::vector<AdviceOutcome> outcomes;
    double mean_before = 0.0;
    double mean_after = 0.0;
};

/// Pairs each advice-group flow of `treated` with the same flow in
/// `baseline` and reports the candidate sets their withdrawals faced.
/// Throws Error(MismatchedBaseline) unless both runs share seed and workload.
AdviceEvaluation evaluate_advice(const RunRecord& treated, const RunRecord& baseline);

/// Request/response exchange between a user and the first mix of a cascade,
/// sealed under that mix's key. Transcript lines are JSON.
class AdvisoryChannel {
public:
    using Advisor = std::function<SplitRecommendation(Amount)>;

    AdvisoryChannel(Mixnet& mixnet, Advisor advisor) : mixnet_(mixnet), advisor_(std::move(advisor)) {}

    SplitRecommendation exchange(NetAddr user, Amount total, std::size_t cascade = 0);

    const std::vector<std::string>& transcript() const { return transcript_; }

private:
    Mixnet& mixnet_;
    Advisor advisor_;
    std::vector<std::string> transcript_;
};

std::string to_json_string(const SplitRecommendation& rec);
SplitRecommendation split_recommendation_from_json(const std::string& text);

} // namespace zmix
