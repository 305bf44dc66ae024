#pragma once

#include <zmix/ledger.hpp>
#include <zmix/scheduler.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace zmix {

/// One transaction injection into the P2P cloud, as the global passive
/// adversary records it.
struct BroadcastEvent {
    Tick time = 0;
    NetAddr origin;
    PublicTxView view;

    bool operator==(const BroadcastEvent&) const = default;
};

/// A packet crossing a link between two network endpoints. This is all the
/// adversary learns about mixnet traffic.
struct WireObservation {
    Tick time = 0;
    NetAddr from;
    NetAddr to;
    std::size_t size = 0;

    bool operator==(const WireObservation&) const = default;
};

struct BroadcastOutcome {
    std::optional<BroadcastEvent> event; // empty when the tx was rejected
    bool applied = false;                // false for duplicates and rejections
    std::optional<Rejection> rejection;
};

/// Flat P2P cloud in front of a ledger. Every accepted broadcast is visible
/// to the adversary with its true origin.
class Network {
public:
    using AppliedHook = std::function<void(const Transaction&, NetAddr origin)>;

    Network(Scheduler& scheduler, Ledger& ledger, DepositVisibility visibility = DepositVisibility::Total)
        : scheduler_(scheduler), ledger_(ledger), visibility_(visibility) {}

    /// Injects `tx` at the current tick. The ledger copy is stamped with that
    /// tick. A tx id the ledger already holds is observed again but applied
    /// only once; a tx the ledger rejects never reaches the trace.
    BroadcastOutcome broadcast(NetAddr origin, const Transaction& tx);

    /// A user pushing its own tx at tick `at`. Runs pending events up to `at`
    /// first. Throws SchedulingInPast or RejectedTransaction.
    BroadcastEvent direct_broadcast(NetAddr user, const Transaction& tx, Tick at);

    void observe_wire(NetAddr from, NetAddr to, std::size_t size);

    void on_applied(AppliedHook hook) { hooks_.push_back(std::move(hook)); }

    const std::vector<BroadcastEvent>& trace() const { return trace_; }
    const std::vector<WireObservation>& wire() const { return wire_; }
    std::size_t rejected() const { return rejected_; }

    Scheduler& scheduler() { return scheduler_; }
    const Ledger& ledger() const { return ledger_; }
    DepositVisibility visibility() const { return visibility_; }

private:
    Scheduler& scheduler_;
    Ledger& ledger_;
    DepositVisibility visibility_;
    std::vector<BroadcastEvent> trace_;
    std::vector<WireObservation> wire_;
    std::vector<AppliedHook> hooks_;
    std::size_t rejected_ = 0;
};

/// One JSON object per line: time, origin, tx_id, kind, visible_amount.
void write_trace_jsonl(std::ostream& out, const std::vector<BroadcastEvent>& trace);

} // namespace zmix
