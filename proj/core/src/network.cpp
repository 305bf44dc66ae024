#include <zmix/network.hpp>

#include <nlohmann/json.hpp>

#include <ostream>

namespace zmix {

BroadcastOutcome Network::broadcast(NetAddr origin, const Transaction& tx) {
    BroadcastOutcome out;
    const Tick now = scheduler_.now();

    if (const Transaction* known = ledger_.find(tx.id)) {
        out.event = BroadcastEvent{now, origin, public_view(*known, visibility_)};
        trace_.push_back(*out.event);
        return out;
    }

    Transaction stamped = tx;
    stamped.timestamp = now;
    if (auto r = ledger_.validate(stamped)) {
        out.rejection = r;
        ++rejected_;
        return out;
    }
    ledger_.apply(stamped);
    out.applied = true;
    out.event = BroadcastEvent{now, origin, public_view(stamped, visibility_)};
    trace_.push_back(*out.event);
    for (const auto& hook : hooks_) hook(stamped, origin);
    return out;
}

BroadcastEvent Network::direct_broadcast(NetAddr user, const Transaction& tx, Tick at) {
    if (scheduler_.dispatching()) {
        if (at != scheduler_.now())
            throw Error(ErrorCode::SchedulingInPast, "direct_broadcast from inside an event must use the current tick");
    } else {
        scheduler_.run_until(at);
    }
    auto out = broadcast(user, tx);
    if (out.rejection) throw RejectedTransaction(tx.id, *out.rejection);
    return *out.event;
}

void Network::observe_wire(NetAddr from, NetAddr to, std::size_t size) {
    wire_.push_back(WireObservation{scheduler_.now(), from, to, size});
}

void write_trace_jsonl(std::ostream& out, const std::vector<BroadcastEvent>& trace) {
    for (const auto& e : trace) {
        nlohmann::json j{
            {"time", e.time},
            {"origin", e.origin.value},
            {"tx_id", e.view.id},
            {"kind", to_string(e.view.kind)},
            {"visible_amount", e.view.visible_amount ? nlohmann::json(e.view.visible_amount->zatoshi()) : nlohmann::json()},
        };
        out << j.dump() << '\n';
    }
}

} // namespace zmix
