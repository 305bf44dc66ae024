#include <zmix/ledger.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace zmix {

Amount Amount::from_zec(double zec) {
    if (!(zec >= 0.0) || !std::isfinite(zec))
        throw Error(ErrorCode::Malformed, "amount must be a finite non-negative ZEC value");
    const double z = std::round(zec * static_cast<double>(kZatoshiPerZec));
    if (z > static_cast<double>(std::numeric_limits<std::uint64_t>::max()))
        throw Error(ErrorCode::Malformed, "amount overflows zatoshi range");
    return Amount(static_cast<std::uint64_t>(z));
}

Amount& Amount::operator+=(Amount o) {
    if (zatoshi_ > std::numeric_limits<std::uint64_t>::max() - o.zatoshi_)
        throw std::overflow_error("amount overflow");
    zatoshi_ += o.zatoshi_;
    return *this;
}

Amount& Amount::operator-=(Amount o) {
    if (o.zatoshi_ > zatoshi_)
        throw std::underflow_error("amount would go negative");
    zatoshi_ -= o.zatoshi_;
    return *this;
}

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::SchedulingInPast: return "SchedulingInPast";
    case ErrorCode::TransactionRejected: return "TransactionRejected";
    case ErrorCode::EmptyCascade: return "EmptyCascade";
    case ErrorCode::InsufficientCascades: return "InsufficientCascades";
    case ErrorCode::AmountTooSmall: return "AmountTooSmall";
    case ErrorCode::UnknownTxId: return "UnknownTxId";
    case ErrorCode::MismatchedBaseline: return "MismatchedBaseline";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Malformed: return "Malformed";
    }
    return "?";
}

std::string to_string(const Address& a) {
    return (a.is_transparent() ? "t:" : "z:") + std::to_string(a.id);
}

const char* to_string(TxKind kind) {
    switch (kind) {
    case TxKind::TT: return "TT";
    case TxKind::TZ: return "TZ";
    case TxKind::ZT: return "ZT";
    case TxKind::ZZ: return "ZZ";
    }
    return "?";
}

std::optional<TxKind> parse_tx_kind(std::string_view s) {
    if (s == "TT") return TxKind::TT;
    if (s == "TZ") return TxKind::TZ;
    if (s == "ZT") return TxKind::ZT;
    if (s == "ZZ") return TxKind::ZZ;
    return std::nullopt;
}

const char* to_string(Rejection r) {
    switch (r) {
    case Rejection::ShapeViolation: return "ShapeViolation";
    case Rejection::ConservationViolation: return "ConservationViolation";
    case Rejection::UnfundedInput: return "UnfundedInput";
    case Rejection::DuplicateTxId: return "DuplicateTxId";
    }
    return "?";
}

RejectedTransaction::RejectedTransaction(TxId id, Rejection reason)
    : Error(ErrorCode::TransactionRejected, "tx " + std::to_string(id) + " rejected: " + to_string(reason)),
      id_(id), reason_(reason) {}

namespace {

Amount sum(const std::vector<Endpoint>& eps) {
    Amount total;
    for (const auto& e : eps) total += e.amount;
    return total;
}

bool all_of_kind(const std::vector<Endpoint>& eps, AddressKind kind) {
    return std::all_of(eps.begin(), eps.end(), [kind](const Endpoint& e) { return e.address.kind == kind; });
}

} // namespace

Amount Transaction::input_total() const { return sum(inputs); }
Amount Transaction::output_total() const { return sum(outputs); }

bool is_naive_deposit(const Transaction& tx) {
    return tx.kind == TxKind::TZ &&
           std::any_of(tx.outputs.begin(), tx.outputs.end(), [](const Endpoint& e) { return e.amount.is_zero(); });
}

bool has_valid_shape(const Transaction& tx) {
    if (tx.inputs.empty() || tx.outputs.empty()) return false;
    constexpr auto T = AddressKind::Transparent;
    constexpr auto Z = AddressKind::Shielded;
    switch (tx.kind) {
    case TxKind::TT:
        return all_of_kind(tx.inputs, T) && all_of_kind(tx.outputs, T);
    case TxKind::TZ:
        return all_of_kind(tx.inputs, T) && all_of_kind(tx.outputs, Z) && tx.outputs.size() == 2 &&
               tx.outputs[0].address != tx.outputs[1].address;
    case TxKind::ZT:
        return all_of_kind(tx.inputs, Z) && all_of_kind(tx.outputs, T);
    case TxKind::ZZ:
        return all_of_kind(tx.inputs, Z) && all_of_kind(tx.outputs, Z);
    }
    return false;
}

PublicTxView public_view(const Transaction& tx, DepositVisibility visibility) {
    PublicTxView v;
    v.id = tx.id;
    v.kind = tx.kind;
    v.timestamp = tx.timestamp;
    switch (tx.kind) {
    case TxKind::TT:
        for (const auto& e : tx.inputs) v.visible_endpoints.push_back(e.address);
        for (const auto& e : tx.outputs) v.visible_endpoints.push_back(e.address);
        v.visible_amount = tx.output_total();
        break;
    case TxKind::TZ:
        for (const auto& e : tx.inputs) v.visible_endpoints.push_back(e.address);
        v.visible_amount = tx.input_total();
        if (visibility == DepositVisibility::PerOutput)
            for (const auto& e : tx.outputs) v.visible_output_amounts.push_back(e.amount);
        break;
    case TxKind::ZT:
        for (const auto& e : tx.outputs) v.visible_endpoints.push_back(e.address);
        v.visible_amount = tx.output_total();
        break;
    case TxKind::ZZ:
        break;
    }
    // A well-formed tx never lists a shielded endpoint on a visible side, but
    // the projection must hold even for a malformed one.
    std::erase_if(v.visible_endpoints, [](const Address& a) { return a.is_shielded(); });
    return v;
}

std::vector<PublicTxView> public_views(std::span<const Transaction> txs, DepositVisibility visibility) {
    std::vector<PublicTxView> out;
    out.reserve(txs.size());
    for (const auto& tx : txs) out.push_back(public_view(tx, visibility));
    return out;
}

void Ledger::mint(Address to, Amount value) {
    if (!to.is_transparent())
        throw Error(ErrorCode::Malformed, "can only mint to a transparent address");
    transparent_[to] += value;
    transparent_sum_ += value;
    supply_ += value;
}

std::optional<Rejection> Ledger::validate(const Transaction& tx) const {
    if (contains(tx.id)) return Rejection::DuplicateTxId;
    if (!has_valid_shape(tx)) return Rejection::ShapeViolation;
    if (tx.input_total() != tx.output_total()) return Rejection::ConservationViolation;

    std::map<Address, Amount> spent;
    for (const auto& in : tx.inputs) spent[in.address] += in.amount;
    for (const auto& [addr, amount] : spent) {
        if (balance(addr) < amount) return Rejection::UnfundedInput;
    }
    return std::nullopt;
}

void Ledger::apply(const Transaction& tx) {
    if (auto r = validate(tx)) throw RejectedTransaction(tx.id, *r);

    for (const auto& in : tx.inputs) {
        if (in.address.is_transparent()) {
            transparent_[in.address] -= in.amount;
            transparent_sum_ -= in.amount;
        } else {
            shielded_[in.address] -= in.amount;
            shielded_sum_ -= in.amount;
        }
    }
    for (const auto& out : tx.outputs) {
        if (out.address.is_transparent()) {
            transparent_[out.address] += out.amount;
            transparent_sum_ += out.amount;
        } else {
            shielded_[out.address] += out.amount;
            shielded_sum_ += out.amount;
        }
    }

    if (tx.kind == TxKind::TZ) pool_ += tx.output_total();
    if (tx.kind == TxKind::ZT) pool_ -= tx.input_total();

    index_.emplace(tx.id, txs_.size());
    txs_.push_back(tx);
}

const Transaction* Ledger::find(TxId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &txs_[it->second];
}

Amount Ledger::balance(const Address& a) const {
    const auto& book = a.is_transparent() ? transparent_ : shielded_;
    auto it = book.find(a);
    return it == book.end() ? Amount{} : it->second;
}

Amount Ledger::transparent_total() const {
    Amount total;
    for (const auto& [_, v] : transparent_) total += v;
    return total;
}

Amount Ledger::shielded_total() const {
    Amount total;
    for (const auto& [_, v] : shielded_) total += v;
    return total;
}

bool Ledger::conserved() const {
    return pool_ == shielded_sum_ && pool_ + transparent_sum_ == supply_;
}

std::vector<TrueLink> derive_true_links(std::span<const Transaction> txs) {
    std::map<Address, std::set<TxId>> provenance;
    std::set<TrueLink> links;
    for (const auto& tx : txs) {
        std::set<TxId> origin;
        if (tx.kind == TxKind::TZ) {
            origin.insert(tx.id);
        } else {
            for (const auto& in : tx.inputs) {
                if (!in.address.is_shielded()) continue;
                auto it = provenance.find(in.address);
                if (it != provenance.end()) origin.insert(it->second.begin(), it->second.end());
            }
        }
        if (tx.kind == TxKind::ZT) {
            for (TxId d : origin) links.insert({d, tx.id});
        } else if (tx.kind == TxKind::TZ || tx.kind == TxKind::ZZ) {
            for (const auto& out : tx.outputs) {
                if (out.amount.is_zero()) continue;
                provenance[out.address].insert(origin.begin(), origin.end());
            }
        }
    }
    return {links.begin(), links.end()};
}

} // namespace zmix
