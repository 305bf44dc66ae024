#pragma once

#include <zmix/types.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace zmix {

enum class AddressKind : std::uint8_t { Transparent, Shielded };

struct Address {
    AddressKind kind = AddressKind::Transparent;
    std::uint64_t id = 0;

    static constexpr Address transparent(std::uint64_t id) { return {AddressKind::Transparent, id}; }
    static constexpr Address shielded(std::uint64_t id) { return {AddressKind::Shielded, id}; }

    bool is_transparent() const { return kind == AddressKind::Transparent; }
    bool is_shielded() const { return kind == AddressKind::Shielded; }

    constexpr auto operator<=>(const Address&) const = default;
};

/// "t:<id>" or "z:<id>".
std::string to_string(const Address& a);

/// TT transparent, TZ shielding deposit, ZT deshielding withdrawal, ZZ private.
enum class TxKind : std::uint8_t { TT, TZ, ZT, ZZ };

const char* to_string(TxKind kind);
std::optional<TxKind> parse_tx_kind(std::string_view s);

struct Endpoint {
    Address address;
    Amount amount;

    bool operator==(const Endpoint&) const = default;
};

struct Transaction {
    TxId id = 0;
    TxKind kind = TxKind::TT;
    std::vector<Endpoint> inputs;
    std::vector<Endpoint> outputs;
    Tick timestamp = 0;

    Amount input_total() const;
    Amount output_total() const;

    bool operator==(const Transaction&) const = default;
};

/// A TZ deposit where one of the two shielded outputs carries nothing.
bool is_naive_deposit(const Transaction& tx);

/// How much of a TZ deposit's value split the public projection carries.
/// Shielded addresses are hidden either way.
enum class DepositVisibility : std::uint8_t {
    Total,     ///< only the deposited sum
    PerOutput, ///< the sum plus the amount of each shielded output
};

/// What a blockchain observer learns about one transaction.
struct PublicTxView {
    TxId id = 0;
    TxKind kind = TxKind::TT;
    std::vector<Address> visible_endpoints;
    std::optional<Amount> visible_amount;
    std::vector<Amount> visible_output_amounts; // TZ under PerOutput only
    Tick timestamp = 0;

    bool operator==(const PublicTxView&) const = default;
};

PublicTxView public_view(const Transaction& tx, DepositVisibility visibility = DepositVisibility::Total);

std::vector<PublicTxView> public_views(std::span<const Transaction> txs,
                                       DepositVisibility visibility = DepositVisibility::Total);

enum class Rejection : std::uint8_t {
    ShapeViolation,
    ConservationViolation,
    UnfundedInput,
    DuplicateTxId,
};

const char* to_string(Rejection r);

class RejectedTransaction : public Error {
public:
    RejectedTransaction(TxId id, Rejection reason);
    TxId tx_id() const { return id_; }
    Rejection reason() const { return reason_; }

private:
    TxId id_;
    Rejection reason_;
};

/// Checks only the endpoint-shape rule of the transaction's kind.
bool has_valid_shape(const Transaction& tx);

/// Balances of transparent and shielded addresses, and the pool they imply.
/// Shielded balances are simulator ground truth; nothing derived from them
/// reaches a PublicTxView.
class Ledger {
public:
    /// Credits a transparent address out of thin air (coinbase stand-in).
    void mint(Address to, Amount value);

    std::optional<Rejection> validate(const Transaction& tx) const;

    /// Throws RejectedTransaction when validate() would not return ok.
    void apply(const Transaction& tx);

    bool contains(TxId id) const { return index_.contains(id); }
    const Transaction* find(TxId id) const;

    const std::vector<Transaction>& transactions() const { return txs_; }
    std::size_t size() const { return txs_.size(); }

    Amount pool_balance() const { return pool_; }
    Amount balance(const Address& a) const;
    Amount total_supply() const { return supply_; }
    /// Recomputed from the per-address books.
    Amount transparent_total() const;
    Amount shielded_total() const;

    /// Running-sum check of pool + transparent == supply and
    /// pool == shielded, maintained on every mint and apply.
    bool conserved() const;

    std::vector<PublicTxView> public_views(DepositVisibility visibility = DepositVisibility::Total) const {
        return zmix::public_views(txs_, visibility);
    }

private:
    std::vector<Transaction> txs_;
    std::unordered_map<TxId, std::size_t> index_;
    std::map<Address, Amount> transparent_;
    std::map<Address, Amount> shielded_;
    Amount pool_;
    Amount supply_;
    Amount transparent_sum_;
    Amount shielded_sum_;
};

/// A (deposit, withdrawal) pair whose value actually flowed through the pool.
struct TrueLink {
    TxId deposit = 0;
    TxId withdrawal = 0;
    auto operator<=>(const TrueLink&) const = default;
};

/// Follows shielded value from TZ outputs through ZZ hops to ZT withdrawals.
/// Every shielded address inherits the set of deposits that ever funded it.
std::vector<TrueLink> derive_true_links(std::span<const Transaction> txs);

} // namespace zmix
