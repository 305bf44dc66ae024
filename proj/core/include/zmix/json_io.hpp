#pragma once

#include <zmix/adversary.hpp>
#include <zmix/ledger.hpp>

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <vector>

namespace zmix {

nlohmann::json to_json(const PublicTxView& v);
PublicTxView view_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Transaction& tx);
Transaction transaction_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AttackScore& s);
AttackScore attack_score_from_json(const nlohmann::json& j);

/// One PublicTxView per line.
void write_public_log(std::ostream& out, const std::vector<PublicTxView>& views);
std::vector<PublicTxView> read_public_log(std::istream& in);

/// Full transactions, one per line, with `naive` set on zero-split
/// deposits and `owner` on user-originated transactions when known.
void write_ground_truth(std::ostream& out, const std::vector<Transaction>& txs,
                        const std::map<TxId, std::uint64_t>& owners = {});

} // namespace zmix
