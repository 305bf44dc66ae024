#include <zmix/json_io.hpp>

#include <istream>
#include <ostream>
#include <string>

namespace zmix {

using nlohmann::json;

namespace {

Address parse_address(const std::string& s) {
    if (s.size() < 3 || s[1] != ':' || (s[0] != 't' && s[0] != 'z'))
        throw Error(ErrorCode::Malformed, "bad address '" + s + "'");
    const std::uint64_t id = std::stoull(s.substr(2));
    return s[0] == 't' ? Address::transparent(id) : Address::shielded(id);
}

json endpoints_json(const std::vector<Endpoint>& eps) {
    json arr = json::array();
    for (const auto& e : eps) arr.push_back({{"address", to_string(e.address)}, {"amount", e.amount.zatoshi()}});
    return arr;
}

std::vector<Endpoint> endpoints_from(const json& arr) {
    std::vector<Endpoint> out;
    for (const auto& e : arr)
        out.push_back({parse_address(e.at("address").get<std::string>()), Amount(e.at("amount").get<std::uint64_t>())});
    return out;
}

TxKind kind_from(const json& j) {
    auto k = parse_tx_kind(j.at("kind").get<std::string>());
    if (!k) throw Error(ErrorCode::Malformed, "bad tx kind");
    return *k;
}

} // namespace

json to_json(const PublicTxView& v) {
    json endpoints = json::array();
    for (const auto& a : v.visible_endpoints) endpoints.push_back(to_string(a));
    json j{{"id", v.id}, {"kind", to_string(v.kind)}, {"endpoints", endpoints}, {"timestamp", v.timestamp}};
    j["amount"] = v.visible_amount ? json(v.visible_amount->zatoshi()) : json();
    if (!v.visible_output_amounts.empty()) {
        json outs = json::array();
        for (Amount a : v.visible_output_amounts) outs.push_back(a.zatoshi());
        j["output_amounts"] = outs;
    }
    return j;
}

PublicTxView view_from_json(const json& j) {
    try {
        PublicTxView v;
        v.id = j.at("id").get<TxId>();
        v.kind = kind_from(j);
        v.timestamp = j.at("timestamp").get<Tick>();
        for (const auto& a : j.at("endpoints")) v.visible_endpoints.push_back(parse_address(a.get<std::string>()));
        if (j.contains("amount") && !j["amount"].is_null()) v.visible_amount = Amount(j["amount"].get<std::uint64_t>());
        if (j.contains("output_amounts"))
            for (const auto& a : j["output_amounts"]) v.visible_output_amounts.emplace_back(a.get<std::uint64_t>());
        return v;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Malformed, std::string("bad view: ") + e.what());
    }
}

json to_json(const Transaction& tx) {
    return json{{"id", tx.id},
                {"kind", to_string(tx.kind)},
                {"inputs", endpoints_json(tx.inputs)},
                {"outputs", endpoints_json(tx.outputs)},
                {"timestamp", tx.timestamp}};
}

Transaction transaction_from_json(const json& j) {
    try {
        Transaction tx;
        tx.id = j.at("id").get<TxId>();
        tx.kind = kind_from(j);
        tx.inputs = endpoints_from(j.at("inputs"));
        tx.outputs = endpoints_from(j.at("outputs"));
        tx.timestamp = j.at("timestamp").get<Tick>();
        return tx;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Malformed, std::string("bad transaction: ") + e.what());
    }
}

json to_json(const AttackScore& s) {
    return json{{"precision", s.precision},
                {"recall", s.recall},
                {"precision_defined", s.precision_defined},
                {"recall_defined", s.recall_defined},
                {"mean_anonymity_set", s.mean_anonymity_set},
                {"median_anonymity_set", s.median_anonymity_set},
                {"mean_entropy_bits", s.mean_entropy_bits},
                {"asserted", s.asserted},
                {"correct", s.correct},
                {"truth_size", s.truth_size},
                {"scored_targets", s.scored_targets}};
}

AttackScore attack_score_from_json(const json& j) {
    AttackScore s;
    s.precision = j.at("precision").get<double>();
    s.recall = j.at("recall").get<double>();
    s.precision_defined = j.at("precision_defined").get<bool>();
    s.recall_defined = j.at("recall_defined").get<bool>();
    s.mean_anonymity_set = j.at("mean_anonymity_set").get<double>();
    s.median_anonymity_set = j.at("median_anonymity_set").get<double>();
    s.mean_entropy_bits = j.at("mean_entropy_bits").get<double>();
    s.asserted = j.at("asserted").get<std::size_t>();
    s.correct = j.at("correct").get<std::size_t>();
    s.truth_size = j.at("truth_size").get<std::size_t>();
    s.scored_targets = j.at("scored_targets").get<std::size_t>();
    return s;
}

void write_public_log(std::ostream& out, const std::vector<PublicTxView>& views) {
    for (const auto& v : views) out << to_json(v).dump() << '\n';
}

std::vector<PublicTxView> read_public_log(std::istream& in) {
    std::vector<PublicTxView> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(view_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::Malformed, std::string("bad log line: ") + e.what());
        }
    }
    return out;
}

void write_ground_truth(std::ostream& out, const std::vector<Transaction>& txs,
                        const std::map<TxId, std::uint64_t>& owners) {
    for (const auto& tx : txs) {
        json j = to_json(tx);
        if (tx.kind == TxKind::TZ) j["naive"] = is_naive_deposit(tx);
        if (auto it = owners.find(tx.id); it != owners.end()) j["owner"] = it->second;
        out << j.dump() << '\n';
    }
}

} // namespace zmix
