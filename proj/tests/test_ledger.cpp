#include "oracles.hpp"

#include <zmix/json_io.hpp>
#include <zmix/ledger.hpp>
#include <zmix/rng.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace zmix;

namespace {

Amount zec(double v) { return Amount::from_zec(v); }
Address t(std::uint64_t id) { return Address::transparent(id); }
Address z(std::uint64_t id) { return Address::shielded(id); }

Transaction tz(TxId id, Address from, Amount total, Address z1, Amount a, Address z2, Amount b, Tick ts = 0) {
    return {id, TxKind::TZ, {{from, total}}, {{z1, a}, {z2, b}}, ts};
}

} // namespace

TEST(Ledger, ZeroSplitDepositValidates) {
    Ledger l;
    const Amount x1 = zec(3.25);
    l.mint(t(1), x1);
    EXPECT_EQ(l.validate(tz(1, t(1), x1, z(1), x1, z(4), Amount{})), std::nullopt);
}

TEST(Ledger, SingleShieldedOutputIsShapeViolation) {
    Ledger l;
    l.mint(t(1), zec(1));
    const Transaction tx{1, TxKind::TZ, {{t(1), zec(1)}}, {{z(1), zec(1)}}, 0};
    EXPECT_EQ(l.validate(tx), Rejection::ShapeViolation);
}

TEST(Ledger, TwoOutputsToSameShieldedAddressIsShapeViolation) {
    Ledger l;
    l.mint(t(1), zec(1));
    EXPECT_EQ(l.validate(tz(1, t(1), zec(1), z(1), zec(1), z(1), Amount{})), Rejection::ShapeViolation);
}

TEST(Ledger, OverspendIsUnfunded) {
    Ledger l;
    l.mint(t(1), zec(1));
    const Transaction tx{1, TxKind::TT, {{t(1), zec(2)}}, {{t(2), zec(2)}}, 0};
    EXPECT_EQ(l.validate(tx), Rejection::UnfundedInput);
}

TEST(Ledger, SameAddressTwiceIsSummedForFunding) {
    Ledger l;
    l.mint(t(1), zec(1));
    const Transaction tx{1, TxKind::TT, {{t(1), zec(0.6)}, {t(1), zec(0.6)}}, {{t(2), zec(1.2)}}, 0};
    EXPECT_EQ(l.validate(tx), Rejection::UnfundedInput);
}

TEST(Ledger, ConservationAndDuplicateRejections) {
    Ledger l;
    l.mint(t(1), zec(2));
    const Transaction bad{1, TxKind::TT, {{t(1), zec(2)}}, {{t(2), zec(1)}}, 0};
    EXPECT_EQ(l.validate(bad), Rejection::ConservationViolation);
    const Transaction ok{1, TxKind::TT, {{t(1), zec(2)}}, {{t(2), zec(2)}}, 0};
    l.apply(ok);
    EXPECT_EQ(l.validate(ok), Rejection::DuplicateTxId);
    try {
        l.apply(ok);
        FAIL() << "duplicate applied";
    } catch (const RejectedTransaction& e) {
        EXPECT_EQ(e.reason(), Rejection::DuplicateTxId);
        EXPECT_EQ(e.code(), ErrorCode::TransactionRejected);
    }
}

TEST(Ledger, MintToShieldedIsRefused) {
    Ledger l;
    EXPECT_THROW(l.mint(z(1), zec(1)), Error);
}

TEST(Ledger, SingleDepositFillsPool) {
    Ledger l;
    l.mint(t(1), zec(7));
    l.apply(tz(1, t(1), zec(7), z(1), zec(7), z(2), Amount{}));
    EXPECT_EQ(l.pool_balance(), zec(7));
    EXPECT_TRUE(l.conserved());
}

TEST(Ledger, DepositThenFullWithdrawalEmptiesPool) {
    Ledger l;
    const Amount x1 = zec(3.25);
    l.mint(t(1), x1);
    l.apply(tz(1, t(1), x1, z(1), x1, z(4), Amount{}));
    l.apply({2, TxKind::ZT, {{z(1), x1}}, {{t(2), x1}}, 1});
    EXPECT_EQ(l.pool_balance(), Amount{});
    EXPECT_EQ(l.balance(t(2)), x1);
    EXPECT_TRUE(l.conserved());
}

TEST(Ledger, RandomValidTransactionsMatchIndependentResum) {
    Rng rng(42);
    Ledger l;
    std::vector<Address> ts, zs;
    std::vector<oracle::Mint> mints;
    for (std::uint64_t i = 1; i <= 10; ++i) {
        l.mint(t(i), Amount(1'000'000'000));
        mints.push_back({0, t(i), 1'000'000'000});
        ts.push_back(t(i));
    }
    std::uint64_t next_t = 100, next_z = 1;
    TxId id = 1;
    while (l.size() < 100) {
        const auto pick = rng.uniform_int(0, 3);
        if (pick <= 1 || zs.empty()) {
            const Address from = ts[rng.uniform_int(0, ts.size() - 1)];
            const Amount bal = l.balance(from);
            if (bal.zatoshi() < 2) continue;
            const Amount v(rng.uniform_int(1, bal.zatoshi()));
            const Amount a(rng.uniform_int(0, v.zatoshi()));
            const Address z1 = z(next_z++), z2 = z(next_z++);
            l.apply(tz(id++, from, v, z1, a, z2, v - a));
            zs.push_back(z1);
            zs.push_back(z2);
        } else if (pick == 2) {
            const Address from = zs[rng.uniform_int(0, zs.size() - 1)];
            const Amount bal = l.balance(from);
            if (bal.is_zero()) continue;
            const Address to = z(next_z++);
            l.apply({id++, TxKind::ZZ, {{from, bal}}, {{to, bal}}, 0});
            zs.push_back(to);
        } else {
            const Address from = zs[rng.uniform_int(0, zs.size() - 1)];
            const Amount bal = l.balance(from);
            if (bal.is_zero()) continue;
            const Amount v(rng.uniform_int(1, bal.zatoshi()));
            const Address to = t(next_t++);
            l.apply({id++, TxKind::ZT, {{from, v}}, {{to, v}}, 0});
            ts.push_back(to);
        }
        ASSERT_TRUE(l.conserved());
    }
    std::uint64_t deposits = 0, withdrawals = 0;
    for (const auto& tx : l.transactions()) {
        if (tx.kind == TxKind::TZ) deposits += tx.input_total().zatoshi();
        if (tx.kind == TxKind::ZT) withdrawals += tx.input_total().zatoshi();
    }
    EXPECT_EQ(l.pool_balance().zatoshi(), deposits - withdrawals);
    EXPECT_EQ(l.shielded_total(), l.pool_balance());
    EXPECT_EQ(l.pool_balance() + l.transparent_total(), l.total_supply());
    EXPECT_TRUE(oracle::replay_conservation(mints, l.transactions()).every_prefix_conserved);
    for (const auto& tx : l.transactions()) EXPECT_TRUE(has_valid_shape(tx));
}

TEST(PublicView, TransparentIsIdentityProjection) {
    const auto v = public_view({1, TxKind::TT, {{t(1), zec(5)}}, {{t(2), zec(5)}}, 3});
    EXPECT_EQ(v.visible_endpoints, (std::vector<Address>{t(1), t(2)}));
    EXPECT_EQ(v.visible_amount, zec(5));
    EXPECT_EQ(v.timestamp, 3u);
}

TEST(PublicView, PrivateTransferShowsKindAndTimeOnly) {
    const auto v = public_view({9, TxKind::ZZ, {{z(5), zec(1)}}, {{z(6), zec(1)}}, 12});
    EXPECT_EQ(v.kind, TxKind::ZZ);
    EXPECT_EQ(v.timestamp, 12u);
    EXPECT_TRUE(v.visible_endpoints.empty());
    EXPECT_FALSE(v.visible_amount.has_value());
    EXPECT_TRUE(v.visible_output_amounts.empty());
}

TEST(PublicView, DepositShowsSourceAndTotal) {
    const Amount x1 = zec(3.25);
    const Transaction tx = tz(1, t(1), x1, z(1), x1, z(4), Amount{});
    const auto v = public_view(tx);
    EXPECT_EQ(v.visible_endpoints, std::vector<Address>{t(1)});
    EXPECT_EQ(v.visible_amount, x1);
    EXPECT_TRUE(v.visible_output_amounts.empty());
    const auto per = public_view(tx, DepositVisibility::PerOutput);
    EXPECT_EQ(per.visible_output_amounts, (std::vector<Amount>{x1, Amount{}}));
    EXPECT_EQ(per.visible_endpoints, std::vector<Address>{t(1)});
}

TEST(PublicView, SerializedViewsNeverNameShieldedAddresses) {
    Rng rng(7);
    std::vector<Transaction> txs;
    for (TxId id = 1; id <= 200; ++id) {
        const auto kind = static_cast<TxKind>(rng.uniform_int(0, 3));
        Transaction tx{id, kind, {}, {}, id};
        const bool zin = kind == TxKind::ZT || kind == TxKind::ZZ;
        const bool zout = kind == TxKind::TZ || kind == TxKind::ZZ;
        tx.inputs.push_back({zin ? z(id) : t(id), zec(1)});
        tx.outputs.push_back({zout ? z(1000 + id) : t(1000 + id), zec(1)});
        if (kind == TxKind::TZ) tx.outputs.push_back({z(5000 + id), Amount{}});
        txs.push_back(tx);
    }
    for (auto vis : {DepositVisibility::Total, DepositVisibility::PerOutput}) {
        std::ostringstream out;
        write_public_log(out, public_views(txs, vis));
        EXPECT_EQ(out.str().find("z:"), std::string::npos);
        std::istringstream in(out.str());
        EXPECT_EQ(read_public_log(in), public_views(txs, vis));
    }
}

TEST(GroundTruth, LinksFollowValueThroughPrivateHops) {
    std::vector<Transaction> txs{
        tz(1, t(1), zec(2), z(1), zec(2), z(2), Amount{}),
        tz(2, t(2), zec(3), z(3), zec(1), z(4), zec(2)),
        {3, TxKind::ZZ, {{z(1), zec(2)}, {z(3), zec(1)}}, {{z(5), zec(3)}}, 0},
        {4, TxKind::ZT, {{z(5), zec(3)}}, {{t(9), zec(3)}}, 0},
        {5, TxKind::ZT, {{z(4), zec(2)}}, {{t(10), zec(2)}}, 0},
    };
    const auto links = derive_true_links(txs);
    std::set<std::pair<TxId, TxId>> got;
    for (const auto& l : links) got.insert({l.deposit, l.withdrawal});
    EXPECT_EQ(got, oracle::true_links(txs));
    EXPECT_EQ(got, (std::set<std::pair<TxId, TxId>>{{1, 4}, {2, 4}, {2, 5}}));
}

TEST(GroundTruth, NaiveFlagOnZeroSplitDeposits) {
    std::ostringstream out;
    write_ground_truth(out, {tz(1, t(1), zec(2), z(1), zec(2), z(2), Amount{}),
                             tz(2, t(2), zec(2), z(3), zec(1), z(4), zec(1))},
                       {{1, 0}, {2, 1}});
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_TRUE(nlohmann::json::parse(line).at("naive").get<bool>());
    std::getline(in, line);
    EXPECT_FALSE(nlohmann::json::parse(line).at("naive").get<bool>());
    EXPECT_EQ(nlohmann::json::parse(line).at("owner").get<int>(), 1);
}

TEST(Amount, CheckedArithmetic) {
    Amount a(5);
    EXPECT_THROW(a -= Amount(6), std::underflow_error);
    Amount big(std::numeric_limits<std::uint64_t>::max());
    EXPECT_THROW(big += Amount(1), std::overflow_error);
    EXPECT_EQ(Amount::from_zec(0.01).zatoshi(), 1'000'000u);
    EXPECT_THROW(Amount::from_zec(-1), Error);
}
