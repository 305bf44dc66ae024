#include <zmix/mixnet.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace zmix;

namespace {

Cascade make_cascade(std::size_t length, Rng& rng, std::uint64_t base = 1000, MixBehavior behavior = MixBehavior::Honest) {
    Cascade c;
    for (std::size_t p = 0; p < length; ++p) {
        MixNode m;
        m.id = static_cast<std::uint32_t>(p);
        m.addr = NetAddr{base + p};
        m.key = random_key(rng);
        m.position = p;
        m.cascade_length = length;
        m.behavior = behavior;
        c.nodes.push_back(m);
    }
    return c;
}

Transaction sample_tx(TxId id, Rng& rng) {
    Transaction tx{id, TxKind::ZT, {}, {}, rng.next() % 1000};
    const auto n_in = rng.uniform_int(1, 3);
    for (std::uint64_t i = 0; i < n_in; ++i)
        tx.inputs.push_back({Address::shielded(rng.next() % 1'000'000), Amount(rng.next() % 10'000'000'000ULL)});
    tx.outputs.push_back({Address::transparent(rng.next() % 1'000'000), Amount(rng.next() % 10'000'000'000ULL)});
    return tx;
}

class BothSealers : public ::testing::TestWithParam<SealingScheme> {};

} // namespace

TEST(Codec, TransactionRoundTrip) {
    Rng rng(3);
    for (TxId id = 0; id < 200; ++id) {
        const auto tx = sample_tx(id, rng);
        EXPECT_EQ(decode_transaction(encode_transaction(tx)), tx);
    }
}

TEST(Codec, TruncatedInputIsMalformed) {
    Rng rng(3);
    const Bytes b = encode_transaction(sample_tx(1, rng));
    for (std::size_t n = 0; n < b.size(); ++n) EXPECT_THROW(decode_transaction(std::span(b).first(n)), Error);
}

TEST_P(BothSealers, SealOpenRoundTripAndWrongKey) {
    auto sealer = make_sealer(GetParam());
    Rng rng(1);
    const auto k1 = random_key(rng), k2 = random_key(rng);
    Bytes msg(300);
    rng.fill(msg.data(), msg.size());
    const Bytes sealed = sealer->seal(k1, msg, rng);
    EXPECT_EQ(sealed.size(), msg.size() + sealer->overhead());
    EXPECT_EQ(sealer->open(k1, sealed), msg);
    EXPECT_FALSE(sealer->open(k2, sealed).has_value());
}

TEST_P(BothSealers, ThreeLayersPeelToAddressedTwoLayerPacket) {
    auto sealer = make_sealer(GetParam());
    Rng rng(2);
    const Cascade c = make_cascade(3, rng);
    const LayeredPacket p = wrap(sample_tx(1, rng), c, *sealer, rng);
    EXPECT_EQ(p.layers_remaining, 3u);
    EXPECT_EQ(p.destination, c.nodes[0].addr);
    EXPECT_EQ(p.body.size(), kPacketSize);
    const MixAction a = process(c.nodes[0], p, 0, *sealer, rng);
    const auto* f = std::get_if<Forward>(&a);
    ASSERT_NE(f, nullptr);
    EXPECT_EQ(f->next, c.nodes[1].addr);
    EXPECT_EQ(f->packet.destination, c.nodes[1].addr);
    EXPECT_EQ(f->packet.layers_remaining, 2u);
    EXPECT_EQ(f->packet.body.size(), kPacketSize);
    EXPECT_GE(f->at, 1u);
}

TEST_P(BothSealers, SingleMixBroadcastsImmediately) {
    auto sealer = make_sealer(GetParam());
    Rng rng(4);
    const Cascade c = make_cascade(1, rng);
    const auto tx = sample_tx(5, rng);
    const MixAction a = process(c.nodes[0], wrap(tx, c, *sealer, rng), 10, *sealer, rng);
    const auto* b = std::get_if<Broadcast>(&a);
    ASSERT_NE(b, nullptr);
    EXPECT_EQ(b->tx, tx);
    EXPECT_GT(b->at, 10u);
}

TEST_P(BothSealers, PeelingEveryLayerRecoversTheTransaction) {
    auto sealer = make_sealer(GetParam());
    Rng rng(5);
    for (std::size_t length = 1; length <= 8; ++length) {
        const Cascade c = make_cascade(length, rng);
        for (int trial = 0; trial < 20; ++trial) {
            const auto tx = sample_tx(static_cast<TxId>(trial), rng);
            LayeredPacket p = wrap(tx, c, *sealer, rng);
            for (std::size_t hop = 0; hop < length; ++hop) {
                MixAction a = process(c.nodes[hop], p, 0, *sealer, rng);
                if (hop + 1 < length) {
                    auto* f = std::get_if<Forward>(&a);
                    ASSERT_NE(f, nullptr) << "length " << length << " hop " << hop;
                    p = std::move(f->packet);
                } else {
                    auto* b = std::get_if<Broadcast>(&a);
                    ASSERT_NE(b, nullptr);
                    EXPECT_EQ(b->tx, tx);
                }
            }
        }
    }
}

TEST_P(BothSealers, EveryFlippedSealedByteFailsIntegrity) {
    auto sealer = make_sealer(GetParam());
    Rng rng(6);
    for (std::size_t length : {1u, 3u}) {
        const Cascade c = make_cascade(length, rng);
        const LayeredPacket p = wrap(sample_tx(1, rng), c, *sealer, rng);
        const std::size_t sealed = sealed_size(0, *sealer);
        for (std::size_t i = 0; i < sealed; ++i) {
            LayeredPacket bad = p;
            bad.body[i] ^= static_cast<std::uint8_t>(1u << (i % 8));
            const MixAction a = process(c.nodes[0], bad, 0, *sealer, rng);
            const auto* d = std::get_if<Drop>(&a);
            ASSERT_NE(d, nullptr) << "byte " << i;
            ASSERT_EQ(d->reason, DropReason::IntegrityFailure) << "byte " << i;
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Sealers, BothSealers, ::testing::Values(SealingScheme::KeyedPrp, SealingScheme::Sodium),
                         [](const auto& info) { return info.param == SealingScheme::KeyedPrp ? "KeyedPrp" : "Sodium"; });

TEST(Mix, WrongHopAndDropper) {
    auto sealer = make_sealer(SealingScheme::KeyedPrp);
    Rng rng(7);
    const Cascade c = make_cascade(3, rng);
    const LayeredPacket p = wrap(sample_tx(1, rng), c, *sealer, rng);
    const MixAction wrong = process(c.nodes[1], p, 0, *sealer, rng);
    EXPECT_EQ(std::get<Drop>(wrong).reason, DropReason::WrongHop);

    MixNode evil = c.nodes[0];
    evil.behavior = MixBehavior::Dropper;
    EXPECT_EQ(std::get<Drop>(process(evil, p, 0, *sealer, rng)).reason, DropReason::Malicious);
}

TEST(Mix, EmptyCascadeIsRejected) {
    auto sealer = make_sealer(SealingScheme::KeyedPrp);
    Rng rng(8);
    try {
        wrap(sample_tx(1, rng), Cascade{}, *sealer, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyCascade);
    }
}

TEST(Mix, CoverAndRealPacketsLookAlikeAtEveryHop) {
    auto sealer = make_sealer(SealingScheme::KeyedPrp);
    Rng rng(9);
    const Cascade c = make_cascade(3, rng);
    LayeredPacket real = wrap(sample_tx(1, rng), c, *sealer, rng);
    LayeredPacket cover = wrap_cover(c, ExitInstruction::LoopCover, *sealer, rng);
    for (std::size_t hop = 0; hop + 1 < 3; ++hop) {
        EXPECT_EQ(real.destination, cover.destination);
        EXPECT_EQ(real.layers_remaining, cover.layers_remaining);
        EXPECT_EQ(real.body.size(), cover.body.size());
        auto fr = std::get<Forward>(process(c.nodes[hop], real, 0, *sealer, rng));
        auto fc = std::get<Forward>(process(c.nodes[hop], cover, 0, *sealer, rng));
        EXPECT_EQ(fr.next, fc.next);
        real = std::move(fr.packet);
        cover = std::move(fc.packet);
    }
    EXPECT_TRUE(std::holds_alternative<Broadcast>(process(c.nodes[2], real, 0, *sealer, rng)));
    EXPECT_EQ(std::get<Drop>(process(c.nodes[2], cover, 0, *sealer, rng)).reason, DropReason::CoverAtExit);
}

TEST(Delay, MeanWithinTwoPercent) {
    Rng rng(10);
    const DelayPolicy policy{50.0};
    double sum = 0;
    for (int i = 0; i < 100'000; ++i) {
        const Tick d = sample_delay(policy, rng);
        ASSERT_GE(d, 1u);
        sum += static_cast<double>(d);
    }
    EXPECT_NEAR(sum / 100'000.0, 50.0, 1.0);
}

TEST(Delay, FixedSeedFixedSequence) {
    Rng a(11), b(11);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_delay({50.0}, a), sample_delay({50.0}, b));
    EXPECT_THROW(sample_delay({0.0}, a), Error);
}

TEST(Cover, PoissonCountWithinThreeSigma) {
    Rng rng(12);
    EXPECT_TRUE(poisson_arrivals(0.0, 0, 1'000'000, rng).empty());
    const auto arrivals = poisson_arrivals(0.01, 0, 1'000'000, rng);
    EXPECT_NEAR(static_cast<double>(arrivals.size()), 10'000.0, 300.0);
    EXPECT_TRUE(std::is_sorted(arrivals.begin(), arrivals.end()));
    EXPECT_LT(arrivals.back(), 1'000'000u);
}

namespace {

struct Harness {
    Scheduler sched;
    Ledger ledger;
    Network net{sched, ledger};
    std::unique_ptr<Mixnet> mix;

    explicit Harness(MixnetConfig cfg, std::uint64_t seed = 1) {
        mix = std::make_unique<Mixnet>(cfg, net, seed, 1000);
        for (std::uint64_t u = 0; u < 100; ++u) ledger.mint(Address::transparent(u), Amount(1'000'000));
    }

    Transaction tx(TxId id, std::uint64_t from) {
        return {id, TxKind::TT, {{Address::transparent(from), Amount(1)}}, {{Address::transparent(10'000 + id), Amount(1)}}, 0};
    }
};

} // namespace

TEST(Redundancy, TwoCascadesSurviveOneDropper) {
    MixnetConfig cfg;
    cfg.cascades = 2;
    cfg.droppers = {{0, 1}};
    cfg.redundancy = 2;
    Harness h(cfg);
    h.mix->submit(NetAddr{1}, h.tx(1, 0));
    h.sched.run();
    EXPECT_EQ(h.net.trace().size(), 1u);
    EXPECT_TRUE(h.ledger.contains(1));
}

TEST(Redundancy, OneCascadeThroughDropperNeverArrives) {
    MixnetConfig cfg;
    cfg.cascades = 2;
    cfg.droppers = {{0, 2}};
    Harness h(cfg);
    const std::size_t only_dropper[] = {0};
    h.mix->send_redundant(NetAddr{1}, h.tx(1, 0), only_dropper, 1);
    h.sched.run();
    EXPECT_TRUE(h.net.trace().empty());
    EXPECT_FALSE(h.ledger.contains(1));
    EXPECT_EQ(h.mix->stats().drops.at(DropReason::Malicious), 1u);
}

TEST(Redundancy, ThreeHonestCascadesBroadcastThriceApplyOnce) {
    MixnetConfig cfg;
    cfg.cascades = 3;
    cfg.redundancy = 3;
    Harness h(cfg);
    h.mix->submit(NetAddr{1}, h.tx(1, 0));
    h.sched.run();
    EXPECT_EQ(h.mix->stats().exit_broadcasts, 3u);
    EXPECT_EQ(h.net.trace().size(), 3u);
    EXPECT_EQ(h.ledger.size(), 1u);
}

TEST(Redundancy, KOutsideRangeIsInsufficient) {
    MixnetConfig cfg;
    cfg.cascades = 2;
    Harness h(cfg);
    const std::size_t both[] = {0, 1};
    for (std::size_t k : {0u, 3u}) {
        try {
            h.mix->send_redundant(NetAddr{1}, h.tx(1, 0), both, k);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InsufficientCascades);
        }
    }
}

TEST(Mixnet, LayerIsolationAndExitOrigins) {
    MixnetConfig cfg;
    cfg.cascades = 2;
    cfg.length = 4;
    cfg.cover_rate = 0.001;
    cfg.mix_cover_rate = 0.001;
    Harness h(cfg);
    std::set<NetAddr> users;
    for (std::uint64_t u = 0; u < 100; ++u) {
        const NetAddr ua{1 + u};
        users.insert(ua);
        h.mix->emit_cover(ua, cfg.cover_rate, 0, 5000);
        h.sched.schedule(u * 10, [&h, u, ua] { h.mix->submit(ua, h.tx(u + 1, u)); });
    }
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t p = 0; p + 1 < 4; ++p) h.mix->emit_mix_cover({c, p}, cfg.mix_cover_rate, 0, 5000);
    h.sched.run();

    const auto exits = h.mix->exit_addrs();
    for (const auto& e : h.net.trace()) EXPECT_TRUE(exits.contains(e.origin));
    EXPECT_EQ(h.ledger.size(), 100u);

    for (const auto& c : h.mix->cascades()) {
        for (std::size_t p = 0; p < c.length(); ++p) {
            std::set<NetAddr> expected;
            if (p == 0) {
                for (const auto& w : h.net.wire())
                    if (w.to == c.nodes[0].addr && users.contains(w.from)) expected.insert(w.from);
            } else {
                expected.insert(c.nodes[p - 1].addr);
            }
            expected.insert(p + 1 < c.length() ? c.nodes[p + 1].addr : kP2PNetwork);
            EXPECT_EQ(h.mix->observed().at(c.nodes[p].addr), expected) << "cascade " << c.id << " mix " << p;
        }
    }
    for (const auto& w : h.net.wire()) EXPECT_EQ(w.size, kPacketSize);
}
