#include <zmix/scenario.hpp>

#include <benchmark/benchmark.h>

using namespace zmix;

namespace {

std::vector<PublicTxView> random_ledger(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Transaction> txs;
    for (TxId id = 1; id <= n; ++id) {
        const Amount v(rng.uniform_int(1, 500) * 1'000'000);
        if (rng.bernoulli(0.5))
            txs.push_back({id, TxKind::TZ, {{Address::transparent(id), v}},
                           {{Address::shielded(2 * id), v}, {Address::shielded(2 * id + 1), Amount{}}}, id});
        else
            txs.push_back({id, TxKind::ZT, {{Address::shielded(id), v}}, {{Address::transparent(id), v}}, id});
    }
    return public_views(txs, DepositVisibility::PerOutput);
}

void BM_LinkByValue(benchmark::State& state) {
    const auto views = random_ledger(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(link_by_value(views));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LinkByValue)->Range(1 << 8, 1 << 14);

void BM_RecommendSplit(benchmark::State& state) {
    const auto hist = build_histogram(random_ledger(static_cast<std::size_t>(state.range(0)), 2));
    Rng rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(recommend_split(Amount(rng.uniform_int(2, 1000) * 1'000'000), hist));
}
BENCHMARK(BM_RecommendSplit)->Range(1 << 8, 1 << 14);

void BM_WrapAndPeel(benchmark::State& state) {
    auto sealer = make_sealer(static_cast<SealingScheme>(state.range(1)));
    Rng rng(4);
    Cascade cascade;
    const auto length = static_cast<std::size_t>(state.range(0));
    for (std::size_t p = 0; p < length; ++p)
        cascade.nodes.push_back({static_cast<std::uint32_t>(p), NetAddr{100 + p}, random_key(rng), MixBehavior::Honest, {}, p, length});
    const Transaction tx{1, TxKind::ZT, {{Address::shielded(1), Amount(5)}}, {{Address::transparent(2), Amount(5)}}, 0};
    for (auto _ : state) {
        LayeredPacket packet = wrap(tx, cascade, *sealer, rng);
        for (std::size_t p = 0; p + 1 < length; ++p) packet = std::get<Forward>(process(cascade.nodes[p], packet, 0, *sealer, rng)).packet;
        benchmark::DoNotOptimize(process(cascade.nodes.back(), packet, 0, *sealer, rng));
    }
}
BENCHMARK(BM_WrapAndPeel)->ArgsProduct({{1, 3, 5}, {0, 1}});

void BM_Scenario(benchmark::State& state) {
    ScenarioConfig c;
    c.users = static_cast<std::size_t>(state.range(0));
    c.behavior = {0.5, 0.5};
    if (state.range(1)) c.mixnet = MixnetConfig{};
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(c));
}
BENCHMARK(BM_Scenario)->ArgsProduct({{100, 400}, {0, 1}})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
