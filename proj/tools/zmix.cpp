// zmix: run, compare and sweep mixnet / shielded-pool scenarios.
//
// Exit status: 0 on success, 2 on a config error, 1 on any other failure.

#include <zmix/scenario.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFailure = 1;

zmix::MetricsReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw zmix::Error(zmix::ErrorCode::Malformed, "cannot open " + path);
    try {
        return zmix::report_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw zmix::Error(zmix::ErrorCode::Malformed, path + ": " + e.what());
    }
}

void print_summary(const zmix::MetricsReport& r) {
    std::cout << "scenario " << r.scenario << " seed " << r.seed << "\n";
    if (r.value_attack)
        std::cout << "  value attack    precision " << r.value_attack->precision << " recall "
                  << r.value_attack->recall << " mean set " << r.value_attack->mean_anonymity_set << "\n";
    if (r.network_attack)
        std::cout << "  network attack  precision " << r.network_attack->precision << " recall "
                  << r.network_attack->recall << " mean user recall " << r.network_mean_user_recall << "\n";
    std::cout << "  delivery " << r.delivery_rate << " latency mean " << r.latency_mean << " p95 " << r.latency_p95
              << " cover " << r.cover_packets << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shielded-pool anonymity simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "Run one scenario and write its report and artifacts");
    run->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory");

    std::string baseline_path, treatment_path;
    auto* cmp = app.add_subcommand("compare", "Per-metric deltas between two reports of one workload");
    cmp->add_option("--baseline", baseline_path, "Baseline report.json")->required()->check(CLI::ExistingFile);
    cmp->add_option("--treatment", treatment_path, "Treatment report.json")->required()->check(CLI::ExistingFile);

    std::string sweep_config, vary, sweep_out = "sweep";
    unsigned threads = 0;
    auto* sw = app.add_subcommand("sweep", "Run a scenario across one parameter range");
    sw->add_option("--config", sweep_config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    sw->add_option("--vary", vary, "key=start:stop:step (lambda, mix_lambda, mu, k, L, cascades, users, advised)")
        ->required();
    auto* sweep_seed = sw->add_option("--seed", seed, "Override the config seed");
    sw->add_option("--out", sweep_out, "Output directory");
    sw->add_option("--threads", threads, "Worker threads (0: one per core)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            zmix::ScenarioConfig config = zmix::load_config(config_path);
            if (*seed_opt) config.seed = seed;
            const zmix::ScenarioRun result = zmix::simulate(config);
            zmix::write_artifacts(result, out_dir);
            print_summary(result.report);
            std::cout << "  wrote " << out_dir << "\n";
        } else if (*cmp) {
            const auto delta = zmix::compare(load_report(baseline_path), load_report(treatment_path));
            std::cout << zmix::to_json(delta).dump(2) << "\n";
        } else if (*sw) {
            zmix::ScenarioConfig config = zmix::load_config(sweep_config);
            if (*sweep_seed) config.seed = seed;
            const auto axis = zmix::parse_sweep_axis(vary);
            const auto result = zmix::sweep(config, axis, threads);
            zmix::write_sweep(result, sweep_out);
            for (const auto& p : result.points)
                std::cout << axis.key << "=" << p.value << " activity_advantage " << p.report.activity_advantage
                          << "\n";
            std::cout << "monotone nonincreasing: " << (result.advantage_monotone_nonincreasing ? "yes" : "no")
                      << "\n  wrote " << sweep_out << "\n";
        }
    } catch (const zmix::Error& e) {
        std::cerr << (e.code() == zmix::ErrorCode::ConfigInvalid ? "" : "error: ") << e.what() << "\n";
        return e.code() == zmix::ErrorCode::ConfigInvalid ? kExitConfig : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}
