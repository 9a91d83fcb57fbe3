#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "srdo/experiment.hpp"

namespace {

int cmd_run(const std::string& path, const srdo::ExperimentOptions& options) {
    srdo::RunConfig config = srdo::load_config(path);
    srdo::apply_seed_override(config);
    for (const auto& w : config.warnings) std::cerr << "warning: " << w << '\n';
    const srdo::ExperimentResult result = srdo::run_experiment(config, options);
    srdo::write_summary_text(std::cout, result.traces);
    if (result.ordering) {
        const auto& o = *result.ordering;
        std::printf("mean final AE: scenario1 %.6g, scenario2 %.6g, scenario3 %.6g; ordering %s\n", o.mean_ae[0],
                    o.mean_ae[1], o.mean_ae[2], o.ordered ? "holds" : "does not hold");
        for (std::size_t j = 0; j < o.seeds.size(); ++j)
            if (!o.seed_ordered[j])
                std::printf("  seed %llu out of order\n", static_cast<unsigned long long>(o.seeds[j]));
    }
    return result.exit_code;
}

int cmd_verify(const std::string& path, const srdo::ExperimentOptions& options) {
    srdo::RunConfig config = srdo::load_config(path);
    srdo::apply_seed_override(config);
    for (const auto& w : config.warnings) std::cerr << "warning: " << w << '\n';
    const srdo::VerifyReport report = srdo::verify_bounds(config, options);
    for (const auto& line : report.lines) std::cout << line << '\n';
    return report.exit_code;
}

int cmd_scheme(std::size_t n, std::size_t s, std::uint64_t seed) {
    srdo::Rng rng(seed);
    const srdo::CodingScheme scheme = srdo::make_scheme(n, s, rng);
    srdo::write_scheme(std::cout, scheme);
    return srdo::kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Straggler-robust distributed optimization simulator"};
    app.require_subcommand(1);

    std::string config_path;
    srdo::ExperimentOptions options;

    auto* run = app.add_subcommand("run", "Run the seeds of a config and write CSV traces");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--jobs", options.jobs, "Seeds run concurrently")->check(CLI::PositiveNumber);
    run->add_flag("--sweep", options.sweep, "Run scenarios 1-3 on shared realizations");

    auto* verify = app.add_subcommand("verify", "Run with bound checkers and report pass/fail");
    verify->add_option("config", config_path, "Config file")->required();
    verify->add_option("--jobs", options.jobs, "Seeds run concurrently")->check(CLI::PositiveNumber);
    verify->add_flag("--corrupt-scheme", options.corrupt_scheme, "Zero one encode entry (debug)");

    std::size_t n = 0, s = 0;
    std::uint64_t seed = 1;
    auto* scheme = app.add_subcommand("scheme", "Print B, A and max |AB - 1|");
    scheme->add_option("--n", n, "Workers")->required();
    scheme->add_option("--s", s, "Stragglers tolerated")->required();
    scheme->add_option("--seed", seed, "Seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? srdo::kExitOk : srdo::kExitUsage;
    }

    try {
        if (*run) return cmd_run(config_path, options);
        if (*verify) return cmd_verify(config_path, options);
        if (*scheme) return cmd_scheme(n, s, seed);
    } catch (const srdo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return srdo::kExitConfig;
    } catch (const srdo::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return srdo::kExitConfig;
    }
    return srdo::kExitUsage;
}
