#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ccsim/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"coded caching broadcast simulator"};
    app.require_subcommand(1);

    ccsim::cli::Options options;
    std::uint64_t seed = 0;
    int threads = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", options.config_path, "JSON config file")->required();
        cmd->add_option("-o,--outdir", options.outdir, "output directory");
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { options.seed_override = seed; });
        cmd->add_option("--threads", threads, "worker threads (0 = hardware)")
            ->each([&](const std::string&) { options.threads_override = threads; });
    };

    CLI::App* analyze = app.add_subcommand("analyze", "analytic rate bounds over a sweep");
    add_common(analyze);
    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo rate estimation over a sweep");
    add_common(simulate);

    ccsim::cli::VerifyOptions verify_options;
    CLI::App* verify = app.add_subcommand("verify", "cross-check against the independent oracles");
    verify->add_option("--seeds", verify_options.seeds, "instances per suite");
    verify->add_option("--mc-samples", verify_options.mc_samples, "Monte-Carlo sample count");
    verify->add_option("--base-seed", verify_options.base_seed, "base seed for the suites");
    verify
        ->add_flag("--inject-edge-fault", verify_options.inject_edge_fault,
                   "corrupt one edge before comparing (harness sensitivity fixture)")
        ->group(""); // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ccsim::cli::kConfigError;
    }

    if (app.got_subcommand(analyze))
        return ccsim::cli::cmd_analyze(options);
    if (app.got_subcommand(simulate))
        return ccsim::cli::cmd_simulate(options);
    return ccsim::cli::cmd_verify(verify_options);
}
