// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <CLI11.hpp>

#include "agristable/dispatch.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Farm profit model, stablecoin settlement and contract simulator"};
    agristable::cli::Invocation inv;
    std::uint64_t seed = 0, mc_n = 0;
    std::string config, out;

    app.add_option("--config", config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "Directory for report files")->required();
    app.add_option("--command", inv.command, "optimize | compare | statics | settle | escrow | insure | all")
        ->required();
    auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
    auto* mc_opt = app.add_option("--mc-n", mc_n, "Override monte_carlo_n");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : agristable::cli::kExitConfig;
    }

    inv.config = config;
    inv.out = out;
    if (*seed_opt) inv.seed = seed;
    if (*mc_opt) inv.mc_n = mc_n;
    return agristable::cli::invoke(inv, std::cerr);
}
