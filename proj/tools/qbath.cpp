#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qbath: exact reduced dynamics of an oscillator in a discretized harmonic bath"};
    app.require_subcommand(1);

    qbath::cli::RunRequest request;
    std::string config, out;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    for (const auto name : qbath::cli::subcommands) {
        CLI::App* sub = app.add_subcommand(std::string(name));
        sub->add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "artifact directory (overrides outputs.directory)");
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--threads", threads, "worker threads (default: QBATH_THREADS, then all cores)")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qbath::cli::exit_invalid;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    request.subcommand = chosen->get_name();
    request.config = config;
    if (chosen->count("--out")) request.out = out;
    if (chosen->count("--seed")) request.seed = seed;
    if (chosen->count("--threads")) request.threads = threads;
    return qbath::cli::run(request, std::cout, std::cerr);
}
