#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tandem/commands.hpp"

int main(int argc, char **argv) {
    CLI::App app{"Tail asymptotics of the sojourn time in a two-station tandem queue"};
    app.require_subcommand(1);
    tandem::CommandOptions opt;
    std::uint64_t seed = 0;
    const char *names[][2] = {{"analyze", "decay rates and K bounds, no simulation"},
                              {"simulate", "regenerative tail curve, slope and bound sandwich"},
                              {"kconst", "series estimate of K against its bounds"},
                              {"bigjump", "single-big-jump attribution over an x grid"},
                              {"rwalk", "random-walk maximum experiments"},
                              {"verify", "acceptance suite, one verdict per criterion"}};
    for (auto &n : names) {
        auto *sub = app.add_subcommand(n[0], n[1]);
        sub->add_option("--config", opt.config_path, "JSON config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_flag("--fast", opt.fast, "reduced budgets; expensive checks are SKIPPED");
    }
    CLI11_PARSE(app, argc, argv);
    auto *sub = app.get_subcommands().front();
    if (sub->count("--seed")) opt.seed = seed;
    return tandem::run_command(sub->get_name(), opt, std::cout, std::cerr);
}
