// Command-line front end: train, grid and bench subcommands.
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kanhead/experiment.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "experiment config file")->required();
    cmd->add_option("--seed", o.seed, "override the master seed");
    cmd->add_option("--out", o.out, "override the output directory");
}

kanhead::ExperimentConfig resolve(const Overrides& o) {
    auto cfg = kanhead::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out = *o.out;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classification heads on frozen or trainable text embeddings"};
    app.require_subcommand(1);

    Overrides train_o, grid_o, bench_o;
    auto* train = app.add_subcommand("train", "train one head on one embedding and report test F1");
    auto* grid = app.add_subcommand("grid", "train every (embedding, head) pair in the config");
    auto* bench = app.add_subcommand("bench", "time forward/backward passes on random inputs");
    add_common(train, train_o);
    add_common(grid, grid_o);
    add_common(bench, bench_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kanhead::exit_config;
    }

    try {
        if (*train) return kanhead::cmd_train(resolve(train_o));
        if (*grid) return kanhead::cmd_grid(resolve(grid_o));
        return kanhead::cmd_bench(resolve(bench_o));
    } catch (const std::exception& e) {
        std::cerr << "kanhead: error: " << e.what() << "\n";
        return kanhead::classify_exception(e);
    }
}
