// optomag: train and inspect the magneto-optical perceptron from the shell.
//
//   optomag simulate --seed 7 --out out/sim
//   optomag emulate --config configs/default.cfg --frames --verbose
//   optomag sweep --seeds 50

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "optomag.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> seeds;
    bool frames = false;
    bool verbose = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "configuration file (key = value)");
    cmd->add_option("--seed", f.seed, "run seed (sweep: first seed)");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_flag("--frames", f.frames, "dump PGM frames (emulate)");
    cmd->add_flag("--verbose", f.verbose, "per-step weight state snapshots (emulate)");
}

optomag::RunConfig resolve(optomag::Mode mode, const Flags& f) {
    optomag::RunConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw optomag::IoError("cannot open config file " + f.config);
        cfg = optomag::parse_config(in, f.config);
    }
    cfg.mode = mode;
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.output.dir = *f.out;
    if (f.seeds) {
        if (*f.seeds < 1) throw optomag::ConfigError("--seeds must be at least 1");
        cfg.sweep.seeds = *f.seeds;
    }
    if (f.frames) cfg.output.frames = true;
    if (f.verbose) cfg.output.verbose = true;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optically trained magnetic perceptron: simulation, rig emulation and energy accounting"};
    app.require_subcommand(1);
    Flags flags;
    std::optional<optomag::Mode> mode;

    auto add = [&](const char* name, const char* help, optomag::Mode m) {
        auto* cmd = app.add_subcommand(name, help);
        add_common(cmd, flags);
        cmd->callback([&mode, m] { mode = m; });
        return cmd;
    };
    add("simulate", "train the abstract perceptron", optomag::Mode::Simulate);
    add("emulate", "train on the emulated optical rig", optomag::Mode::Emulate);
    add("dataset", "export the pattern set", optomag::Mode::Dataset);
    add("energy", "train on the rig and account write/read energy", optomag::Mode::Energy);
    auto* sweep = add("sweep", "per-seed convergence summary", optomag::Mode::Sweep);
    sweep->add_option("--seeds", flags.seeds, "number of seeds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : optomag::kExitConfig;
    }

    try {
        const auto cfg = resolve(*mode, flags);
        return optomag::run(cfg, std::cout, std::cerr);
    } catch (const optomag::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return optomag::kExitConfig;
    } catch (const optomag::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return optomag::kExitIo;
    }
}
