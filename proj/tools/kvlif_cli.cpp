// kvlif — deterministic spiking-network experiment runner.
//
// Subcommands: dynamics | sweep | train | robustness | energy | shortwindow.
// Option precedence: built-in defaults < --preset < --config file < flags.
// Every run writes its artifacts plus a manifest into a fresh directory
// under --out; rerunning with the same seed reproduces all numeric content.
//
// Exit codes: 0 success, 2 config error, 3 numeric divergence, 4 I/O error.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kvlif/experiments.hpp"
#include "kvlif/version.hpp"

namespace {

struct CliArgs {
    std::string command;
    std::string config_path;
    std::string preset;
    std::string neuron;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool out_set = false;
};

kvlif::ExperimentConfig build_config(const CliArgs& a) {
    kvlif::ExperimentConfig cfg;
    if (!a.preset.empty()) kvlif::apply_preset(cfg, a.preset);
    if (!a.config_path.empty()) cfg = kvlif::load_config_file(a.config_path, std::move(cfg));
    if (!a.neuron.empty()) cfg.neurons = {kvlif::neuron_kind_from_string(a.neuron)};
    if (a.seed_set) cfg.seed = a.seed;
    if (a.out_set) cfg.out = a.out;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kvlif — spiking-network experiments with reproducible artifacts"};
    app.set_version_flag("--version", std::string(kvlif::version_string));
    app.require_subcommand(1);

    CliArgs args;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "JSON config file");
        sub->add_option("--preset", args.preset,
                        "hyperparameter preset: cifar10|cifar100|tiny|cifar10-dvs|dvs-gesture|toy");
        sub->add_option("--neuron", args.neuron, "restrict to one model: lif-s|lif-h|kvlif");
        sub->add_option("--seed", args.seed, "master seed")->each([&](const std::string&) {
            args.seed_set = true;
        });
        sub->add_option("--out", args.out, "output root directory")->each([&](const std::string&) {
            args.out_set = true;
        });
    };

    add_common(app.add_subcommand("dynamics", "single-neuron traces under a shared drive"));
    add_common(app.add_subcommand("sweep", "constant-intensity firing-rate curves"));
    add_common(app.add_subcommand("train", "train one model per configured neuron kind"));
    add_common(app.add_subcommand("robustness", "noise-grid evaluation of a checkpoint"));
    add_common(app.add_subcommand("energy", "synaptic-op energy report for a checkpoint"));
    add_common(app.add_subcommand("shortwindow", "accuracy at reduced inference windows"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    args.command = app.get_subcommands().front()->get_name();

    try {
        const kvlif::ExperimentConfig cfg = build_config(args);
        kvlif::CommandResult res;
        if (args.command == "dynamics")
            res = kvlif::cmd_dynamics(cfg);
        else if (args.command == "sweep")
            res = kvlif::cmd_sweep(cfg);
        else if (args.command == "train")
            res = kvlif::cmd_train(cfg);
        else if (args.command == "robustness")
            res = kvlif::cmd_robustness(cfg);
        else if (args.command == "energy")
            res = kvlif::cmd_energy(cfg);
        else
            res = kvlif::cmd_shortwindow(cfg);
        std::cout << res.run_dir << "\n";
        return 0;
    } catch (const kvlif::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const kvlif::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const kvlif::StepError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const kvlif::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
