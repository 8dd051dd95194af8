#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "kvlif/analysis.hpp"
#include "kvlif/checkpoint.hpp"
#include "kvlif/config.hpp"
#include "kvlif/csv.hpp"
#include "kvlif/energy.hpp"
#include "kvlif/log.hpp"
#include "kvlif/manifest.hpp"
#include "kvlif/noise.hpp"
#include "kvlif/train.hpp"

// The experiment commands behind the CLI. Each one validates its config,
// creates a run directory <out>/<utc-stamp>-<seed-hash>/, writes its CSV
// artifacts plus manifest.json there, and returns the directory. Everything
// except the manifest's timing block is a pure function of (config, seed).

namespace kvlif {

struct CommandResult {
    std::string run_dir;
    RunManifest manifest;
};

namespace detail {

namespace fs = std::filesystem;

inline std::string utc_stamp() {
    const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

inline std::string seed_hash8(std::uint64_t seed) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08llx",
                  static_cast<unsigned long long>(splitmix64(seed) & 0xffffffffull));
    return buf;
}

inline std::string create_run_dir(const std::string& root, std::uint64_t seed) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create output root '" + root + "': " + ec.message());
    const std::string base = root + "/" + utc_stamp() + "-" + seed_hash8(seed);
    for (int i = 0; i < 10000; ++i) {
        const std::string name = i ? base + "-" + std::to_string(i + 1) : base;
        ec.clear();
        if (fs::create_directory(name, ec)) return name;
        if (ec) throw IoError("cannot create run directory '" + name + "': " + ec.message());
    }
    throw IoError("could not find a free run directory name under '" + root + "'");
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

inline void check_experiment_label(const ExperimentConfig& cfg, const std::string& command) {
    if (!cfg.experiment.empty() && cfg.experiment != command)
        throw ConfigError("config names experiment '" + cfg.experiment +
                          "' but the subcommand is '" + command + "'");
}

inline void finish(CommandResult& res, const std::string& started, const Stopwatch& sw) {
    res.manifest.j["timing"]["started_utc"] = started;
    res.manifest.j["timing"]["wall_ms"] = sw.ms();
    save_manifest(res.run_dir + "/manifest.json", res.manifest);
}

inline void add_artifact(CommandResult& res, const std::string& name, const std::string& content) {
    write_text_file(res.run_dir + "/" + name, content);
    res.manifest.j["artifacts"].push_back(name);
}

} // namespace detail

// Dataset seeds: train and test draw from distinct derived streams so the
// held-out set never shares Poisson draws with training data.
inline std::uint64_t dataset_seed(const ExperimentConfig& cfg, bool test) {
    return derive_seed(cfg.seed, seed_stream::dataset, test ? 1 : 0);
}

inline Dataset build_dataset(const ExperimentConfig& cfg, bool test) {
    const std::uint64_t s = dataset_seed(cfg, test);
    const std::size_t n = test ? cfg.dataset.test : cfg.dataset.train;
    const DatasetSpec& d = cfg.dataset;
    if (d.kind == "two_intensity")
        return make_two_intensity_poisson(n, d.features, cfg.T, d.low, d.high, s);
    if (d.kind == "moving_bar") return make_moving_bar_events(n, d.h, d.w, cfg.T, s);
    if (test) {
        if (d.test_images.empty())
            throw ConfigError("dataset: this command needs a held-out set; set "
                              "dataset.test_images and dataset.test_labels");
        return load_idx_dataset(d.test_images, d.test_labels, cfg.T, d.encoding, s);
    }
    return load_idx_dataset(d.images, d.labels, cfg.T, d.encoding, s);
}

inline Network build_network(const ExperimentConfig& cfg, NeuronKind kind, std::size_t in_dim,
                             std::size_t classes) {
    return make_mlp(in_dim, cfg.hidden, classes, kind, cfg.params, cfg.T, cfg.dataset.encoding,
                    cfg.readout_lambda);
}

// Noise at a given grid level, reusing the clean set's encode stream so a
// level of exactly 0 reproduces the clean tensors bitwise.
inline Dataset apply_noise_level(const ExperimentConfig& cfg, const Dataset& clean, double level,
                                 std::uint64_t noise_seed) {
    Dataset noisy = clean;
    if (cfg.noise.kind == NoiseKind::gaussian_static) {
        if (clean.frames.rows == 0)
            throw ConfigError("gaussian_static noise needs static frames; this dataset is "
                              "event-based — use pixel_event or temporal_drop instead");
        noisy.frames = inject_gaussian(clean.frames, level, noise_seed);
        if (clean.kind == EncodingKind::direct) {
            noisy.x = encode_direct(noisy.frames, clean.x.time).values;
        } else {
            const std::uint64_t enc = derive_seed(dataset_seed(cfg, true), seed_stream::dataset);
            noisy.x = encode_poisson(noisy.frames, clean.x.time, enc).values;
        }
    } else if (cfg.noise.kind == NoiseKind::pixel_event) {
        noisy.x = inject_pixel_noise(clean.x, level, cfg.noise.pixel_std, noise_seed);
    } else {
        noisy.x = drop_timesteps(clean.x, level, noise_seed);
    }
    return noisy;
}

// ---------------------------------------------------------------------------
// dynamics: single-neuron traces under a shared drive (all models see the
// same input realization), plus a firing-rate summary.

inline CommandResult cmd_dynamics(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::check_experiment_label(cfg, "dynamics");
    const std::string started = detail::utc_stamp();
    detail::Stopwatch sw;

    const DynamicsSpec& dyn = cfg.dynamics;
    std::vector<double> drive(dyn.T, 0.0);
    if (dyn.input == "poisson") {
        auto rng = make_engine(cfg.seed, seed_stream::dynamics);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (double& v : drive)
            if (u(rng) < dyn.rate) v = dyn.amplitude;
    } else if (dyn.input == "constant") {
        for (double& v : drive) v = dyn.value;
    }

    Matrix seq(dyn.T, 1);
    for (std::size_t t = 0; t < dyn.T; ++t) seq.at(t, 0) = drive[t];

    CommandResult res;
    res.run_dir = detail::create_run_dir(cfg.out, cfg.seed);
    res.manifest = make_manifest("dynamics", emit_config(cfg), cfg.seed);

    CsvTable summary({"model", "firing_rate", "spikes", "min_u_post"});
    for (NeuronKind kind : cfg.neurons) {
        const Trace tr = run_sequence(kind, seq, cfg.params);
        CsvTable table({"step", "input", "u_pre", "u_post", "k", "spike"});
        double min_u_post = 0.0;
        for (std::size_t t = 0; t < tr.steps.size(); ++t) {
            const TraceStep& s = tr.steps[t];
            table.add_row({csv_cell(t), csv_cell(drive[t]), csv_cell(s.u_pre[0]),
                           csv_cell(s.u_post[0]), csv_cell(s.k[0]), csv_cell(s.spike[0])});
            min_u_post = std::min(min_u_post, s.u_post[0]);
        }
        detail::add_artifact(res, "trace_" + to_string(kind) + ".csv", table.str());

        summary.add_row({csv_cell(to_string(kind)), csv_cell(tr.firing_rate()),
                         csv_cell(tr.spike_count()), csv_cell(min_u_post)});
        jsonio::json mj;
        mj["firing_rate"] = tr.firing_rate();
        mj["spikes"] = tr.spike_count();
        mj["min_u_post"] = min_u_post;
        res.manifest.j["metrics"][to_string(kind)] = std::move(mj);
        log_info("dynamics " + to_string(kind) + ": rate " + format_double(tr.firing_rate()));
    }
    detail::add_artifact(res, "summary.csv", summary.str());
    detail::finish(res, started, sw);
    return res;
}

// ---------------------------------------------------------------------------
// sweep: constant-intensity firing-rate curves per model.

inline CommandResult cmd_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::check_experiment_label(cfg, "sweep");
    const std::string started = detail::utc_stamp();
    detail::Stopwatch sw;

    ExperimentConfig resolved = cfg;
    resolved.sweep.intensities = cfg.sweep.resolved_intensities();
    const SweepResult sr =
        intensity_sweep(cfg.neurons, resolved.sweep.intensities, cfg.sweep.T, cfg.params);

    CommandResult res;
    res.run_dir = detail::create_run_dir(cfg.out, cfg.seed);
    res.manifest = make_manifest("sweep", emit_config(resolved), cfg.seed);

    CsvTable table({"model", "intensity", "firing_rate", "spikes"});
    for (std::size_t m = 0; m < sr.models.size(); ++m) {
        std::vector<double> distinct;
        for (std::size_t i = 0; i < sr.intensities.size(); ++i) {
            table.add_row({csv_cell(to_string(sr.models[m])), csv_cell(sr.intensities[i]),
                           csv_cell(sr.rates[m][i]), csv_cell(sr.counts[m][i])});
            if (std::find(distinct.begin(), distinct.end(), sr.rates[m][i]) == distinct.end())
                distinct.push_back(sr.rates[m][i]);
        }
        jsonio::json mj;
        mj["rates"] = sr.rates[m];
        mj["distinct_rates"] = distinct.size();
        res.manifest.j["metrics"][to_string(sr.models[m])] = std::move(mj);
    }
    detail::add_artifact(res, "sweep.csv", table.str());
    detail::finish(res, started, sw);
    return res;
}

// ---------------------------------------------------------------------------
// train: one model per configured neuron kind, or a checkpoint resume.

namespace detail {

inline void write_history_csv(CommandResult& res, const std::string& name,
                              const TrainHistory& h) {
    CsvTable table({"epoch", "train_loss", "train_acc"});
    for (const EpochStats& e : h.epochs)
        table.add_row({csv_cell(e.epoch), csv_cell(e.train_loss), csv_cell(e.train_acc)});
    add_artifact(res, name, table.str());
}

inline jsonio::json history_to_json(const TrainHistory& h) {
    jsonio::json arr = jsonio::json::array();
    for (const EpochStats& e : h.epochs) {
        jsonio::json row;
        row["epoch"] = e.epoch;
        row["train_loss"] = e.train_loss;
        row["train_acc"] = e.train_acc;
        arr.push_back(std::move(row));
    }
    return arr;
}

} // namespace detail

inline CommandResult cmd_train(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::check_experiment_label(cfg, "train");
    const std::string started = detail::utc_stamp();
    detail::Stopwatch sw;

    const Dataset train_ds = build_dataset(cfg, false);
    const Dataset test_ds = build_dataset(cfg, true);

    CommandResult res;
    res.run_dir = detail::create_run_dir(cfg.out, cfg.seed);
    res.manifest = make_manifest("train", emit_config(cfg), cfg.seed);

    const bool resuming = !cfg.checkpoint.empty();
    struct Job {
        NeuronKind kind;
        Network net;
        OptimizerState opt;
        std::size_t first_epoch = 0;
    };
    std::vector<Job> jobs;
    if (resuming) {
        Checkpoint ck = load_checkpoint(cfg.checkpoint);
        if (ck.net.in_dim() != train_ds.x.features)
            throw ConfigError("checkpoint input width " + std::to_string(ck.net.in_dim()) +
                              " does not match the configured dataset (" +
                              std::to_string(train_ds.x.features) + " features)");
        log_info("resuming from '" + cfg.checkpoint + "' after " +
                 std::to_string(ck.epochs_done) + " epochs");
        jobs.push_back({ck.net.blocks[0].kind, std::move(ck.net), std::move(ck.opt),
                        ck.epochs_done});
    } else {
        for (NeuronKind kind : cfg.neurons) {
            Job job;
            job.kind = kind;
            job.net = build_network(cfg, kind, train_ds.x.features, train_ds.classes);
            init_weights(job.net, cfg.seed);
            jobs.push_back(std::move(job));
        }
    }

    for (Job& job : jobs) {
        const std::string name = to_string(job.kind);
        TrainOptions opts = to_train_options(cfg);
        TrainHistory history;
        if (cfg.train.epochs > 0)
            train_range(job.net, train_ds, opts, job.opt, job.first_epoch, cfg.train.epochs,
                        history);

        Checkpoint ck;
        ck.seed = cfg.seed;
        ck.epochs_done = job.first_epoch + cfg.train.epochs;
        ck.net = job.net;
        ck.opt = job.opt;
        save_checkpoint(res.run_dir + "/model_" + name + ".ckpt.json", ck);
        res.manifest.j["artifacts"].push_back("model_" + name + ".ckpt.json");
        detail::write_history_csv(res, "history_" + name + ".csv", history);

        jsonio::json mj;
        mj["epochs_done"] = ck.epochs_done;
        mj["history"] = detail::history_to_json(history);
        if (!history.epochs.empty()) {
            mj["final_train_loss"] = history.epochs.back().train_loss;
            mj["final_train_acc"] = history.epochs.back().train_acc;
            mj["best_train_acc"] = history.best_accuracy();
        }
        mj["test_acc"] = evaluate(job.net, test_ds);
        log_info("train " + name + ": test acc " +
                 format_double(mj["test_acc"].get<double>()));
        res.manifest.j["metrics"][name] = std::move(mj);
    }

    detail::finish(res, started, sw);
    return res;
}

// ---------------------------------------------------------------------------
// robustness: clean accuracy plus the configured noise grid on the test set.

inline CommandResult cmd_robustness(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::check_experiment_label(cfg, "robustness");
    if (cfg.checkpoint.empty())
        throw ConfigError("robustness needs checkpoint=<path to a trained model>");
    const std::string started = detail::utc_stamp();
    detail::Stopwatch sw;

    Checkpoint ck = load_checkpoint(cfg.checkpoint);
    const Dataset test_ds = build_dataset(cfg, true);
    if (ck.net.in_dim() != test_ds.x.features)
        throw ConfigError("checkpoint input width " + std::to_string(ck.net.in_dim()) +
                          " does not match the configured dataset (" +
                          std::to_string(test_ds.x.features) + " features)");

    ExperimentConfig resolved = cfg;
    resolved.noise.levels = cfg.noise.resolved_levels();

    CommandResult res;
    res.run_dir = detail::create_run_dir(cfg.out, cfg.seed);
    res.manifest = make_manifest("robustness", emit_config(resolved), cfg.seed);

    const double clean_acc = evaluate(ck.net, test_ds);
    CsvTable table({"noise", "level", "accuracy"});
    table.add_row({csv_cell(to_string(cfg.noise.kind)), csv_cell(0.0), csv_cell(clean_acc)});

    std::vector<double> accs;
    for (std::size_t i = 0; i < resolved.noise.levels.size(); ++i) {
        const double level = resolved.noise.levels[i];
        const Dataset noisy = apply_noise_level(
            cfg, test_ds, level, derive_seed(cfg.seed, seed_stream::noise, i + 1));
        const double acc = evaluate(ck.net, noisy);
        accs.push_back(acc);
        table.add_row({csv_cell(to_string(cfg.noise.kind)), csv_cell(level), csv_cell(acc)});
        log_info("robustness " + to_string(cfg.noise.kind) + " level " + format_double(level) +
                 ": acc " + format_double(acc));
    }
    detail::add_artifact(res, "robustness.csv", table.str());

    bool nonincreasing = true;
    for (std::size_t i = 0; i < accs.size(); ++i)
        if (accs[i] > (i ? accs[i - 1] : clean_acc) + 1e-12) nonincreasing = false;
    jsonio::json mj;
    mj["noise_kind"] = to_string(cfg.noise.kind);
    mj["clean_accuracy"] = clean_acc;
    mj["levels"] = resolved.noise.levels;
    mj["accuracies"] = accs;
    mj["trend_nonincreasing"] = nonincreasing;  // a report, not an assertion
    res.manifest.j["metrics"] = std::move(mj);

    detail::finish(res, started, sw);
    return res;
}

// ---------------------------------------------------------------------------
// energy: one recorded evaluation pass over the test set.

inline CommandResult cmd_energy(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::check_experiment_label(cfg, "energy");
    if (cfg.checkpoint.empty())
        throw ConfigError("energy needs checkpoint=<path to a trained model>");
    const std::string started = detail::utc_stamp();
    detail::Stopwatch sw;

    Checkpoint ck = load_checkpoint(cfg.checkpoint);
    const Dataset test_ds = build_dataset(cfg, true);
    if (ck.net.in_dim() != test_ds.x.features)
        throw ConfigError("checkpoint input width " + std::to_string(ck.net.in_dim()) +
                          " does not match the configured dataset (" +
                          std::to_string(test_ds.x.features) + " features)");

    const ForwardResult fr = forward(ck.net, test_ds.x, SpikeMode::binary, true);
    const EnergyReport er = energy_account(ck.net, fr.tape);

    // accuracy from the same pass
    std::size_t hits = 0;
    for (std::size_t b = 0; b < fr.logits.batch; ++b) {
        int best = 0;
        double best_v = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < fr.logits.features; ++c) {
            double avg = 0.0;
            for (std::size_t t = 0; t < fr.logits.time; ++t) avg += fr.logits.at(b, c, t);
            if (avg > best_v) {
                best_v = avg;
                best = int(c);
            }
        }
        hits += (best == test_ds.labels[b]);
    }
    const double acc = double(hits) / double(test_ds.size());

    // per-layer firing rates from the recorded tape
    std::vector<Tensor3> layer_spikes;
    for (std::size_t l = 0; l < fr.tape.blocks.size(); ++l) {
        const auto& sp = fr.tape.blocks[l].spike;
        Tensor3 s(test_ds.size(), sp[0].cols, sp.size());
        for (std::size_t t = 0; t < sp.size(); ++t)
            for (std::size_t b = 0; b < sp[t].rows; ++b)
                for (std::size_t n = 0; n < sp[t].cols; ++n) s.at(b, n, t) = sp[t].at(b, n);
        layer_spikes.push_back(std::move(s));
    }
    const std::vector<double> rates = firing_rate_per_layer(layer_spikes);

    CommandResult res;
    res.run_dir = detail::create_run_dir(cfg.out, cfg.seed);
    res.manifest = make_manifest("energy", emit_config(cfg), cfg.seed);

    CsvTable table({"layer", "n_ac", "n_mac", "energy_pj"});
    for (std::size_t l = 0; l < er.layers.size(); ++l) {
        const std::string label = l + 1 < er.layers.size() ? "block" + std::to_string(l) : "readout";
        table.add_row({csv_cell(label), csv_cell(er.layers[l].n_ac), csv_cell(er.layers[l].n_mac),
                       csv_cell(er.e_ac_pj * er.layers[l].n_ac + er.e_mac_pj * er.layers[l].n_mac)});
    }
    table.add_row({csv_cell(std::string("total")), csv_cell(er.n_ac), csv_cell(er.n_mac),
                   csv_cell(er.total_pj())});
    detail::add_artifact(res, "energy.csv", table.str());

    jsonio::json mj;
    mj["n_ac"] = er.n_ac;
    mj["n_mac"] = er.n_mac;
    mj["e_ac_pj"] = er.e_ac_pj;
    mj["e_mac_pj"] = er.e_mac_pj;
    mj["total_uj"] = er.total_uj();
    mj["per_sample_uj"] = er.total_uj() / double(test_ds.size());
    mj["accuracy"] = acc;
    mj["firing_rate_per_layer"] = rates;  // last entry aggregates all layers
    res.manifest.j["metrics"] = std::move(mj);
    log_info("energy: " + format_double(er.total_uj()) + " uJ over " +
             std::to_string(test_ds.size()) + " samples");

    detail::finish(res, started, sw);
    return res;
}

// ---------------------------------------------------------------------------
// shortwindow: evaluate a trained checkpoint at reduced inference windows.

inline CommandResult cmd_shortwindow(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::check_experiment_label(cfg, "shortwindow");
    if (cfg.checkpoint.empty())
        throw ConfigError("shortwindow needs checkpoint=<path to a trained model>");
    const std::string started = detail::utc_stamp();
    detail::Stopwatch sw;

    Checkpoint ck = load_checkpoint(cfg.checkpoint);

    ExperimentConfig resolved = cfg;
    resolved.T = ck.net.T;  // the evaluation tensors must match the training window
    std::vector<std::size_t> grid = cfg.shortwindow.grid;
    if (grid.empty())
        for (std::size_t t = 1; t <= ck.net.T; ++t) grid.push_back(t);
    for (std::size_t t : grid)
        if (t > ck.net.T)
            throw ConfigError("shortwindow.grid entry " + std::to_string(t) +
                              " exceeds the checkpoint's training window T=" +
                              std::to_string(ck.net.T));
    resolved.shortwindow.grid = grid;

    const Dataset test_ds = build_dataset(resolved, true);
    if (ck.net.in_dim() != test_ds.x.features)
        throw ConfigError("checkpoint input width " + std::to_string(ck.net.in_dim()) +
                          " does not match the configured dataset (" +
                          std::to_string(test_ds.x.features) + " features)");

    CommandResult res;
    res.run_dir = detail::create_run_dir(resolved.out, resolved.seed);
    res.manifest = make_manifest("shortwindow", emit_config(resolved), resolved.seed);

    CsvTable table({"t_inference", "accuracy"});
    std::vector<double> accs;
    for (std::size_t t : grid) {
        const Tensor3 xt = test_ds.x.truncated(t);
        const double acc = accuracy(ck.net, xt, test_ds.labels);
        accs.push_back(acc);
        table.add_row({csv_cell(t), csv_cell(acc)});
        log_debug("shortwindow T=" + std::to_string(t) + ": acc " + format_double(acc));
    }
    detail::add_artifact(res, "shortwindow.csv", table.str());

    jsonio::json mj;
    mj["grid"] = grid;
    mj["accuracies"] = accs;
    mj["t_train"] = ck.net.T;
    mj["full_window_accuracy"] = evaluate(ck.net, test_ds);
    res.manifest.j["metrics"] = std::move(mj);

    detail::finish(res, started, sw);
    return res;
}

} // namespace kvlif
