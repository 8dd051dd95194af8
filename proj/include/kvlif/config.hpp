#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kvlif/datasets.hpp"
#include "kvlif/io_util.hpp"
#include "kvlif/json_util.hpp"
#include "kvlif/loss.hpp"
#include "kvlif/network.hpp"
#include "kvlif/noise.hpp"
#include "kvlif/optim.hpp"
#include "kvlif/train.hpp"
#include "kvlif/version.hpp"

// Experiment configuration: JSON on disk, strict on read. Precedence is
// defaults < preset < config file < command-line flags; parse_config takes
// the already-layered base so each stage only overrides what it names.
// Unknown keys anywhere are an error — a typo should never silently become
// a default. The built-in defaults equal the "toy" preset.

namespace kvlif {

struct DatasetSpec {
    std::string kind = "two_intensity";  // two_intensity | moving_bar | idx
    std::size_t train = 512;
    std::size_t test = 256;
    std::size_t features = 16;  // two_intensity
    double low = 0.2;           // two_intensity class-0 rate
    double high = 0.6;          // two_intensity class-1 rate
    std::size_t h = 8;          // moving_bar grid
    std::size_t w = 8;
    std::string images;       // idx file paths
    std::string labels;
    std::string test_images;  // optional; empty = no held-out set
    std::string test_labels;
    EncodingKind encoding = EncodingKind::poisson;
    bool encoding_set = false;  // whether the file pinned it explicitly

    void validate() const {
        if (kind != "two_intensity" && kind != "moving_bar" && kind != "idx")
            throw ConfigError("dataset.kind must be two_intensity | moving_bar | idx, got '" +
                              kind + "'");
        if (kind == "two_intensity") {
            if (train < 2 || test < 2)
                throw ConfigError("dataset.train and dataset.test must be >= 2");
            if (features < 1) throw ConfigError("dataset.features must be >= 1");
            if (!(low >= 0.0 && low <= 1.0 && high >= 0.0 && high <= 1.0))
                throw ConfigError("dataset.low/high are Poisson rates and must lie in [0,1]");
            if (!(low < high)) throw ConfigError("dataset.low must be strictly below dataset.high");
            if (encoding != EncodingKind::poisson)
                throw ConfigError("dataset.encoding must be poisson for two_intensity data");
        } else if (kind == "moving_bar") {
            if (train < 2 || test < 2)
                throw ConfigError("dataset.train and dataset.test must be >= 2");
            if (h < 1 || w < 2) throw ConfigError("dataset.h must be >= 1 and dataset.w >= 2");
            if (encoding != EncodingKind::event)
                throw ConfigError("dataset.encoding must be event for moving_bar data");
        } else {
            if (images.empty() || labels.empty())
                throw ConfigError("dataset.images and dataset.labels are required for idx data");
            if (test_images.empty() != test_labels.empty())
                throw ConfigError("dataset.test_images and dataset.test_labels go together");
            if (encoding != EncodingKind::direct && encoding != EncodingKind::poisson)
                throw ConfigError("dataset.encoding must be direct or poisson for idx data");
        }
    }

    std::size_t input_width() const {
        return kind == "moving_bar" ? h * w : features;  // idx width comes from the file
    }
};

struct TrainSpec {
    std::size_t epochs = 50;  // 0 = just materialize init weights
    std::size_t batch = 32;
    OptimizerOptions optimizer;
    LossKind loss = LossKind::ce_mean;
    double tet_lambda = 0.05;

    TrainSpec() {
        optimizer.kind = OptimizerKind::adam;
        optimizer.lr = 1e-3;
        optimizer.weight_decay = 0.0;
    }

    void validate() const {
        if (batch < 1) throw ConfigError("train.batch must be >= 1");
        optimizer.validate();
        if (!(tet_lambda >= 0.0 && tet_lambda <= 1.0))
            throw ConfigError("train.tet_lambda must lie in [0,1]");
    }
};

struct NoiseGridSpec {
    NoiseKind kind = NoiseKind::gaussian_static;
    std::vector<double> levels;  // empty = per-kind default grid
    double pixel_std = 0.1;

    std::vector<double> resolved_levels() const {
        if (!levels.empty()) return levels;
        if (kind == NoiseKind::temporal_drop) return {0.1, 0.2, 0.3, 0.4, 0.5};
        return {0.04, 0.08, 0.12, 0.16, 0.20};
    }

    void validate(std::uint64_t seed) const {
        for (double lv : resolved_levels()) {
            NoiseSpec s;
            s.kind = kind;
            s.level = lv;
            s.seed = seed;
            s.pixel_std = pixel_std;
            s.validate();
        }
    }
};

struct DynamicsSpec {
    std::string input = "poisson";  // poisson | constant | zero
    double rate = 0.35;             // poisson event probability per step
    double amplitude = 1.0;         // poisson event height
    double value = 1.5;             // constant drive
    std::size_t T = 40;

    void validate() const {
        if (input != "poisson" && input != "constant" && input != "zero")
            throw ConfigError("dynamics.input must be poisson | constant | zero, got '" + input +
                              "'");
        if (!(rate >= 0.0 && rate <= 1.0))
            throw ConfigError("dynamics.rate is a probability and must lie in [0,1]");
        if (!(amplitude > 0.0)) throw ConfigError("dynamics.amplitude must be > 0");
        if (!std::isfinite(value)) throw ConfigError("dynamics.value must be finite");
        if (T < 1) throw ConfigError("dynamics.T must be >= 1");
    }
};

struct SweepSpec {
    std::vector<double> intensities;  // empty = 0, 0.25, ..., 5.0
    std::size_t T = 8;

    std::vector<double> resolved_intensities() const {
        if (!intensities.empty()) return intensities;
        std::vector<double> grid;
        for (int i = 0; i <= 20; ++i) grid.push_back(0.25 * i);
        return grid;
    }

    void validate() const {
        if (T < 1) throw ConfigError("sweep.T must be >= 1");
        const auto grid = resolved_intensities();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!(grid[i] >= 0.0))
                throw ConfigError("sweep.intensities must be >= 0");
            if (i && !(grid[i] > grid[i - 1]))
                throw ConfigError("sweep.intensities must be strictly increasing");
        }
    }
};

struct ShortwindowSpec {
    std::vector<std::size_t> grid;  // empty = 1..T_train, resolved at run time

    void validate() const {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] < 1) throw ConfigError("shortwindow.grid entries must be >= 1");
            if (i && !(grid[i] > grid[i - 1]))
                throw ConfigError("shortwindow.grid must be strictly increasing");
        }
    }
};

struct ExperimentConfig {
    std::string experiment;  // optional label; checked against the subcommand when set
    std::vector<NeuronKind> neurons = {NeuronKind::lif_soft, NeuronKind::lif_hard,
                                       NeuronKind::kvlif};
    NeuronParams params;
    std::vector<std::size_t> hidden = {32};
    double readout_lambda = -1.0;  // < 0 follows params.lambda
    std::size_t T = 8;
    DatasetSpec dataset;
    TrainSpec train;
    NoiseGridSpec noise;
    DynamicsSpec dynamics;
    SweepSpec sweep;
    ShortwindowSpec shortwindow;
    std::string checkpoint;  // input for robustness / energy / shortwindow / resume
    std::uint64_t seed = 1000;
    std::string out = "runs";

    void validate() const {
        if (neurons.empty()) throw ConfigError("neuron list must not be empty");
        for (std::size_t i = 0; i < neurons.size(); ++i)
            for (std::size_t k = i + 1; k < neurons.size(); ++k)
                if (neurons[i] == neurons[k])
                    throw ConfigError("neuron list repeats '" + to_string(neurons[i]) + "'");
        params.validate();
        if (hidden.empty()) throw ConfigError("network.hidden must list at least one layer width");
        for (std::size_t wdt : hidden)
            if (wdt < 1) throw ConfigError("network.hidden widths must be >= 1");
        if (readout_lambda >= 0.0 && !(readout_lambda > 0.0 && readout_lambda < 1.0))
            throw ConfigError("network.readout_lambda must lie in (0,1), or be omitted to follow "
                              "params.lambda");
        if (T < 1) throw ConfigError("T must be >= 1");
        dataset.validate();
        train.validate();
        noise.validate(seed);
        dynamics.validate();
        sweep.validate();
        shortwindow.validate();
    }
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"cifar10",     "cifar100",    "tiny",
                                                   "cifar10-dvs", "dvs-gesture", "toy"};
    return names;
}

// Presets carry training hyperparameters only (batch, epochs, optimizer,
// weight decay, alpha/beta/gamma); datasets stay toy-scale regardless.
inline void apply_preset(ExperimentConfig& cfg, const std::string& name) {
    auto set = [&](std::size_t batch, std::size_t epochs, OptimizerKind ok, double lr, double wd,
                   double alpha, double beta, double gamma) {
        cfg.train.batch = batch;
        cfg.train.epochs = epochs;
        cfg.train.optimizer.kind = ok;
        cfg.train.optimizer.lr = lr;
        cfg.train.optimizer.weight_decay = wd;
        cfg.params.alpha = alpha;
        cfg.params.beta = beta;
        cfg.params.gamma = gamma;
    };
    if (name == "cifar10")
        set(128, 200, OptimizerKind::sgd, 0.1, 5e-5, 0.8, 0.3, 0.05);
    else if (name == "cifar100")
        set(128, 300, OptimizerKind::sgd, 0.1, 5e-4, 0.8, 0.1, 0.05);
    else if (name == "tiny")
        set(256, 300, OptimizerKind::sgd, 0.1, 5e-4, 0.8, 0.3, 0.05);
    else if (name == "cifar10-dvs")
        set(128, 200, OptimizerKind::sgd, 0.05, 5e-4, 0.8, 0.1, 0.05);
    else if (name == "dvs-gesture")
        set(16, 150, OptimizerKind::adam, 5e-4, 0.0, 0.8, 0.3, 0.05);
    else if (name == "toy")
        set(32, 50, OptimizerKind::adam, 1e-3, 0.0, 0.8, 0.3, 0.05);
    else {
        std::string list;
        for (const auto& n : preset_names()) {
            if (!list.empty()) list += " | ";
            list += n;
        }
        throw ConfigError("unknown preset '" + name + "' (expected " + list + ")");
    }
}

namespace detail {

using jsonio::json;

inline std::vector<NeuronKind> neurons_from_json(const json& v) {
    std::vector<NeuronKind> out;
    if (v.is_string())
        out.push_back(neuron_kind_from_string(v.get<std::string>()));
    else if (v.is_array())
        for (const auto& e : v)
            out.push_back(neuron_kind_from_string(jsonio::as_string(e, "neuron entries")));
    else
        throw ConfigError("neuron must be a string or an array of strings");
    return out;
}

} // namespace detail

// Overlays the document onto `base` (already carrying defaults/preset values)
// and validates the result.
inline ExperimentConfig parse_config(const jsonio::json& j, ExperimentConfig base = {}) {
    using namespace jsonio;
    expect_object(j, "config");
    reject_unknown(j, "config",
                   {"schema_version", "experiment", "neuron", "params", "network", "T", "dataset",
                    "train", "noise", "dynamics", "sweep", "shortwindow", "checkpoint", "seed",
                    "out"});
    const auto ver = as_uint(require(j, "config", "schema_version"), "config.schema_version");
    if (ver != config_schema_version)
        throw ConfigError("config: schema_version " + std::to_string(ver) +
                          " is not supported; this build reads version " +
                          std::to_string(config_schema_version));

    ExperimentConfig cfg = std::move(base);
    cfg.experiment = get_string(j, "config", "experiment", cfg.experiment);
    if (const json* v = find(j, "neuron")) cfg.neurons = detail::neurons_from_json(*v);

    if (const json* v = find(j, "params")) {
        expect_object(*v, "config.params");
        reject_unknown(*v, "config.params",
                       {"lambda", "v_th", "alpha", "beta", "gamma", "sg_width"});
        cfg.params.lambda = get_number(*v, "params", "lambda", cfg.params.lambda);
        cfg.params.v_th = get_number(*v, "params", "v_th", cfg.params.v_th);
        cfg.params.alpha = get_number(*v, "params", "alpha", cfg.params.alpha);
        cfg.params.beta = get_number(*v, "params", "beta", cfg.params.beta);
        cfg.params.gamma = get_number(*v, "params", "gamma", cfg.params.gamma);
        cfg.params.sg_width = get_number(*v, "params", "sg_width", cfg.params.sg_width);
    }

    if (const json* v = find(j, "network")) {
        expect_object(*v, "config.network");
        reject_unknown(*v, "config.network", {"hidden", "readout_lambda"});
        if (const json* hv = find(*v, "hidden"))
            cfg.hidden = as_size_array(*hv, "network.hidden");
        cfg.readout_lambda = get_number(*v, "network", "readout_lambda", cfg.readout_lambda);
    }

    if (const json* v = find(j, "T")) cfg.T = std::size_t(as_uint(*v, "config.T"));

    if (const json* v = find(j, "dataset")) {
        expect_object(*v, "config.dataset");
        reject_unknown(*v, "config.dataset",
                       {"kind", "train", "test", "features", "low", "high", "h", "w", "images",
                        "labels", "test_images", "test_labels", "encoding"});
        DatasetSpec& d = cfg.dataset;
        d.kind = get_string(*v, "dataset", "kind", d.kind);
        d.train = std::size_t(get_uint(*v, "dataset", "train", d.train));
        d.test = std::size_t(get_uint(*v, "dataset", "test", d.test));
        d.features = std::size_t(get_uint(*v, "dataset", "features", d.features));
        d.low = get_number(*v, "dataset", "low", d.low);
        d.high = get_number(*v, "dataset", "high", d.high);
        d.h = std::size_t(get_uint(*v, "dataset", "h", d.h));
        d.w = std::size_t(get_uint(*v, "dataset", "w", d.w));
        d.images = get_string(*v, "dataset", "images", d.images);
        d.labels = get_string(*v, "dataset", "labels", d.labels);
        d.test_images = get_string(*v, "dataset", "test_images", d.test_images);
        d.test_labels = get_string(*v, "dataset", "test_labels", d.test_labels);
        if (const json* ev = find(*v, "encoding")) {
            d.encoding = encoding_kind_from_string(as_string(*ev, "dataset.encoding"));
            d.encoding_set = true;
        }
        // generators imply their encoding unless the file pinned one
        if (d.kind == "moving_bar" && !d.encoding_set) d.encoding = EncodingKind::event;
        if (d.kind == "two_intensity" && !d.encoding_set) d.encoding = EncodingKind::poisson;
    }

    if (const json* v = find(j, "train")) {
        expect_object(*v, "config.train");
        reject_unknown(*v, "config.train",
                       {"epochs", "batch", "optimizer", "lr", "momentum", "weight_decay", "loss",
                        "tet_lambda", "adam_beta1", "adam_beta2", "adam_eps"});
        TrainSpec& t = cfg.train;
        t.epochs = std::size_t(get_uint(*v, "train", "epochs", t.epochs));
        t.batch = std::size_t(get_uint(*v, "train", "batch", t.batch));
        if (const json* ov = find(*v, "optimizer"))
            t.optimizer.kind = optimizer_kind_from_string(as_string(*ov, "train.optimizer"));
        t.optimizer.lr = get_number(*v, "train", "lr", t.optimizer.lr);
        t.optimizer.momentum = get_number(*v, "train", "momentum", t.optimizer.momentum);
        t.optimizer.weight_decay =
            get_number(*v, "train", "weight_decay", t.optimizer.weight_decay);
        t.optimizer.adam_beta1 = get_number(*v, "train", "adam_beta1", t.optimizer.adam_beta1);
        t.optimizer.adam_beta2 = get_number(*v, "train", "adam_beta2", t.optimizer.adam_beta2);
        t.optimizer.adam_eps = get_number(*v, "train", "adam_eps", t.optimizer.adam_eps);
        if (const json* lv = find(*v, "loss"))
            t.loss = loss_kind_from_string(as_string(*lv, "train.loss"));
        t.tet_lambda = get_number(*v, "train", "tet_lambda", t.tet_lambda);
    }

    if (const json* v = find(j, "noise")) {
        expect_object(*v, "config.noise");
        reject_unknown(*v, "config.noise", {"kind", "levels", "pixel_std"});
        if (const json* kv = find(*v, "kind"))
            cfg.noise.kind = noise_kind_from_string(as_string(*kv, "noise.kind"));
        if (const json* lv = find(*v, "levels"))
            cfg.noise.levels = as_number_array(*lv, "noise.levels");
        cfg.noise.pixel_std = get_number(*v, "noise", "pixel_std", cfg.noise.pixel_std);
    }

    if (const json* v = find(j, "dynamics")) {
        expect_object(*v, "config.dynamics");
        reject_unknown(*v, "config.dynamics", {"input", "rate", "amplitude", "value", "T"});
        DynamicsSpec& d = cfg.dynamics;
        d.input = get_string(*v, "dynamics", "input", d.input);
        d.rate = get_number(*v, "dynamics", "rate", d.rate);
        d.amplitude = get_number(*v, "dynamics", "amplitude", d.amplitude);
        d.value = get_number(*v, "dynamics", "value", d.value);
        d.T = std::size_t(get_uint(*v, "dynamics", "T", d.T));
    }

    if (const json* v = find(j, "sweep")) {
        expect_object(*v, "config.sweep");
        reject_unknown(*v, "config.sweep", {"intensities", "T"});
        if (const json* iv = find(*v, "intensities"))
            cfg.sweep.intensities = as_number_array(*iv, "sweep.intensities");
        cfg.sweep.T = std::size_t(get_uint(*v, "sweep", "T", cfg.sweep.T));
    }

    if (const json* v = find(j, "shortwindow")) {
        expect_object(*v, "config.shortwindow");
        reject_unknown(*v, "config.shortwindow", {"grid"});
        if (const json* gv = find(*v, "grid"))
            cfg.shortwindow.grid = as_size_array(*gv, "shortwindow.grid");
    }

    cfg.checkpoint = get_string(j, "config", "checkpoint", cfg.checkpoint);
    cfg.seed = get_uint(j, "config", "seed", cfg.seed);
    cfg.out = get_string(j, "config", "out", cfg.out);

    cfg.validate();
    return cfg;
}

// Fully-resolved emission: every effective value is materialized so the
// manifest-embedded copy reruns the experiment byte-for-byte.
inline jsonio::json emit_config(const ExperimentConfig& cfg) {
    using jsonio::json;
    json j;
    j["schema_version"] = config_schema_version;
    j["experiment"] = cfg.experiment;
    json kinds = json::array();
    for (NeuronKind k : cfg.neurons) kinds.push_back(to_string(k));
    j["neuron"] = std::move(kinds);
    j["params"] = {{"lambda", cfg.params.lambda}, {"v_th", cfg.params.v_th},
                   {"alpha", cfg.params.alpha},   {"beta", cfg.params.beta},
                   {"gamma", cfg.params.gamma},   {"sg_width", cfg.params.sg_width}};
    j["network"] = {{"hidden", cfg.hidden}, {"readout_lambda", cfg.readout_lambda}};
    j["T"] = cfg.T;
    {
        json d;
        d["kind"] = cfg.dataset.kind;
        d["train"] = cfg.dataset.train;
        d["test"] = cfg.dataset.test;
        d["features"] = cfg.dataset.features;
        d["low"] = cfg.dataset.low;
        d["high"] = cfg.dataset.high;
        d["h"] = cfg.dataset.h;
        d["w"] = cfg.dataset.w;
        d["images"] = cfg.dataset.images;
        d["labels"] = cfg.dataset.labels;
        d["test_images"] = cfg.dataset.test_images;
        d["test_labels"] = cfg.dataset.test_labels;
        d["encoding"] = to_string(cfg.dataset.encoding);
        j["dataset"] = std::move(d);
    }
    {
        json t;
        t["epochs"] = cfg.train.epochs;
        t["batch"] = cfg.train.batch;
        t["optimizer"] = to_string(cfg.train.optimizer.kind);
        t["lr"] = cfg.train.optimizer.lr;
        t["momentum"] = cfg.train.optimizer.momentum;
        t["weight_decay"] = cfg.train.optimizer.weight_decay;
        t["adam_beta1"] = cfg.train.optimizer.adam_beta1;
        t["adam_beta2"] = cfg.train.optimizer.adam_beta2;
        t["adam_eps"] = cfg.train.optimizer.adam_eps;
        t["loss"] = to_string(cfg.train.loss);
        t["tet_lambda"] = cfg.train.tet_lambda;
        j["train"] = std::move(t);
    }
    j["noise"] = {{"kind", to_string(cfg.noise.kind)},
                  {"levels", cfg.noise.resolved_levels()},
                  {"pixel_std", cfg.noise.pixel_std}};
    j["dynamics"] = {{"input", cfg.dynamics.input},
                     {"rate", cfg.dynamics.rate},
                     {"amplitude", cfg.dynamics.amplitude},
                     {"value", cfg.dynamics.value},
                     {"T", cfg.dynamics.T}};
    j["sweep"] = {{"intensities", cfg.sweep.resolved_intensities()}, {"T", cfg.sweep.T}};
    j["shortwindow"] = {{"grid", cfg.shortwindow.grid}};
    j["checkpoint"] = cfg.checkpoint;
    j["seed"] = cfg.seed;
    j["out"] = cfg.out;
    return j;
}

inline ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {}) {
    const std::string text = read_text_file(path);
    jsonio::json j;
    try {
        j = jsonio::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j, std::move(base));
}

inline TrainOptions to_train_options(const ExperimentConfig& cfg) {
    TrainOptions o;
    o.epochs = cfg.train.epochs;
    o.batch = cfg.train.batch;
    o.seed = cfg.seed;
    o.optimizer = cfg.train.optimizer;
    o.loss = cfg.train.loss;
    o.tet_lambda = cfg.train.tet_lambda;
    return o;
}

} // namespace kvlif
