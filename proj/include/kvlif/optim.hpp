#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kvlif/errors.hpp"
#include "kvlif/gradients.hpp"
#include "kvlif/network.hpp"

namespace kvlif {

enum class OptimizerKind { sgd, adam };

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

inline OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw ConfigError("unknown optimizer '" + s + "' (expected sgd | adam)");
}

struct OptimizerOptions {
    OptimizerKind kind = OptimizerKind::sgd;
    double lr = 0.1;
    double momentum = 0.9;       // sgd only; conventional default, override in config
    double weight_decay = 0.0;   // plain L2 added to the gradient
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (!(lr >= 0.0)) throw ConfigError("optimizer.lr must be >= 0");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("optimizer.momentum must lie in [0,1)");
        if (!(weight_decay >= 0.0)) throw ConfigError("optimizer.weight_decay must be >= 0");
        if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
            throw ConfigError("optimizer.adam betas must lie in [0,1)");
        if (!(adam_eps > 0.0)) throw ConfigError("optimizer.adam_eps must be > 0");
    }
};

// Moment buffers mirror the layer layout: blocks in order, then readout.
// Saved in checkpoints so a resumed run continues the identical trajectory.
struct OptimizerState {
    std::vector<LayerGrads> m;  // sgd velocity / adam first moment
    std::vector<LayerGrads> v;  // adam second moment (unused for sgd)
    std::uint64_t step = 0;

    bool initialized() const { return !m.empty(); }
};

inline OptimizerState make_optimizer_state(const Network& net) {
    OptimizerState st;
    auto push = [&](const DenseLayer& layer) {
        LayerGrads buf;
        buf.w = Matrix(layer.w.rows, layer.w.cols);
        buf.b.assign(layer.has_bias ? layer.b.size() : 0, 0.0);
        st.m.push_back(buf);
        st.v.push_back(buf);
    };
    for (const Block& blk : net.blocks) push(blk.layer);
    push(net.readout);
    return st;
}

namespace detail {

inline void sgd_update(std::vector<double>& w, const std::vector<double>& g,
                       std::vector<double>& vel, const OptimizerOptions& o) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double grad = g[i] + o.weight_decay * w[i];
        vel[i] = o.momentum * vel[i] + grad;
        w[i] -= o.lr * vel[i];
    }
}

inline void adam_update(std::vector<double>& w, const std::vector<double>& g,
                        std::vector<double>& m, std::vector<double>& v, std::uint64_t t,
                        const OptimizerOptions& o) {
    const double bc1 = 1.0 - std::pow(o.adam_beta1, double(t));
    const double bc2 = 1.0 - std::pow(o.adam_beta2, double(t));
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double grad = g[i] + o.weight_decay * w[i];
        m[i] = o.adam_beta1 * m[i] + (1.0 - o.adam_beta1) * grad;
        v[i] = o.adam_beta2 * v[i] + (1.0 - o.adam_beta2) * grad * grad;
        w[i] -= o.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + o.adam_eps);
    }
}

} // namespace detail

inline void apply_update(Network& net, const Gradients& g, OptimizerState& st,
                         const OptimizerOptions& o) {
    o.validate();
    const std::size_t L = net.blocks.size();
    if (g.blocks.size() != L || st.m.size() != L + 1)
        throw ConfigError("apply_update: gradient/state layout does not match network");
    st.step += 1;
    auto update_layer = [&](DenseLayer& layer, const LayerGrads& lg, std::size_t idx) {
        if (o.kind == OptimizerKind::sgd) {
            detail::sgd_update(layer.w.v, lg.w.v, st.m[idx].w.v, o);
            if (layer.has_bias) detail::sgd_update(layer.b, lg.b, st.m[idx].b, o);
        } else {
            detail::adam_update(layer.w.v, lg.w.v, st.m[idx].w.v, st.v[idx].w.v, st.step, o);
            if (layer.has_bias) detail::adam_update(layer.b, lg.b, st.m[idx].b, st.v[idx].b, st.step, o);
        }
    };
    for (std::size_t l = 0; l < L; ++l) update_layer(net.blocks[l].layer, g.blocks[l], l);
    update_layer(net.readout, g.readout, L);
}

} // namespace kvlif
