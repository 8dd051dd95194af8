#pragma once

#include <cstdint>
#include <string>

#include "kvlif/io_util.hpp"
#include "kvlif/json_util.hpp"
#include "kvlif/network.hpp"
#include "kvlif/optim.hpp"
#include "kvlif/version.hpp"

// Checkpoint container, JSON on disk. Layout (format_version 1):
//
//   format_version   int, bumped on breaking changes
//   tool_version     writer's version string, informational
//   seed             master seed of the producing run
//   epochs_done      how many epochs the weights have seen
//   network          T / encoding / readout_lambda / blocks[] / readout
//                    (each layer stores w as {rows, cols, data} plus b)
//   optimizer        null before training, else {step, m[], v[]} moment
//                    buffers in layer order (blocks, then readout)
//
// Doubles are written in shortest round-trip form, so save -> load is
// bit-exact and a resumed run continues the identical trajectory.

namespace kvlif {

struct Checkpoint {
    std::uint64_t seed = 0;
    std::size_t epochs_done = 0;
    Network net;
    OptimizerState opt;  // may be uninitialized for fresh weights
};

namespace detail {

using jsonio::json;

inline json matrix_to_json(const Matrix& m) {
    json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    j["data"] = m.v;
    return j;
}

inline Matrix matrix_from_json(const json& j, const std::string& ctx) {
    jsonio::expect_object(j, ctx);
    jsonio::reject_unknown(j, ctx, {"rows", "cols", "data"});
    Matrix m(std::size_t(jsonio::as_uint(jsonio::require(j, ctx, "rows"), ctx + ".rows")),
             std::size_t(jsonio::as_uint(jsonio::require(j, ctx, "cols"), ctx + ".cols")));
    const auto data = jsonio::as_number_array(jsonio::require(j, ctx, "data"), ctx + ".data");
    if (data.size() != m.rows * m.cols)
        throw ConfigError(ctx + ": data length " + std::to_string(data.size()) +
                          " does not match rows*cols");
    m.v = data;
    return m;
}

inline json layer_to_json(const DenseLayer& l) {
    json j;
    j["w"] = matrix_to_json(l.w);
    j["has_bias"] = l.has_bias;
    j["b"] = l.b;
    return j;
}

inline DenseLayer layer_from_json(const json& j, const std::string& ctx) {
    jsonio::expect_object(j, ctx);
    jsonio::reject_unknown(j, ctx, {"w", "has_bias", "b"});
    DenseLayer l;
    l.w = matrix_from_json(jsonio::require(j, ctx, "w"), ctx + ".w");
    l.has_bias = jsonio::as_bool(jsonio::require(j, ctx, "has_bias"), ctx + ".has_bias");
    l.b = jsonio::as_number_array(jsonio::require(j, ctx, "b"), ctx + ".b");
    if (l.has_bias && l.b.size() != l.w.rows)
        throw ConfigError(ctx + ": bias length does not match layer width");
    return l;
}

inline json params_to_json(const NeuronParams& p) {
    json j;
    j["lambda"] = p.lambda;
    j["v_th"] = p.v_th;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["gamma"] = p.gamma;
    j["sg_width"] = p.sg_width;
    return j;
}

inline NeuronParams params_from_json(const json& j, const std::string& ctx) {
    jsonio::expect_object(j, ctx);
    jsonio::reject_unknown(j, ctx, {"lambda", "v_th", "alpha", "beta", "gamma", "sg_width"});
    NeuronParams p;
    p.lambda = jsonio::get_number(j, ctx, "lambda", p.lambda);
    p.v_th = jsonio::get_number(j, ctx, "v_th", p.v_th);
    p.alpha = jsonio::get_number(j, ctx, "alpha", p.alpha);
    p.beta = jsonio::get_number(j, ctx, "beta", p.beta);
    p.gamma = jsonio::get_number(j, ctx, "gamma", p.gamma);
    p.sg_width = jsonio::get_number(j, ctx, "sg_width", p.sg_width);
    p.validate();
    return p;
}

inline json grads_to_json(const LayerGrads& g) {
    json j;
    j["w"] = matrix_to_json(g.w);
    j["b"] = g.b;
    return j;
}

inline LayerGrads grads_from_json(const json& j, const std::string& ctx) {
    jsonio::expect_object(j, ctx);
    jsonio::reject_unknown(j, ctx, {"w", "b"});
    LayerGrads g;
    g.w = matrix_from_json(jsonio::require(j, ctx, "w"), ctx + ".w");
    g.b = jsonio::as_number_array(jsonio::require(j, ctx, "b"), ctx + ".b");
    return g;
}

inline json network_to_json(const Network& net) {
    json j;
    j["T"] = net.T;
    j["encoding"] = to_string(net.encoding);
    j["readout_lambda"] = net.readout_lambda;
    j["blocks"] = json::array();
    for (const Block& blk : net.blocks) {
        json b;
        b["kind"] = to_string(blk.kind);
        b["params"] = params_to_json(blk.params);
        b["layer"] = layer_to_json(blk.layer);
        j["blocks"].push_back(std::move(b));
    }
    j["readout"] = layer_to_json(net.readout);
    return j;
}

inline Network network_from_json(const json& j, const std::string& ctx) {
    jsonio::expect_object(j, ctx);
    jsonio::reject_unknown(j, ctx, {"T", "encoding", "readout_lambda", "blocks", "readout"});
    Network net;
    net.T = std::size_t(jsonio::as_uint(jsonio::require(j, ctx, "T"), ctx + ".T"));
    net.encoding =
        encoding_kind_from_string(jsonio::as_string(jsonio::require(j, ctx, "encoding"), ctx + ".encoding"));
    net.readout_lambda =
        jsonio::as_number(jsonio::require(j, ctx, "readout_lambda"), ctx + ".readout_lambda");
    const json& blocks = jsonio::require(j, ctx, "blocks");
    if (!blocks.is_array() || blocks.empty())
        throw ConfigError(ctx + ".blocks must be a non-empty array");
    for (std::size_t l = 0; l < blocks.size(); ++l) {
        const std::string bctx = ctx + ".blocks[" + std::to_string(l) + "]";
        jsonio::expect_object(blocks[l], bctx);
        jsonio::reject_unknown(blocks[l], bctx, {"kind", "params", "layer"});
        Block blk;
        blk.kind = neuron_kind_from_string(
            jsonio::as_string(jsonio::require(blocks[l], bctx, "kind"), bctx + ".kind"));
        blk.params = params_from_json(jsonio::require(blocks[l], bctx, "params"), bctx + ".params");
        blk.layer = layer_from_json(jsonio::require(blocks[l], bctx, "layer"), bctx + ".layer");
        net.blocks.push_back(std::move(blk));
    }
    net.readout = layer_from_json(jsonio::require(j, ctx, "readout"), ctx + ".readout");
    net.validate();
    return net;
}

} // namespace detail

inline jsonio::json checkpoint_to_json(const Checkpoint& ck) {
    jsonio::json j;
    j["format_version"] = checkpoint_format_version;
    j["tool_version"] = version_string;
    j["seed"] = ck.seed;
    j["epochs_done"] = ck.epochs_done;
    j["network"] = detail::network_to_json(ck.net);
    if (ck.opt.initialized()) {
        jsonio::json o;
        o["step"] = ck.opt.step;
        o["m"] = jsonio::json::array();
        o["v"] = jsonio::json::array();
        for (const LayerGrads& g : ck.opt.m) o["m"].push_back(detail::grads_to_json(g));
        for (const LayerGrads& g : ck.opt.v) o["v"].push_back(detail::grads_to_json(g));
        j["optimizer"] = std::move(o);
    } else {
        j["optimizer"] = nullptr;
    }
    return j;
}

inline Checkpoint checkpoint_from_json(const jsonio::json& j) {
    const std::string ctx = "checkpoint";
    jsonio::expect_object(j, ctx);
    jsonio::reject_unknown(j, ctx, {"format_version", "tool_version", "seed", "epochs_done",
                                    "network", "optimizer"});
    const auto ver = jsonio::as_uint(jsonio::require(j, ctx, "format_version"), ctx + ".format_version");
    if (ver != checkpoint_format_version)
        throw ConfigError("checkpoint: format_version " + std::to_string(ver) +
                          " is not supported; this build reads version " +
                          std::to_string(checkpoint_format_version));
    Checkpoint ck;
    ck.seed = jsonio::get_uint(j, ctx, "seed", 0);
    ck.epochs_done = std::size_t(jsonio::get_uint(j, ctx, "epochs_done", 0));
    ck.net = detail::network_from_json(jsonio::require(j, ctx, "network"), ctx + ".network");
    if (const jsonio::json* o = jsonio::find(j, "optimizer")) {
        const std::string octx = ctx + ".optimizer";
        jsonio::expect_object(*o, octx);
        jsonio::reject_unknown(*o, octx, {"step", "m", "v"});
        ck.opt.step = jsonio::as_uint(jsonio::require(*o, octx, "step"), octx + ".step");
        const jsonio::json& m = jsonio::require(*o, octx, "m");
        const jsonio::json& v = jsonio::require(*o, octx, "v");
        if (!m.is_array() || !v.is_array() || m.size() != v.size())
            throw ConfigError(octx + ": m and v must be arrays of equal length");
        for (std::size_t i = 0; i < m.size(); ++i) {
            ck.opt.m.push_back(detail::grads_from_json(m[i], octx + ".m[" + std::to_string(i) + "]"));
            ck.opt.v.push_back(detail::grads_from_json(v[i], octx + ".v[" + std::to_string(i) + "]"));
        }
        if (ck.opt.m.size() != ck.net.blocks.size() + 1)
            throw ConfigError(octx + ": moment buffers do not match the network layout");
    }
    return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    write_text_file(path, checkpoint_to_json(ck).dump(2) + "\n");
}

inline Checkpoint load_checkpoint(const std::string& path) {
    const std::string text = read_text_file(path);
    jsonio::json j;
    try {
        j = jsonio::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("checkpoint '" + path + "' is not valid JSON: " + e.what());
    }
    return checkpoint_from_json(j);
}

} // namespace kvlif
