#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kvlif/encoding.hpp"
#include "kvlif/errors.hpp"
#include "kvlif/neuron.hpp"
#include "kvlif/rng.hpp"
#include "kvlif/tensor.hpp"

// Time-unrolled feedforward SNN: a stack of (dense layer -> neuron population)
// blocks followed by a non-spiking leaky-integrator readout whose membrane
// potential provides the per-step logits. Within a time step the signal flows
// strictly forward: block l at step t consumes block l-1's spikes at step t.

namespace kvlif {

// Production forward emits binary spikes (Heaviside). The relaxed mode swaps in
// the piecewise-linear primitive clamp((u - v_th)/sg_width + 1/2, 0, 1), whose
// derivative is exactly the rectangular surrogate; finite-difference gradient
// checks run on this mode. Both modes share one backward implementation.
enum class SpikeMode { binary, relaxed };

struct DenseLayer {
    Matrix w;                // out x in
    std::vector<double> b;   // size out; empty when has_bias is false
    bool has_bias = true;

    std::size_t out_dim() const { return w.rows; }
    std::size_t in_dim() const { return w.cols; }
};

struct Block {
    DenseLayer layer;
    NeuronKind kind = NeuronKind::kvlif;
    NeuronParams params;
};

struct Network {
    std::vector<Block> blocks;
    DenseLayer readout;
    double readout_lambda = 0.5;  // decay of the readout integrator
    std::size_t T = 1;
    EncodingKind encoding = EncodingKind::direct;

    std::size_t in_dim() const { return blocks.empty() ? 0 : blocks.front().layer.in_dim(); }
    std::size_t classes() const { return readout.out_dim(); }

    void validate() const {
        if (blocks.empty()) throw ConfigError("network: needs at least one spiking block");
        if (T < 1) throw ConfigError("network: T must be >= 1");
        if (!(readout_lambda > 0.0 && readout_lambda < 1.0))
            throw ConfigError("network: readout_lambda must lie in (0,1)");
        std::size_t prev = blocks.front().layer.in_dim();
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            const Block& blk = blocks[l];
            blk.params.validate();
            if (blk.layer.in_dim() != prev)
                throw ConfigError("network: block " + std::to_string(l) + " expects input width " +
                                  std::to_string(blk.layer.in_dim()) + ", previous width is " +
                                  std::to_string(prev));
            if (blk.layer.has_bias && blk.layer.b.size() != blk.layer.out_dim())
                throw ConfigError("network: block " + std::to_string(l) + " bias size mismatch");
            for (double v : blk.layer.w.v)
                if (!std::isfinite(v)) throw ConfigError("network: non-finite weight in block " + std::to_string(l));
            prev = blk.layer.out_dim();
        }
        if (readout.in_dim() != prev)
            throw ConfigError("network: readout expects input width " + std::to_string(readout.in_dim()) +
                              ", last block emits " + std::to_string(prev));
        if (readout.has_bias && readout.b.size() != readout.out_dim())
            throw ConfigError("network: readout bias size mismatch");
        if (readout.out_dim() < 2) throw ConfigError("network: readout needs >= 2 classes");
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const Block& blk : blocks) n += blk.layer.w.size() + blk.layer.b.size();
        return n + readout.w.size() + readout.b.size();
    }
};

// All blocks share one neuron kind/params; hidden widths may be empty (input
// feeds the readout through a single block only when hidden is empty? no —
// every network has at least one spiking block, so hidden must be nonempty).
inline Network make_mlp(std::size_t in_dim, const std::vector<std::size_t>& hidden,
                        std::size_t classes, NeuronKind kind, const NeuronParams& params,
                        std::size_t T, EncodingKind encoding, double readout_lambda = -1.0) {
    if (in_dim == 0) throw ConfigError("make_mlp: in_dim must be > 0");
    if (hidden.empty()) throw ConfigError("make_mlp: need at least one hidden width");
    if (classes < 2) throw ConfigError("make_mlp: need >= 2 classes");
    params.validate();
    Network net;
    net.T = T;
    net.encoding = encoding;
    net.readout_lambda = readout_lambda > 0.0 ? readout_lambda : params.lambda;
    std::size_t prev = in_dim;
    for (std::size_t wdt : hidden) {
        if (wdt == 0) throw ConfigError("make_mlp: zero hidden width");
        Block blk;
        blk.kind = kind;
        blk.params = params;
        blk.layer.w = Matrix(wdt, prev);
        blk.layer.b.assign(wdt, 0.0);
        net.blocks.push_back(std::move(blk));
        prev = wdt;
    }
    net.readout.w = Matrix(classes, prev);
    net.readout.b.assign(classes, 0.0);
    net.validate();
    return net;
}

// Kaiming-uniform fan-in init (bound sqrt(6/fan_in)), biases zero. One derived
// stream per layer so adding a block never reshuffles earlier layers.
inline void init_weights(Network& net, std::uint64_t seed) {
    auto fill = [&](DenseLayer& layer, std::size_t layer_index) {
        const double bound = std::sqrt(6.0 / double(layer.in_dim()));
        auto rng = make_engine(seed, seed_stream::weights, layer_index);
        std::uniform_real_distribution<double> u(-bound, bound);
        for (double& w : layer.w.v) w = u(rng);
        for (double& b : layer.b) b = 0.0;
    };
    for (std::size_t l = 0; l < net.blocks.size(); ++l) fill(net.blocks[l].layer, l);
    fill(net.readout, net.blocks.size());
}

// ---------------------------------------------------------------------------
// Forward pass with optional tape recording.

struct BlockTrace {
    std::vector<Matrix> u_pre;   // [t] batch x n, membrane before reset
    std::vector<Matrix> spike;   // [t] batch x n
    std::vector<Matrix> k_post;  // [t] batch x n, post-surge potassium (kvlif only)
    std::vector<Matrix> i_raw;   // [t] batch x n, synaptic current before shunt (kvlif only)
};

struct Tape {
    Tensor3 input;                  // what layer 0 consumed
    std::vector<BlockTrace> blocks;
    Tensor3 logits;
    SpikeMode mode = SpikeMode::binary;
};

struct ForwardResult {
    Tensor3 logits;  // batch x classes x T
    Tape tape;       // populated only when recording was requested
    bool recorded = false;
};

namespace detail {

// I = S_in * W^T + b, batch-major.
inline void affine(const Matrix& s_in, const DenseLayer& layer, Matrix& out) {
    const std::size_t B = s_in.rows, N = layer.out_dim(), F = layer.in_dim();
    out = Matrix(B, N);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t n = 0; n < N; ++n) {
            double acc = layer.has_bias ? layer.b[n] : 0.0;
            const double* wrow = &layer.w.v[n * F];
            const double* srow = &s_in.v[b * F];
            for (std::size_t f = 0; f < F; ++f) acc += wrow[f] * srow[f];
            out.at(b, n) = acc;
        }
}

inline double spike_fn(double u_pre, double v_th, double sg_width, SpikeMode mode) {
    if (mode == SpikeMode::binary) return heaviside(u_pre - v_th);
    const double s = (u_pre - v_th) / sg_width + 0.5;
    return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
}

} // namespace detail

inline ForwardResult forward(const Network& net, const Tensor3& x,
                             SpikeMode mode = SpikeMode::binary, bool record = false) {
    net.validate();
    if (x.batch == 0 || x.time == 0) throw ConfigError("forward: empty input tensor");
    if (x.features != net.in_dim())
        throw ConfigError("forward: input has " + std::to_string(x.features) +
                          " features, network expects " + std::to_string(net.in_dim()));
    const std::size_t B = x.batch, T = x.time, L = net.blocks.size();
    for (std::size_t idx = 0; idx < x.v.size(); ++idx)
        if (!std::isfinite(x.v[idx]))
            throw StepError("non-finite network input", 0, (idx % x.time),
                            (idx / x.time) % x.features);

    ForwardResult res;
    res.recorded = record;
    res.logits = Tensor3(B, net.classes(), T);
    if (record) {
        res.tape.mode = mode;
        res.tape.input = x;
        res.tape.blocks.resize(L);
        for (std::size_t l = 0; l < L; ++l) {
            res.tape.blocks[l].u_pre.resize(T);
            res.tape.blocks[l].spike.resize(T);
            if (net.blocks[l].kind == NeuronKind::kvlif) {
                res.tape.blocks[l].k_post.resize(T);
                res.tape.blocks[l].i_raw.resize(T);
            }
        }
    }

    // Per-block state.
    std::vector<Matrix> U(L), K(L);
    for (std::size_t l = 0; l < L; ++l) {
        U[l] = Matrix(B, net.blocks[l].layer.out_dim());
        K[l] = Matrix(B, net.blocks[l].layer.out_dim());
    }
    Matrix u_read(B, net.classes());

    Matrix s_in, current, spikes;
    for (std::size_t t = 0; t < T; ++t) {
        // Layer 0 consumes the encoded input slice at t.
        s_in = Matrix(B, x.features);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t f = 0; f < x.features; ++f) s_in.at(b, f) = x.at(b, f, t);

        for (std::size_t l = 0; l < L; ++l) {
            const Block& blk = net.blocks[l];
            const NeuronParams& p = blk.params;
            const std::size_t N = blk.layer.out_dim();
            detail::affine(s_in, blk.layer, current);
            spikes = Matrix(B, N);
            Matrix u_pre_rec, k_rec, iraw_rec;
            if (record) {
                u_pre_rec = Matrix(B, N);
                if (blk.kind == NeuronKind::kvlif) {
                    k_rec = Matrix(B, N);
                    iraw_rec = current;
                }
            }
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t n = 0; n < N; ++n) {
                    double u_pre, s;
                    if (blk.kind == NeuronKind::kvlif) {
                        const double k_prev = K[l].at(b, n);
                        const double gate = 1.0 - p.gamma * sigmoid(k_prev);
                        u_pre = integrate(p.lambda, U[l].at(b, n), current.at(b, n) * gate);
                        if (!std::isfinite(u_pre)) throw StepError("non-finite activation", l, t, n);
                        const double k_init = p.alpha * k_prev + p.beta * u_pre;
                        s = detail::spike_fn(u_pre, p.v_th, p.sg_width, mode);
                        const double k = k_init + s;
                        U[l].at(b, n) = u_pre - s * (p.v_th + sigmoid(k));
                        K[l].at(b, n) = k;
                        if (record) k_rec.at(b, n) = k;
                    } else {
                        u_pre = integrate(p.lambda, U[l].at(b, n), current.at(b, n));
                        if (!std::isfinite(u_pre)) throw StepError("non-finite activation", l, t, n);
                        s = detail::spike_fn(u_pre, p.v_th, p.sg_width, mode);
                        U[l].at(b, n) = (blk.kind == NeuronKind::lif_soft)
                                            ? u_pre - p.v_th * s
                                            : u_pre * (1.0 - s);
                    }
                    spikes.at(b, n) = s;
                    if (record) u_pre_rec.at(b, n) = u_pre;
                }
            }
            if (record) {
                res.tape.blocks[l].u_pre[t] = std::move(u_pre_rec);
                res.tape.blocks[l].spike[t] = spikes;
                if (blk.kind == NeuronKind::kvlif) {
                    res.tape.blocks[l].k_post[t] = std::move(k_rec);
                    res.tape.blocks[l].i_raw[t] = std::move(iraw_rec);
                }
            }
            s_in = std::move(spikes);
        }

        // Non-spiking readout integrator.
        detail::affine(s_in, net.readout, current);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < net.classes(); ++c) {
                const double u = net.readout_lambda * u_read.at(b, c) + current.at(b, c);
                if (!std::isfinite(u)) throw StepError("non-finite activation", L, t, c);
                u_read.at(b, c) = u;
                res.logits.at(b, c, t) = u;
            }
    }
    if (record) res.tape.logits = res.logits;
    return res;
}

// Re-runs the forward pass from the tape's recorded input; with a deterministic
// graph this reproduces the recorded logits bitwise.
inline Tensor3 replay_forward(const Network& net, const Tape& tape) {
    return forward(net, tape.input, tape.mode, false).logits;
}

} // namespace kvlif
