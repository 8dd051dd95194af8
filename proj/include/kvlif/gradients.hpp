#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "kvlif/errors.hpp"
#include "kvlif/network.hpp"
#include "kvlif/tensor.hpp"

// Reverse-mode gradients over the recorded tape. The spike nonlinearity is the
// only non-differentiable op; its derivative is replaced by the rectangular
// surrogate. Everything else — membrane decay, the shunting sigmoid, the
// adaptive-reset sigmoid, the potassium recursion, the readout integrator — is
// differentiated exactly, including the cross-step paths through U and K.
//
// The same code serves both spike modes: on a relaxed-mode tape it is the exact
// adjoint of the relaxed forward (up to the measure-zero clamp corners), which
// is what makes finite-difference checking meaningful.

namespace kvlif {

struct SurrogateSpec {
    double width = 1.0;  // sigma_w, "typically set to the threshold value"
};

// Rectangle around the threshold; the window test is strict, so a membrane
// exactly at the window edge contributes zero gradient.
inline double surrogate_grad(double u_pre, const SurrogateSpec& spec, double v_th) {
    if (!(spec.width > 0.0)) throw ConfigError("surrogate_grad: width must be > 0");
    return std::abs(u_pre - v_th) < spec.width / 2.0 ? 1.0 / spec.width : 0.0;
}

struct LayerGrads {
    Matrix w;
    std::vector<double> b;
};

struct Gradients {
    std::vector<LayerGrads> blocks;
    LayerGrads readout;
    // Optional Eq.-5-style decomposition: per_step[t] holds the weight-gradient
    // contribution of applications at time step t alone (same layout as above).
    std::vector<std::vector<LayerGrads>> per_step_blocks;
    std::vector<LayerGrads> per_step_readout;
};

namespace detail {

inline LayerGrads zero_grads_like(const DenseLayer& layer) {
    LayerGrads g;
    g.w = Matrix(layer.w.rows, layer.w.cols);
    g.b.assign(layer.has_bias ? layer.b.size() : 0, 0.0);
    return g;
}

// dW += dI^T-outer-s_in summed over the batch; db += column sums of dI.
inline void accumulate_affine(const Matrix& d_current, const Matrix& s_in, LayerGrads& g) {
    const std::size_t B = d_current.rows, N = d_current.cols, F = s_in.cols;
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t n = 0; n < N; ++n) {
            const double d = d_current.at(b, n);
            if (d == 0.0) continue;
            double* wrow = &g.w.v[n * F];
            const double* srow = &s_in.v[b * F];
            for (std::size_t f = 0; f < F; ++f) wrow[f] += d * srow[f];
            if (!g.b.empty()) g.b[n] += d;
        }
}

// dS_in = dI * W.
inline void backprop_affine(const Matrix& d_current, const DenseLayer& layer, Matrix& d_s_in) {
    const std::size_t B = d_current.rows, N = layer.out_dim(), F = layer.in_dim();
    d_s_in = Matrix(B, F);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t n = 0; n < N; ++n) {
            const double d = d_current.at(b, n);
            if (d == 0.0) continue;
            const double* wrow = &layer.w.v[n * F];
            double* srow = &d_s_in.v[b * F];
            for (std::size_t f = 0; f < F; ++f) srow[f] += d * wrow[f];
        }
}

inline double sigmoid_deriv(double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
}

} // namespace detail

struct BackwardOptions {
    bool collect_per_step = false;
};

inline Gradients backward(const Network& net, const Tape& tape, const Tensor3& loss_grad,
                          const BackwardOptions& opts = {}) {
    const std::size_t L = net.blocks.size();
    if (tape.blocks.size() != L) throw ConfigError("backward: tape does not match network");
    if (!loss_grad.same_shape(tape.logits))
        throw ConfigError("backward: loss_grad shape does not match recorded logits");
    const std::size_t B = tape.logits.batch, T = tape.logits.time, C = net.classes();

    Gradients g;
    g.blocks.reserve(L);
    for (const Block& blk : net.blocks) g.blocks.push_back(detail::zero_grads_like(blk.layer));
    g.readout = detail::zero_grads_like(net.readout);
    if (opts.collect_per_step) {
        g.per_step_blocks.resize(T);
        g.per_step_readout.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
            for (const Block& blk : net.blocks)
                g.per_step_blocks[t].push_back(detail::zero_grads_like(blk.layer));
            g.per_step_readout[t] = detail::zero_grads_like(net.readout);
        }
    }

    // Cross-step adjoint carries, one pair per block.
    std::vector<Matrix> carry_u(L), carry_k(L);
    for (std::size_t l = 0; l < L; ++l) {
        carry_u[l] = Matrix(B, net.blocks[l].layer.out_dim());
        carry_k[l] = Matrix(B, net.blocks[l].layer.out_dim());
    }
    Matrix carry_read(B, C);  // lambda_r * a_u_read[t+1]

    Matrix d_current, d_spike_next;
    for (std::size_t t = T; t-- > 0;) {
        // Readout: a_u[t] = dL/dlogits[t] + lambda_r * a_u[t+1]; dI = a_u.
        Matrix a_read(B, C);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < C; ++c)
                a_read.at(b, c) = loss_grad.at(b, c, t) + carry_read.at(b, c);
        const Matrix& s_last = tape.blocks[L - 1].spike[t];
        detail::accumulate_affine(a_read, s_last, g.readout);
        if (opts.collect_per_step) detail::accumulate_affine(a_read, s_last, g.per_step_readout[t]);
        detail::backprop_affine(a_read, net.readout, d_spike_next);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < C; ++c)
                carry_read.at(b, c) = net.readout_lambda * a_read.at(b, c);

        // Blocks, top to bottom; d_spike_next is dL/dS of the block being
        // visited, accumulated from the layer above at this same step.
        for (std::size_t l = L; l-- > 0;) {
            const Block& blk = net.blocks[l];
            const NeuronParams& p = blk.params;
            const SurrogateSpec sg{p.sg_width};
            const std::size_t N = blk.layer.out_dim();
            const BlockTrace& tr = tape.blocks[l];

            d_current = Matrix(B, N);  // dL/d(raw synaptic current) at this step
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t n = 0; n < N; ++n) {
                    const double u_pre = tr.u_pre[t].at(b, n);
                    const double s = tr.spike[t].at(b, n);
                    const double g_spike = d_spike_next.at(b, n);
                    const double a_upost = carry_u[l].at(b, n);
                    const double sgv = surrogate_grad(u_pre, sg, p.v_th);

                    if (blk.kind == NeuronKind::kvlif) {
                        const double k_post = tr.k_post[t].at(b, n);
                        const double k_prev = t > 0 ? tr.k_post[t - 1].at(b, n) : 0.0;
                        // All paths into K[t]: carry from t+1 plus this step's reset.
                        const double a_k = carry_k[l].at(b, n) +
                                           a_upost * (-s * detail::sigmoid_deriv(k_post));
                        // All paths into S[t]: next layer, reset, K surge.
                        const double a_s = g_spike - a_upost * (p.v_th + sigmoid(k_post)) + a_k;
                        // U_pre[t]: direct reset path, K leak coupling, spike.
                        const double a_u = a_upost + p.beta * a_k + a_s * sgv;
                        // Carries to t-1.
                        carry_u[l].at(b, n) = p.lambda * a_u;
                        carry_k[l].at(b, n) =
                            p.alpha * a_k -
                            a_u * tr.i_raw[t].at(b, n) * p.gamma * detail::sigmoid_deriv(k_prev);
                        // Raw current feels the shunt gate.
                        const double gate = 1.0 - p.gamma * sigmoid(k_prev);
                        d_current.at(b, n) = a_u * gate;
                    } else if (blk.kind == NeuronKind::lif_soft) {
                        const double a_s = g_spike - a_upost * p.v_th;
                        const double a_u = a_upost + a_s * sgv;
                        carry_u[l].at(b, n) = p.lambda * a_u;
                        d_current.at(b, n) = a_u;
                    } else {  // lif_hard
                        const double a_s = g_spike - a_upost * u_pre;
                        const double a_u = a_upost * (1.0 - s) + a_s * sgv;
                        carry_u[l].at(b, n) = p.lambda * a_u;
                        d_current.at(b, n) = a_u;
                    }
                }
            }

            // Weight/bias accumulation against this block's input spikes.
            if (l == 0) {
                Matrix x_t(B, tape.input.features);
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t f = 0; f < tape.input.features; ++f)
                        x_t.at(b, f) = tape.input.at(b, f, t);
                detail::accumulate_affine(d_current, x_t, g.blocks[0]);
                if (opts.collect_per_step)
                    detail::accumulate_affine(d_current, x_t, g.per_step_blocks[t][0]);
            } else {
                const Matrix& s_in = tape.blocks[l - 1].spike[t];
                detail::accumulate_affine(d_current, s_in, g.blocks[l]);
                if (opts.collect_per_step)
                    detail::accumulate_affine(d_current, s_in, g.per_step_blocks[t][l]);
                detail::backprop_affine(d_current, blk.layer, d_spike_next);
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Layer-wise gradient L2 norms (blocks in order, then readout), with mean and
// population standard deviation across layers.

struct GradNorms {
    std::vector<double> per_layer;
    double mean = 0.0;
    double stddev = 0.0;
};

inline GradNorms grad_l2_norms(const Gradients& g) {
    GradNorms out;
    auto norm_of = [](const LayerGrads& lg) {
        double acc = 0.0;
        for (double v : lg.w.v) acc += v * v;
        for (double v : lg.b) acc += v * v;
        return std::sqrt(acc);
    };
    for (const LayerGrads& lg : g.blocks) out.per_layer.push_back(norm_of(lg));
    out.per_layer.push_back(norm_of(g.readout));
    for (double n : out.per_layer) out.mean += n;
    out.mean /= double(out.per_layer.size());
    for (double n : out.per_layer) out.stddev += (n - out.mean) * (n - out.mean);
    out.stddev = std::sqrt(out.stddev / double(out.per_layer.size()));
    return out;
}

} // namespace kvlif
