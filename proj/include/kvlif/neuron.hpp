#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kvlif/errors.hpp"
#include "kvlif/tensor.hpp"

// Discrete-time neuron dynamics.
//
// Three neuron kinds share the leaky integration u_pre = lambda*u_prev + i and
// a >= threshold comparison; they differ in the reset and in the auxiliary
// potassium variable:
//
//   lif_soft : subtractive reset   u_post = u_pre - v_th*spike
//   lif_hard : zeroing reset       u_post = u_pre*(1 - spike)
//   kvlif    : potassium-gated input shunt, spike-triggered K surge, and a
//              hyperpolarizing reset u_post = u_pre - spike*(v_th + sigmoid(k))
//
// KvLIF update order per step (normative for every code path):
//   (1) shunt      i' = i * (1 - gamma*sigmoid(k_prev))
//   (2) integrate  u_pre = lambda*u_prev + i'
//   (3) K leak     k_init = alpha*k_prev + beta*u_pre
//   (4) fire       spike = H(u_pre - v_th)         (H(0) = 1)
//   (5) K surge    k = k_init + spike
//   (6) reset      u_post = u_pre - spike*(v_th + sigmoid(k))
//
// k is never clamped; strongly negative membrane potentials feed back through
// beta*u_pre and may drive k below zero, which weakens the next reset. That is
// intended behaviour, not an error.

namespace kvlif {

enum class NeuronKind { lif_soft, lif_hard, kvlif };

inline std::string to_string(NeuronKind k) {
    switch (k) {
        case NeuronKind::lif_soft: return "lif-s";
        case NeuronKind::lif_hard: return "lif-h";
        case NeuronKind::kvlif: return "kvlif";
    }
    return "?";
}

inline NeuronKind neuron_kind_from_string(const std::string& s) {
    if (s == "lif-s") return NeuronKind::lif_soft;
    if (s == "lif-h") return NeuronKind::lif_hard;
    if (s == "kvlif") return NeuronKind::kvlif;
    throw ConfigError("unknown neuron kind '" + s + "' (expected lif-s | lif-h | kvlif)");
}

template <typename Real = double>
struct NeuronParamsT {
    Real lambda = Real(0.5);   // membrane decay, must lie strictly in (0,1)
    Real v_th = Real(1);       // firing threshold, > 0
    Real alpha = Real(0.8);    // potassium decay, in [0,1)
    Real beta = Real(0.3);     // membrane->potassium coupling, >= 0
    Real gamma = Real(0.05);   // input shunt strength, in [0,1]
    Real sg_width = Real(1);   // rectangular surrogate window width, > 0

    void validate() const {
        if (!(lambda > Real(0) && lambda < Real(1)))
            throw ConfigError("neuron.lambda must lie strictly in (0,1), got " + std::to_string(double(lambda)));
        if (!(v_th > Real(0)))
            throw ConfigError("neuron.v_th must be > 0, got " + std::to_string(double(v_th)));
        if (!(alpha >= Real(0) && alpha < Real(1)))
            throw ConfigError("neuron.alpha must lie in [0,1), got " + std::to_string(double(alpha)));
        if (!(beta >= Real(0)))
            throw ConfigError("neuron.beta must be >= 0, got " + std::to_string(double(beta)));
        if (!(gamma >= Real(0) && gamma <= Real(1)))
            throw ConfigError("neuron.gamma must lie in [0,1], got " + std::to_string(double(gamma)));
        if (!(sg_width > Real(0)))
            throw ConfigError("neuron.sg_width must be > 0, got " + std::to_string(double(sg_width)));
    }
};
using NeuronParams = NeuronParamsT<double>;

// State is zero-initialized: a fresh neuron is at rest.
template <typename Real = double>
struct NeuronStateT {
    Real u = Real(0);
    Real k = Real(0);
};
using NeuronState = NeuronStateT<double>;

template <typename Real = double>
struct StepOutputT {
    Real spike = Real(0);
    NeuronStateT<Real> state;  // post-reset state
    Real u_pre = Real(0);      // membrane potential before reset (what the threshold saw)
};
using StepOutput = StepOutputT<double>;

template <typename Real>
inline Real sigmoid(Real x) {
    return Real(1) / (Real(1) + std::exp(-x));
}

// Shared so that subthreshold KvLIF with gamma = 0 is bitwise identical to LIF.
template <typename Real>
inline Real integrate(Real lambda, Real u_prev, Real i) {
    return lambda * u_prev + i;
}

// Threshold comparison is >=: a membrane exactly at v_th fires.
template <typename Real>
inline Real heaviside(Real x) {
    return x >= Real(0) ? Real(1) : Real(0);
}

namespace detail {
template <typename Real>
inline void check_input_finite(Real i) {
    if (!std::isfinite(i)) throw StepError("non-finite input current", 0, 0, 0);
}
} // namespace detail

template <typename Real>
StepOutputT<Real> lif_soft_step(Real i, const NeuronStateT<Real>& prev, const NeuronParamsT<Real>& p) {
    detail::check_input_finite(i);
    StepOutputT<Real> out;
    out.u_pre = integrate(p.lambda, prev.u, i);
    out.spike = heaviside(out.u_pre - p.v_th);
    out.state.u = out.u_pre - p.v_th * out.spike;
    out.state.k = Real(0);
    return out;
}

template <typename Real>
StepOutputT<Real> lif_hard_step(Real i, const NeuronStateT<Real>& prev, const NeuronParamsT<Real>& p) {
    detail::check_input_finite(i);
    StepOutputT<Real> out;
    out.u_pre = integrate(p.lambda, prev.u, i);
    out.spike = heaviside(out.u_pre - p.v_th);
    out.state.u = out.u_pre * (Real(1) - out.spike);
    out.state.k = Real(0);
    return out;
}

template <typename Real>
StepOutputT<Real> kvlif_step(Real i, const NeuronStateT<Real>& prev, const NeuronParamsT<Real>& p) {
    detail::check_input_finite(i);
    StepOutputT<Real> out;
    const Real gate = Real(1) - p.gamma * sigmoid(prev.k);
    const Real shunted = i * gate;
    out.u_pre = integrate(p.lambda, prev.u, shunted);
    const Real k_init = p.alpha * prev.k + p.beta * out.u_pre;
    out.spike = heaviside(out.u_pre - p.v_th);
    const Real k = k_init + out.spike;
    out.state.u = out.u_pre - out.spike * (p.v_th + sigmoid(k));
    out.state.k = k;
    return out;
}

template <typename Real>
StepOutputT<Real> neuron_step(NeuronKind kind, Real i, const NeuronStateT<Real>& prev,
                              const NeuronParamsT<Real>& p) {
    switch (kind) {
        case NeuronKind::lif_soft: return lif_soft_step(i, prev, p);
        case NeuronKind::lif_hard: return lif_hard_step(i, prev, p);
        case NeuronKind::kvlif: return kvlif_step(i, prev, p);
    }
    throw ConfigError("neuron_step: bad kind");
}

// ---------------------------------------------------------------------------
// Population trace over a fixed input sequence.

struct TraceStep {
    std::vector<double> u_pre;   // pre-reset membrane
    std::vector<double> u_post;  // post-reset membrane
    std::vector<double> k;       // post-surge potassium (0 for LIF kinds)
    std::vector<double> spike;
};

struct Trace {
    std::size_t neurons = 0;
    std::vector<TraceStep> steps;

    std::size_t spike_count() const {
        std::size_t n = 0;
        for (const auto& s : steps)
            for (double v : s.spike) n += (v != 0.0);
        return n;
    }
    double firing_rate() const {
        if (steps.empty() || neurons == 0) return 0.0;
        return double(spike_count()) / (double(steps.size()) * double(neurons));
    }
};

// inputs: rows = time steps, cols = neurons. All neurons start at rest.
inline Trace run_sequence(NeuronKind kind, const Matrix& inputs, const NeuronParams& p) {
    p.validate();
    if (inputs.rows == 0 || inputs.cols == 0)
        throw ConfigError("run_sequence: input sequence must be non-empty (got " +
                          std::to_string(inputs.rows) + " x " + std::to_string(inputs.cols) + ")");
    Trace trace;
    trace.neurons = inputs.cols;
    trace.steps.resize(inputs.rows);
    std::vector<NeuronState> state(inputs.cols);
    for (std::size_t t = 0; t < inputs.rows; ++t) {
        TraceStep& ts = trace.steps[t];
        ts.u_pre.resize(inputs.cols);
        ts.u_post.resize(inputs.cols);
        ts.k.resize(inputs.cols);
        ts.spike.resize(inputs.cols);
        for (std::size_t n = 0; n < inputs.cols; ++n) {
            const double i = inputs.at(t, n);
            if (!std::isfinite(i)) throw StepError("non-finite input current", 0, t, n);
            const StepOutput out = neuron_step(kind, i, state[n], p);
            state[n] = out.state;
            ts.u_pre[n] = out.u_pre;
            ts.u_post[n] = out.state.u;
            ts.k[n] = out.state.k;
            ts.spike[n] = out.spike;
        }
    }
    return trace;
}

} // namespace kvlif
