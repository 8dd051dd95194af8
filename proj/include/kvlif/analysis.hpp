#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kvlif/errors.hpp"
#include "kvlif/neuron.hpp"
#include "kvlif/tensor.hpp"

// Closed-form limitation analysis of the soft-reset LIF neuron, plus the two
// single-neuron demonstration protocols (intensity sweep, false-positive
// scenario) and firing-rate statistics.

namespace kvlif {

// Minimum constant input that elicits a spike this step, given the residual
// membrane delta_prev carried over from the previous step:
//   I_min = v_th - lambda * delta_prev.
// Any residual strictly lowers the effective threshold below v_th.
inline double min_input_soft(double delta_prev, const NeuronParams& p) {
    p.validate();
    if (!(delta_prev >= 0.0))
        throw ConfigError("min_input_soft: delta_prev must be >= 0, got " + std::to_string(delta_prev));
    return p.v_th - p.lambda * delta_prev;
}

// Residual accumulated by iterating delta <- lambda*delta + delta_i for T steps
// from zero; the geometric series sums to delta_i * (1 - lambda^T)/(1 - lambda).
inline double residual_closed_form(double delta_i, double lambda, std::size_t T) {
    if (!(delta_i > 0.0))
        throw ConfigError("residual_closed_form: delta_i must be > 0, got " + std::to_string(delta_i));
    if (!(lambda > 0.0 && lambda < 1.0))
        throw ConfigError("residual_closed_form: lambda must lie in (0,1), got " + std::to_string(lambda));
    if (T < 1) throw ConfigError("residual_closed_form: T must be >= 1");
    return delta_i * (1.0 - std::pow(lambda, double(T))) / (1.0 - lambda);
}

// ---------------------------------------------------------------------------
// Intensity sweep: constant drive at each grid point, T steps from rest.

struct SweepResult {
    std::vector<double> intensities;                // strictly increasing grid
    std::vector<NeuronKind> models;
    std::vector<std::vector<double>> rates;         // [model][grid point], in [0,1]
    std::vector<std::vector<std::size_t>> counts;   // [model][grid point]
};

inline SweepResult intensity_sweep(const std::vector<NeuronKind>& models,
                                   const std::vector<double>& intensities, std::size_t T,
                                   const NeuronParams& p) {
    p.validate();
    if (models.empty()) throw ConfigError("intensity_sweep: no models given");
    if (intensities.empty()) throw ConfigError("intensity_sweep: empty intensity grid");
    if (T < 1) throw ConfigError("intensity_sweep: T must be >= 1");
    for (std::size_t i = 0; i < intensities.size(); ++i) {
        if (!(intensities[i] >= 0.0))
            throw ConfigError("intensity_sweep: intensities must be >= 0, got " +
                              std::to_string(intensities[i]));
        if (i > 0 && !(intensities[i] > intensities[i - 1]))
            throw ConfigError("intensity_sweep: intensity grid must be strictly increasing");
    }

    SweepResult res;
    res.intensities = intensities;
    res.models = models;
    res.rates.resize(models.size());
    res.counts.resize(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
        for (double intensity : intensities) {
            Matrix drive(T, 1, intensity);
            Trace tr = run_sequence(models[m], drive, p);
            res.counts[m].push_back(tr.spike_count());
            res.rates[m].push_back(tr.firing_rate());
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// False-positive scenario: one event, then one subthreshold noise pulse, then
// silence. A spike anywhere after step 0 is a false positive.

inline std::vector<double> false_positive_scenario(NeuronKind kind, double event_amp,
                                                   double noise_amp, const NeuronParams& p,
                                                   std::size_t T = 8) {
    p.validate();
    if (!(noise_amp < p.v_th))
        throw ConfigError("false_positive_scenario: noise_amp must be < v_th");
    if (!(event_amp >= p.v_th))
        throw ConfigError("false_positive_scenario: event_amp must be >= v_th");
    if (T < 2) throw ConfigError("false_positive_scenario: need at least 2 steps");
    Matrix in(T, 1, 0.0);
    in.at(0, 0) = event_amp;
    in.at(1, 0) = noise_amp;
    Trace tr = run_sequence(kind, in, p);
    std::vector<double> spikes(T);
    for (std::size_t t = 0; t < T; ++t) spikes[t] = tr.steps[t].spike[0];
    return spikes;
}

inline bool has_false_positive(const std::vector<double>& spikes) {
    for (std::size_t t = 1; t < spikes.size(); ++t)
        if (spikes[t] != 0.0) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Firing-rate statistics. Denominator covers every neuron at every time step
// of every batch entry; this is the only reading under which a 7-spike,
// 40-step single-neuron trace yields 17.50%.

inline double firing_rate(const Tensor3& spikes) {
    if (spikes.size() == 0) throw ConfigError("firing_rate: empty spike tensor");
    std::size_t count = 0;
    for (double s : spikes.v) {
        if (s != 0.0 && s != 1.0)
            throw ConfigError("firing_rate: spike tensor must be binary, saw " + std::to_string(s));
        count += (s != 0.0);
    }
    return double(count) / double(spikes.size());
}

// Per-layer rates plus the all-layer aggregate (last element).
inline std::vector<double> firing_rate_per_layer(const std::vector<Tensor3>& layer_spikes) {
    if (layer_spikes.empty()) throw ConfigError("firing_rate_per_layer: no layers");
    std::vector<double> rates;
    std::size_t count = 0, total = 0;
    for (const Tensor3& sp : layer_spikes) {
        rates.push_back(firing_rate(sp));
        for (double s : sp.v) count += (s != 0.0);
        total += sp.size();
    }
    rates.push_back(double(count) / double(total));
    return rates;
}

} // namespace kvlif
