#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kvlif/errors.hpp"
#include "kvlif/network.hpp"

// Synaptic-operation energy model. A spike arriving at a layer costs one
// accumulate (AC) per outgoing connection, so a step with 3 input spikes
// feeding a 4-unit layer books 12 ACs. Analog (direct-encoded) input rows
// cost a full multiply-accumulate (MAC) grid per step instead. The kvlif
// update additionally spends three real multiplies plus one sigmoid per
// neuron-step; the sigmoid is billed as one MAC-equivalent, so the default
// surcharge is 4 MACs per neuron-step. Passive decay multiplies and bias
// adds are free by convention. Default costs are the usual 45 nm process
// figures: 0.9 pJ per AC, 4.6 pJ per MAC.

namespace kvlif {

struct EnergyOptions {
    double e_ac_pj = 0.9;
    double e_mac_pj = 4.6;
    double kvlif_mac_per_neuron_step = 4.0;

    void validate() const {
        if (!(e_ac_pj >= 0.0) || !std::isfinite(e_ac_pj))
            throw ConfigError("energy.e_ac_pj must be a finite value >= 0");
        if (!(e_mac_pj >= 0.0) || !std::isfinite(e_mac_pj))
            throw ConfigError("energy.e_mac_pj must be a finite value >= 0");
        if (!(kvlif_mac_per_neuron_step >= 0.0) || !std::isfinite(kvlif_mac_per_neuron_step))
            throw ConfigError("energy.kvlif_mac_per_neuron_step must be a finite value >= 0");
    }
};

struct LayerEnergy {
    double n_ac = 0.0;
    double n_mac = 0.0;
};

struct EnergyReport {
    double n_ac = 0.0;   // total accumulate ops
    double n_mac = 0.0;  // total multiply-accumulate ops (may be fractional
                         // if a custom kvlif surcharge is configured)
    double e_ac_pj = 0.9;
    double e_mac_pj = 4.6;
    std::vector<LayerEnergy> layers;  // blocks in order, then the readout

    double total_pj() const { return e_ac_pj * n_ac + e_mac_pj * n_mac; }
    double total_uj() const { return total_pj() * 1e-6; }

    EnergyReport operator+(const EnergyReport& o) const {
        if (e_ac_pj != o.e_ac_pj || e_mac_pj != o.e_mac_pj)
            throw ConfigError("EnergyReport: cannot add reports with different op costs");
        if (!layers.empty() && !o.layers.empty() && layers.size() != o.layers.size())
            throw ConfigError("EnergyReport: cannot add reports with different layer counts");
        EnergyReport out = *this;
        out.n_ac += o.n_ac;
        out.n_mac += o.n_mac;
        if (out.layers.size() < o.layers.size()) out.layers.resize(o.layers.size());
        for (std::size_t l = 0; l < o.layers.size(); ++l) {
            out.layers[l].n_ac += o.layers[l].n_ac;
            out.layers[l].n_mac += o.layers[l].n_mac;
        }
        return out;
    }
};

// Books raw op counts at the given prices (no per-layer breakdown).
inline EnergyReport energy_from_counts(double n_ac, double n_mac,
                                       const EnergyOptions& opt = {}) {
    opt.validate();
    EnergyReport r;
    r.n_ac = n_ac;
    r.n_mac = n_mac;
    r.e_ac_pj = opt.e_ac_pj;
    r.e_mac_pj = opt.e_mac_pj;
    return r;
}

namespace detail {

inline double count_nonzero(const Matrix& m) {
    double n = 0.0;
    for (double v : m.v) n += (v != 0.0);
    return n;
}

} // namespace detail

// Walks a recorded binary-mode tape and books every synaptic op. The tape
// must come from forward(..., SpikeMode::binary, /*record=*/true) on the
// same network.
inline EnergyReport energy_account(const Network& net, const Tape& tape,
                                   const EnergyOptions& opt = {}) {
    opt.validate();
    net.validate();
    if (tape.blocks.empty() || tape.input.size() == 0)
        throw ConfigError("energy_account: tape has no recorded activity; "
                          "run forward with record=true");
    if (tape.mode != SpikeMode::binary)
        throw ConfigError("energy_account: op counting is defined for binary spikes only");
    if (tape.blocks.size() != net.blocks.size() || tape.input.features != net.in_dim())
        throw ConfigError("energy_account: tape does not match the network layout");
    for (std::size_t l = 0; l < net.blocks.size(); ++l)
        if (!tape.blocks[l].spike.empty() &&
            tape.blocks[l].spike[0].cols != net.blocks[l].layer.out_dim())
            throw ConfigError("energy_account: tape does not match the network layout");

    const std::size_t B = tape.input.batch, T = tape.input.time, L = net.blocks.size();
    EnergyReport r;
    r.e_ac_pj = opt.e_ac_pj;
    r.e_mac_pj = opt.e_mac_pj;
    r.layers.assign(L + 1, LayerEnergy{});

    // First layer: analog frames pay the dense MAC grid every step, spike
    // trains pay one AC per event per outgoing connection.
    const std::size_t out0 = net.blocks[0].layer.out_dim();
    if (net.encoding == EncodingKind::direct) {
        r.layers[0].n_mac += double(B) * double(T) * double(net.in_dim()) * double(out0);
    } else {
        double events = 0.0;
        for (double v : tape.input.v) {
            if (v != 0.0 && v != 1.0)
                throw ConfigError("energy_account: " + to_string(net.encoding) +
                                  "-encoded input must be binary, saw " + std::to_string(v));
            events += (v != 0.0);
        }
        r.layers[0].n_ac += events * double(out0);
    }

    // Hidden fan-out and the readout: spikes recorded per step.
    for (std::size_t l = 0; l < L; ++l) {
        if (tape.blocks[l].spike.size() != T)
            throw ConfigError("energy_account: tape is missing per-step spikes");
        double events = 0.0;
        for (const Matrix& s : tape.blocks[l].spike) events += detail::count_nonzero(s);
        const std::size_t fan_out =
            l + 1 < L ? net.blocks[l + 1].layer.out_dim() : net.classes();
        r.layers[l + 1 < L ? l + 1 : L].n_ac += events * double(fan_out);

        if (net.blocks[l].kind == NeuronKind::kvlif)
            r.layers[l].n_mac += opt.kvlif_mac_per_neuron_step * double(B) * double(T) *
                                 double(net.blocks[l].layer.out_dim());
    }

    for (const LayerEnergy& le : r.layers) {
        r.n_ac += le.n_ac;
        r.n_mac += le.n_mac;
    }
    return r;
}

} // namespace kvlif
