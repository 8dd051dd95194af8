// Release acceptance gate. Runs every criterion end to end — library-level
// checks plus the CLI determinism protocol — and prints one verdict line per
// criterion with its measured runtime. Exit status is the number of failed
// criteria, so ctest goes red if any criterion does.
//
// Usage: acceptance <path-to-kvlif-cli> <scratch-dir>
//
// The scratch dir is wiped on startup; everything the harness writes goes
// under it.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kvlif/analysis.hpp"
#include "kvlif/checkpoint.hpp"
#include "kvlif/config.hpp"
#include "kvlif/datasets.hpp"
#include "kvlif/energy.hpp"
#include "kvlif/experiments.hpp"
#include "kvlif/gradients.hpp"
#include "kvlif/io_util.hpp"
#include "kvlif/manifest.hpp"
#include "kvlif/network.hpp"
#include "kvlif/neuron.hpp"
#include "kvlif/rng.hpp"
#include "kvlif/train.hpp"

namespace fs = std::filesystem;
using namespace kvlif;

namespace {

struct Context {
    std::string cli;   // absolute path to the kvlif binary
    fs::path work;     // scratch root, wiped at startup
};

struct Report {
    bool ok = true;
    std::vector<std::string> notes;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back("FAILED: " + what);
        }
    }
    void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// Criterion 1: limitation theorems.
//
// 1000 random (lambda, delta_i, T) draws. The strict-monotonicity generator
// keeps lambda >= 0.4 and delta_i >= 0.1 so the analytic gap between
// consecutive I_min values, delta_i * lambda^(T+1), stays orders of magnitude
// above double ulp and strictness is decidable in floating point.

void criterion_limitation(const Context&, Report& rep) {
    std::mt19937_64 rng(515u);
    std::uniform_real_distribution<double> lam(0.4, 0.99), di(0.1, 2.0);
    std::uniform_int_distribution<std::size_t> horizon(1, 30);
    NeuronParams p;

    double worst_gap = 0.0;
    std::size_t mono = 0, below = 0, agree = 0;
    for (int c = 0; c < 1000; ++c) {
        p.lambda = lam(rng);
        const double delta_i = di(rng);
        const std::size_t T = horizon(rng);

        // closed form vs literal recursion
        double delta = 0.0;
        for (std::size_t t = 0; t < T; ++t) delta = p.lambda * delta + delta_i;
        const double closed = residual_closed_form(delta_i, p.lambda, T);
        const double gap = std::abs(closed - delta);
        worst_gap = std::max(worst_gap, gap);
        agree += gap < 1e-12;

        const double imin_t = min_input_soft(closed, p);
        const double imin_t1 = min_input_soft(residual_closed_form(delta_i, p.lambda, T + 1), p);
        mono += imin_t1 < imin_t;
        below += imin_t < p.v_th;
    }
    rep.require(agree == 1000, "closed form vs recursion beyond 1e-12 in " +
                                   std::to_string(1000 - agree) + "/1000 cases");
    rep.require(mono == 1000, "I_min[T+1] < I_min[T] violated in " +
                                  std::to_string(1000 - mono) + "/1000 cases");
    rep.require(below == 1000, "I_min < v_th violated in " + std::to_string(1000 - below) +
                                   "/1000 cases");
    rep.note("1000 cases, worst closed-form-vs-recursion gap " + fmt(worst_gap));
}

// ---------------------------------------------------------------------------
// Criterion 2: single-step KvLIF oracle.
//
// The oracle below spells out the update order — shunt, integrate, potassium
// update, threshold, surge, adaptive reset — independently of neuron.hpp, so
// the two implementations can disagree.

struct OracleOut {
    double u_pre, spike, u, k;
};

OracleOut oracle_kvlif(double i, double u_prev, double k_prev, const NeuronParams& p) {
    auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    const double effective = i * (1.0 - p.gamma * sig(k_prev));  // shunt first
    const double u_pre = p.lambda * u_prev + effective;          // integrate
    double k = p.alpha * k_prev + p.beta * u_pre;                // potassium update
    const double spike = u_pre >= p.v_th ? 1.0 : 0.0;            // threshold (>=)
    k += spike;                                                  // spike surge
    const double u = u_pre - spike * (p.v_th + sig(k));          // adaptive reset
    return {u_pre, spike, u, k};
}

void criterion_oracle(const Context&, Report& rep) {
    std::mt19937_64 rng(727u);
    std::uniform_real_distribution<double> cur(-2.0, 3.0), mem(-1.0, 2.0), pot(0.0, 3.0),
        lam(0.2, 0.95), vth(0.5, 1.5), al(0.0, 0.95), be(0.0, 0.6), ga(0.0, 1.0);

    double worst = 0.0;
    for (int c = 0; c < 50; ++c) {
        NeuronParams p;
        p.lambda = lam(rng);
        p.v_th = vth(rng);
        p.alpha = al(rng);
        p.beta = be(rng);
        p.gamma = ga(rng);
        NeuronState prev{mem(rng), pot(rng)};
        const double i = cur(rng);

        const StepOutput got = kvlif_step(i, prev, p);
        const OracleOut want = oracle_kvlif(i, prev.u, prev.k, p);
        const double gap = std::max({std::abs(got.u_pre - want.u_pre),
                                     std::abs(got.spike - want.spike),
                                     std::abs(got.state.u - want.u),
                                     std::abs(got.state.k - want.k)});
        worst = std::max(worst, gap);
        rep.require(gap < 1e-12, "case " + std::to_string(c) + " disagrees with the oracle by " +
                                     fmt(gap));
    }
    rep.note("50 randomized cases, worst component gap " + fmt(worst));

    // Worked example: one step from rest at i = 2.0 under the defaults.
    const StepOutput ex = kvlif_step(2.0, NeuronState{}, NeuronParams{});
    rep.require(std::abs(ex.state.u - 0.120) < 1e-3,
                "worked example u: expected ~0.120, got " + fmt(ex.state.u));
    rep.require(std::abs(ex.state.k - 1.585) < 1e-3,
                "worked example k: expected ~1.585, got " + fmt(ex.state.k));
    rep.note("worked example i=2.0: u " + fmt(ex.state.u) + ", k " + fmt(ex.state.k));
}

// ---------------------------------------------------------------------------
// Criterion 3: saturation contrast.
//
// Both LIF variants must saturate at rate 1.0 for constant drives >= 2*v_th;
// the KvLIF clause asks for >= 3 distinct rates over {2,3,4,5} at the default
// gamma = 0.05. That clause is implemented faithfully and reported as
// observed: a 5% shunt cannot pull a drive of 2 back under threshold (after a
// spike, u_pre(t+1) >= 0.5*(u_pre - v_th - 1) + 0.95*2, whose fixed point 1.8
// stays above v_th = 1), so KvLIF also sits at rate 1.0 across the whole
// grid.

void criterion_saturation(const Context&, Report& rep) {
    NeuronParams p;  // lambda 0.5, v_th 1, alpha 0.8, beta 0.3, gamma 0.05
    const std::vector<double> grid = {2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
    const SweepResult lif =
        intensity_sweep({NeuronKind::lif_soft, NeuronKind::lif_hard}, grid, 8, p);
    for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t i = 0; i < grid.size(); ++i)
            rep.require(lif.rates[m][i] == 1.0,
                        to_string(lif.models[m]) + " rate at intensity " + fmt(grid[i]) +
                            " is " + fmt(lif.rates[m][i]) + ", expected 1.0");
    rep.note("lif-s and lif-h saturate at rate 1.0 for all intensities in [2,5]");

    const SweepResult kv = intensity_sweep({NeuronKind::kvlif}, {2.0, 3.0, 4.0, 5.0}, 8, p);
    std::set<double> distinct(kv.rates[0].begin(), kv.rates[0].end());
    std::string observed;
    for (double r : kv.rates[0]) observed += (observed.empty() ? "" : ", ") + fmt(r);
    rep.require(distinct.size() >= 3,
                "KvLIF rates over {2,3,4,5}: expected >= 3 distinct values, observed {" +
                    observed + "} (" + std::to_string(distinct.size()) + " distinct)");
    rep.note("KvLIF rates over {2,3,4,5}: " + observed);
    if (distinct.size() < 3)
        rep.note("analysis: gamma=0.05 shunts at most 5% of the drive, so at i >= 2 the "
                 "post-spike recursion u <- 0.5*(u - 2) + 0.95*i has its fixed point at or "
                 "above 1.8 > v_th and the neuron fires every step; differentiated rates "
                 "over this grid need a stronger shunt");
}

// ---------------------------------------------------------------------------
// Criterion 4: false-positive contrast.

void criterion_false_positive(const Context&, Report& rep) {
    NeuronParams p;
    const auto lif_s = false_positive_scenario(NeuronKind::lif_soft, 1.8, 0.7, p);
    const auto kv = false_positive_scenario(NeuronKind::kvlif, 1.8, 0.7, p);
    rep.require(has_false_positive(lif_s),
                "lif-s should emit a false positive after event 1.8 + noise 0.7");
    rep.require(!has_false_positive(kv),
                "kvlif should stay silent after event 1.8 + noise 0.7");
    auto render = [](const std::vector<double>& s) {
        std::string out;
        for (double v : s) out += v != 0.0 ? '1' : '0';
        return out;
    };
    rep.note("spike trains (event at t=0): lif-s " + render(lif_s) + ", kvlif " + render(kv));
}

// ---------------------------------------------------------------------------
// Criterion 5: sparse firing and after-hyperpolarization under Poisson drive.
//
// Reproduces the dynamics command's default drive (rate 0.35, amplitude 1.0,
// 40 steps) at seed 7. The reference 17.50% rate belongs to an input
// realization that isn't available, so only the rate-definition consistency
// 7/40 = 0.175 is asserted numerically.

void criterion_dynamics(const Context&, Report& rep) {
    const std::size_t T = 40;
    Matrix drive(T, 1, 0.0);
    auto rng = make_engine(7, seed_stream::dynamics);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t t = 0; t < T; ++t)
        if (u(rng) < 0.35) drive.at(t, 0) = 1.0;

    NeuronParams p;
    const Trace kv = run_sequence(NeuronKind::kvlif, drive, p);
    const Trace ls = run_sequence(NeuronKind::lif_soft, drive, p);
    const Trace lh = run_sequence(NeuronKind::lif_hard, drive, p);

    rep.require(kv.firing_rate() < ls.firing_rate(),
                "kvlif rate " + fmt(kv.firing_rate()) + " not below lif-s " +
                    fmt(ls.firing_rate()));
    rep.require(kv.firing_rate() < lh.firing_rate(),
                "kvlif rate " + fmt(kv.firing_rate()) + " not below lif-h " +
                    fmt(lh.firing_rate()));

    double min_post = 0.0;
    bool spiked = false;
    for (const TraceStep& s : kv.steps)
        if (s.spike[0] != 0.0) {
            spiked = true;
            min_post = std::min(min_post, s.u_post[0]);
        }
    rep.require(spiked, "kvlif never spiked under the drive");
    rep.require(min_post < 0.0,
                "kvlif minimum post-spike potential " + fmt(min_post) + " is not below 0");
    rep.note("rates at seed 7: kvlif " + fmt(kv.firing_rate()) + ", lif-s " +
             fmt(ls.firing_rate()) + ", lif-h " + fmt(lh.firing_rate()) +
             "; kvlif min post-spike u " + fmt(min_post));

    // 7 spikes over a 40-step single-neuron window must read as exactly 17.5%.
    Tensor3 seven(1, 1, 40, 0.0);
    for (std::size_t t = 0; t < 7; ++t) seven.at(0, 0, t * 5) = 1.0;
    rep.require(firing_rate(seven) == 0.175, "7 spikes / 40 steps must equal 0.175 exactly");
}

// ---------------------------------------------------------------------------
// Criterion 6: gradients vs central finite differences on the relaxed graph.

std::vector<double*> all_params(Network& net) {
    std::vector<double*> ps;
    for (auto& blk : net.blocks) {
        for (auto& w : blk.layer.w.v) ps.push_back(&w);
        for (auto& b : blk.layer.b) ps.push_back(&b);
    }
    for (auto& w : net.readout.w.v) ps.push_back(&w);
    for (auto& b : net.readout.b) ps.push_back(&b);
    return ps;
}

std::vector<double> flatten(const Gradients& g) {
    std::vector<double> out;
    for (const auto& lg : g.blocks) {
        out.insert(out.end(), lg.w.v.begin(), lg.w.v.end());
        out.insert(out.end(), lg.b.begin(), lg.b.end());
    }
    out.insert(out.end(), g.readout.w.v.begin(), g.readout.w.v.end());
    out.insert(out.end(), g.readout.b.begin(), g.readout.b.end());
    return out;
}

double weighted_logit_sum(const Network& net, const Tensor3& x, const Tensor3& gw) {
    const Tensor3 logits = forward(net, x, SpikeMode::relaxed, false).logits;
    double acc = 0.0;
    for (std::size_t i = 0; i < logits.v.size(); ++i) acc += logits.v[i] * gw.v[i];
    return acc;
}

void criterion_gradients(const Context&, Report& rep) {
    std::mt19937_64 rng(929u);
    std::uniform_int_distribution<std::size_t> in_d(2, 6), wid(2, 8), cls(2, 4), t_d(2, 6),
        b_d(1, 3), blocks_d(1, 3);
    std::uniform_real_distribution<double> xv(-1.2, 1.2), gv(-1.0, 1.0), lam(0.2, 0.9),
        vth(0.6, 1.4), al(0.0, 0.9), be(0.0, 0.5), ga(0.0, 1.0), sgw(0.6, 1.8);
    std::uniform_int_distribution<std::uint64_t> seed;
    const NeuronKind kinds[] = {NeuronKind::lif_soft, NeuronKind::lif_hard, NeuronKind::kvlif};

    double worst = 0.0;
    for (int c = 0; c < 100; ++c) {
        NeuronParams p;
        if (c % 2) {  // half the configs randomize every neuron parameter
            p.lambda = lam(rng);
            p.v_th = vth(rng);
            p.alpha = al(rng);
            p.beta = be(rng);
            p.gamma = ga(rng);
            p.sg_width = sgw(rng);
        }
        std::vector<std::size_t> hidden(blocks_d(rng));
        for (auto& h : hidden) h = wid(rng);
        Network net = make_mlp(in_d(rng), hidden, cls(rng), kinds[c % 3], p, t_d(rng),
                               EncodingKind::direct);
        init_weights(net, seed(rng));

        Tensor3 x(b_d(rng), net.in_dim(), net.T);
        for (auto& v : x.v) v = xv(rng);
        Tensor3 gw(x.batch, net.classes(), net.T);
        for (auto& v : gw.v) v = gv(rng);

        const ForwardResult fr = forward(net, x, SpikeMode::relaxed, true);
        const std::vector<double> analytic = flatten(backward(net, fr.tape, gw));
        std::vector<double*> ps = all_params(net);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const double orig = *ps[i];
            const double h = 1e-5 * std::max(1.0, std::abs(orig));
            *ps[i] = orig + h;
            const double up = weighted_logit_sum(net, x, gw);
            *ps[i] = orig - h;
            const double dn = weighted_logit_sum(net, x, gw);
            *ps[i] = orig;
            const double fd = (up - dn) / (2.0 * h);
            const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-4});
            worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
        }
    }
    rep.require(worst < 1e-3, "max relative error " + fmt(worst) + " >= 1e-3");
    rep.note("100 random configs (all kinds, <=3 blocks, T<=6), max relative error " +
             fmt(worst));
}

// ---------------------------------------------------------------------------
// Criterion 7: toy training at seed 7.
//
// Hard clause: every neuron kind reaches >= 95% train accuracy within 50
// epochs on the two-intensity task (0.2 vs 0.6, 512 train samples, 32 hidden,
// T=8). Soft clause (reported, not gated): KvLIF's test accuracy under
// Gaussian input noise std 0.2 vs LIF-S's on the same seed and realization.
// The ordering it echoes is a full-scale result; at this scale both models
// sit within a sample or two of ceiling, so the comparison is reported
// verbatim either way.

void criterion_training(const Context&, Report& rep) {
    ExperimentConfig cfg;  // defaults are exactly the toy protocol
    cfg.seed = 7;
    cfg.validate();

    const Dataset train_ds = build_dataset(cfg, false);
    const Dataset test_ds = build_dataset(cfg, true);

    Network kv_net, ls_net;
    for (NeuronKind kind : {NeuronKind::lif_soft, NeuronKind::lif_hard, NeuronKind::kvlif}) {
        Network net = build_network(cfg, kind, train_ds.x.features, train_ds.classes);
        init_weights(net, cfg.seed);
        const TrainHistory hist = train(net, train_ds, to_train_options(cfg));
        std::size_t first_hit = hist.epochs.size();
        for (std::size_t e = 0; e < hist.epochs.size(); ++e)
            if (hist.epochs[e].train_acc >= 0.95) {
                first_hit = e + 1;
                break;
            }
        rep.require(hist.best_accuracy() >= 0.95,
                    to_string(kind) + " best train accuracy " + fmt(hist.best_accuracy()) +
                        " < 0.95 within 50 epochs");
        rep.note(to_string(kind) + ": best train acc " + fmt(hist.best_accuracy()) +
                 (first_hit <= hist.epochs.size()
                      ? " (>=95% at epoch " + std::to_string(first_hit) + ")"
                      : ""));
        if (kind == NeuronKind::kvlif) kv_net = net;
        if (kind == NeuronKind::lif_soft) ls_net = net;
    }

    // Soft clause, via the robustness command's own noise derivation for a
    // single-level grid [0.2]: both models see the identical noisy set.
    const Dataset noisy =
        apply_noise_level(cfg, test_ds, 0.2, derive_seed(cfg.seed, seed_stream::noise, 1));
    const double kv_acc = evaluate(kv_net, noisy);
    const double ls_acc = evaluate(ls_net, noisy);
    rep.note(std::string("soft clause (reported, not gated): gaussian std 0.2 test acc — ") +
             "kvlif " + fmt(kv_acc) + (kv_acc >= ls_acc ? " >= " : " < ") + "lif-s " +
             fmt(ls_acc) + (kv_acc >= ls_acc ? "; ordering holds" : "; ordering does not hold") +
             " on this realization");
    rep.note("clean test acc: kvlif " + fmt(evaluate(kv_net, test_ds)) + ", lif-s " +
             fmt(evaluate(ls_net, test_ds)));
}

// ---------------------------------------------------------------------------
// Criterion 8: energy accounting.

void criterion_energy(const Context&, Report& rep) {
    // Hand-countable two-layer net: 3 inputs, 3 hidden, 2 classes, T=2, all
    // weights 0.6 and biases 0, binary input with events at (f0,t0), (f1,t0),
    // (f2,t1).
    //   layer 1 ACs: 3 input events x 3 hidden          = 9
    //   hidden spikes: each unit sees 1.2 at t0 -> fires (3 spikes), then
    //     0.5*0.2 + 0.6 = 0.7 at t1 -> silent
    //   readout ACs: 3 hidden spikes x 2 classes        = 6
    NeuronParams p;
    Network net = make_mlp(3, {3}, 2, NeuronKind::lif_soft, p, 2, EncodingKind::poisson);
    for (auto& w : net.blocks[0].layer.w.v) w = 0.6;
    for (auto& w : net.readout.w.v) w = 0.6;

    Tensor3 x(1, 3, 2, 0.0);
    x.at(0, 0, 0) = 1.0;
    x.at(0, 1, 0) = 1.0;
    x.at(0, 2, 1) = 1.0;

    const EnergyReport lif_r = energy_account(net, forward(net, x, SpikeMode::binary, true).tape);
    rep.require(lif_r.layers[0].n_ac == 9.0,
                "layer-1 ACs: expected 9, got " + fmt(lif_r.layers[0].n_ac));
    rep.require(lif_r.layers[1].n_ac == 6.0,
                "readout ACs: expected 6, got " + fmt(lif_r.layers[1].n_ac));
    rep.require(lif_r.n_ac == 15.0 && lif_r.n_mac == 0.0,
                "LIF totals: expected 15 AC / 0 MAC, got " + fmt(lif_r.n_ac) + " / " +
                    fmt(lif_r.n_mac));
    rep.require(lif_r.total_pj() == 15.0 * 0.9, "LIF energy must be exactly 15 * 0.9 pJ");

    // Same architecture as KvLIF: identical spike pattern (the shunted drive
    // 1.2 * (1 - 0.05*sigmoid(0.5*0.3*...)) stays above threshold at t0), so
    // the AC side is unchanged and the gate surcharge adds
    // 4 MAC-equivalents x 1 sample x 2 steps x 3 neurons = 24 MACs.
    Network kvn = make_mlp(3, {3}, 2, NeuronKind::kvlif, p, 2, EncodingKind::poisson);
    for (auto& w : kvn.blocks[0].layer.w.v) w = 0.6;
    for (auto& w : kvn.readout.w.v) w = 0.6;
    const EnergyReport kv_r = energy_account(kvn, forward(kvn, x, SpikeMode::binary, true).tape);
    rep.require(kv_r.n_ac == 15.0, "KvLIF ACs: expected 15, got " + fmt(kv_r.n_ac));
    rep.require(kv_r.n_mac == 24.0,
                "KvLIF surcharge MACs: expected 24, got " + fmt(kv_r.n_mac));
    rep.require(kv_r.total_pj() == 15.0 * 0.9 + 24.0 * 4.6,
                "KvLIF energy must be exactly 15*0.9 + 24*4.6 pJ");

    // Direct-encoding first layer is a dense MAC grid: B*T*in*out = 1*2*3*3.
    Network dnet = make_mlp(3, {3}, 2, NeuronKind::lif_soft, p, 2, EncodingKind::direct);
    const EnergyReport d_r = energy_account(dnet, forward(dnet, x, SpikeMode::binary, true).tape);
    rep.require(d_r.layers[0].n_mac == 18.0,
                "direct first layer: expected 18 MACs, got " + fmt(d_r.layers[0].n_mac));

    // Arithmetic case: 100M ACs + 10M MACs -> 136 uJ, same-expression exact.
    const EnergyReport big = energy_from_counts(1e8, 1e7);
    rep.require(big.total_uj() == (0.9 * 1e8 + 4.6 * 1e7) * 1e-6,
                "100M AC + 10M MAC total is not bitwise (0.9e8 + 4.6e7) pJ");
    rep.require(std::abs(big.total_uj() - 136.0) < 1e-9,
                "100M AC + 10M MAC: expected 136 uJ, got " + fmt(big.total_uj()));
    rep.note("hand counts exact (15 AC LIF, +24 MAC KvLIF, 18 dense MACs direct); "
             "100M AC + 10M MAC = " + fmt(big.total_uj()) + " uJ");
}

// ---------------------------------------------------------------------------
// Criterion 9: CLI determinism. Every command runs twice with the same seed;
// CSVs, checkpoints and run stdout must be byte-identical, manifests
// identical outside the timing block.

struct CliRun {
    int code = -1;
    std::string run_dir;
};

CliRun run_cli(const Context& ctx, const std::string& args, const std::string& tag) {
    const fs::path out = ctx.work / (tag + ".stdout");
    const fs::path err = ctx.work / (tag + ".stderr");
    const std::string cmd = "KVLIF_LOG=quiet '" + ctx.cli + "' " + args + " > '" + out.string() +
                            "' 2> '" + err.string() + "'";
    const int rc = std::system(cmd.c_str());
    CliRun r;
    r.code = rc == -1 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -1);
    std::string text = read_text_file(out.string());
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    r.run_dir = text;
    return r;
}

void compare_runs(Report& rep, const std::string& label, const std::string& dir_a,
                  const std::string& dir_b) {
    auto names = [](const std::string& dir) {
        std::vector<std::string> out;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file()) out.push_back(e.path().filename().string());
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto a = names(dir_a), b = names(dir_b);
    rep.require(a == b, label + ": the two runs produced different artifact sets");
    if (a != b) return;
    for (const std::string& name : a) {
        const std::string fa = read_text_file(dir_a + "/" + name);
        const std::string fb = read_text_file(dir_b + "/" + name);
        if (name == "manifest.json") {
            const jsonio::json va = manifest_numeric_view(parse_manifest(fa));
            const jsonio::json vb = manifest_numeric_view(parse_manifest(fb));
            rep.require(va == vb, label + ": manifests differ outside the timing block");
        } else {
            rep.require(fa == fb, label + ": " + name + " differs between reruns");
        }
    }
}

void criterion_determinism(const Context& ctx, Report& rep) {
    const fs::path det = ctx.work / "det";
    fs::create_directories(det);
    auto out_flag = [&](const std::string& sub) {
        fs::create_directories(det / sub);
        return " --out '" + (det / sub).string() + "'";
    };

    auto pair_run = [&](const std::string& label, const std::string& args) {
        const CliRun a = run_cli(ctx, args, "det_" + label + "_a");
        const CliRun b = run_cli(ctx, args, "det_" + label + "_b");
        rep.require(a.code == 0 && b.code == 0,
                    label + ": expected exit 0, got " + std::to_string(a.code) + " and " +
                        std::to_string(b.code));
        if (a.code == 0 && b.code == 0) compare_runs(rep, label, a.run_dir, b.run_dir);
        return a;
    };

    pair_run("dynamics", "dynamics --seed 7" + out_flag("dynamics"));
    pair_run("sweep", "sweep --seed 7" + out_flag("sweep"));

    // A small training config keeps the whole criterion inside its budget;
    // the follow-on commands reuse the first run's checkpoint.
    const fs::path train_cfg = det / "train.json";
    write_text_file(train_cfg.string(),
                    "{\"schema_version\": 1,\n"
                    " \"neuron\": [\"kvlif\", \"lif-s\"],\n"
                    " \"dataset\": {\"train\": 96, \"test\": 64},\n"
                    " \"train\": {\"epochs\": 5}}\n");
    const CliRun train_a = pair_run(
        "train", "train --config '" + train_cfg.string() + "' --seed 7" + out_flag("train"));
    if (!rep.ok) return;
    const std::string ckpt = train_a.run_dir + "/model_kvlif.ckpt.json";

    const fs::path rob_cfg = det / "rob.json";
    write_text_file(rob_cfg.string(),
                    "{\"schema_version\": 1,\n"
                    " \"dataset\": {\"train\": 96, \"test\": 64},\n"
                    " \"noise\": {\"kind\": \"gaussian_static\", \"levels\": [0.1, 0.2]},\n"
                    " \"checkpoint\": \"" + ckpt + "\"}\n");
    pair_run("robustness",
             "robustness --config '" + rob_cfg.string() + "' --seed 7" + out_flag("rob"));

    const fs::path en_cfg = det / "energy.json";
    write_text_file(en_cfg.string(),
                    "{\"schema_version\": 1,\n"
                    " \"dataset\": {\"train\": 96, \"test\": 64},\n"
                    " \"checkpoint\": \"" + ckpt + "\"}\n");
    pair_run("energy", "energy --config '" + en_cfg.string() + "' --seed 7" + out_flag("energy"));

    const fs::path sw_cfg = det / "sw.json";
    write_text_file(sw_cfg.string(),
                    "{\"schema_version\": 1,\n"
                    " \"dataset\": {\"train\": 96, \"test\": 64},\n"
                    " \"shortwindow\": {\"grid\": [2, 4, 8]},\n"
                    " \"checkpoint\": \"" + ckpt + "\"}\n");
    pair_run("shortwindow",
             "shortwindow --config '" + sw_cfg.string() + "' --seed 7" + out_flag("sw"));

    if (rep.ok)
        rep.note("all six commands byte-identical across reruns "
                 "(manifests compared outside the timing block)");
}

// ---------------------------------------------------------------------------
// Criterion 10: structural grids. Full-scale accuracy tables are out of desk
// scope; what is checked is that the robustness and shortwindow commands emit
// complete grids on toy tasks and that their rows are internally consistent
// (clean row = checkpoint's test accuracy, full-window point = standard
// evaluation, manifest-embedded config rebuilds the measurement).

void criterion_structural(const Context& ctx, Report& rep) {
    const fs::path root = ctx.work / "structural";
    fs::create_directories(root);

    // One tiny trained model per input family.
    ExperimentConfig tr;
    tr.seed = 7;
    tr.dataset.train = 96;
    tr.dataset.test = 64;
    tr.train.epochs = 5;
    tr.neurons = {NeuronKind::kvlif};
    tr.out = (root / "train").string();
    const CommandResult trained = cmd_train(tr);
    const std::string ckpt = trained.run_dir + "/model_kvlif.ckpt.json";

    ExperimentConfig ev;
    ev.seed = 7;
    ev.dataset.kind = "moving_bar";
    ev.dataset.encoding = EncodingKind::event;
    ev.dataset.h = 6;
    ev.dataset.w = 8;
    ev.dataset.train = 64;
    ev.dataset.test = 48;
    ev.train.epochs = 3;
    ev.neurons = {NeuronKind::kvlif};
    ev.out = (root / "train_event").string();
    const CommandResult etrained = cmd_train(ev);

    auto csv_rows = [](const std::string& path) {
        const std::string text = read_text_file(path);
        std::vector<std::string> rows;
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                if (!cur.empty()) rows.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        return rows;  // header included
    };

    // Gaussian robustness over the full default grid.
    ExperimentConfig rb = tr;
    rb.checkpoint = ckpt;
    rb.out = (root / "rob_gauss").string();
    const CommandResult rob = cmd_robustness(rb);
    const auto rows = csv_rows(rob.run_dir + "/robustness.csv");
    rep.require(rows.size() == 1 + 1 + 5,
                "gaussian grid: expected header + clean + 5 levels, got " +
                    std::to_string(rows.size()) + " rows");
    const auto& met = rob.manifest.j["metrics"];
    rep.require(met["levels"].size() == 5 && met["accuracies"].size() == 5,
                "gaussian manifest grid incomplete");
    if (rows.size() > 1)
        rep.require(rows[1] == "gaussian_static,0," + fmt(met["clean_accuracy"].get<double>()),
                    "clean CSV row does not match the manifest's clean accuracy");
    rep.note("gaussian robustness: clean " + fmt(met["clean_accuracy"].get<double>()) +
             ", levels 0.04..0.20 emitted");

    // The manifest-embedded config must rebuild the exact clean measurement.
    const ExperimentConfig embedded = parse_config(rob.manifest.j["config"], {});
    const Checkpoint ck = load_checkpoint(ckpt);
    rep.require(evaluate(ck.net, build_dataset(embedded, true)) ==
                    met["clean_accuracy"].get<double>(),
                "embedded config does not reproduce the clean accuracy");

    // Temporal-drop grid on the event model.
    ExperimentConfig dr = ev;
    dr.checkpoint = etrained.run_dir + "/model_kvlif.ckpt.json";
    dr.noise.kind = NoiseKind::temporal_drop;
    dr.noise.levels = {0.125, 0.25, 0.375, 0.5};  // floor(rate*8) = 1..4 dropped slices
    dr.out = (root / "rob_drop").string();
    const CommandResult drop = cmd_robustness(dr);
    const auto drows = csv_rows(drop.run_dir + "/robustness.csv");
    rep.require(drows.size() == 1 + 1 + 4,
                "drop grid: expected header + clean + 4 levels, got " +
                    std::to_string(drows.size()) + " rows");
    rep.note("temporal drop: clean " +
             fmt(drop.manifest.j["metrics"]["clean_accuracy"].get<double>()) +
             ", 4 drop levels emitted on the event task");

    // Short-window curve: default grid is 1..T_train and the last point must
    // equal the standard full-window evaluation bit for bit.
    ExperimentConfig sw = tr;
    sw.checkpoint = ckpt;
    sw.out = (root / "sw").string();
    const CommandResult swr = cmd_shortwindow(sw);
    const auto& sm = swr.manifest.j["metrics"];
    rep.require(sm["grid"].size() == 8, "shortwindow: expected an 8-point default grid");
    rep.require(sm["accuracies"].size() == sm["grid"].size(),
                "shortwindow: one accuracy per grid point");
    rep.require(sm["accuracies"].back().get<double>() ==
                    sm["full_window_accuracy"].get<double>(),
                "shortwindow: T=T_train point must equal the standard evaluation exactly");
    rep.note("shortwindow: 8-point curve, T=8 point equals full-window accuracy " +
             fmt(sm["full_window_accuracy"].get<double>()));
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    std::string title;
    double time_limit_s;  // 0 = no stated bound
    std::function<void(const Context&, Report&)> body;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::fprintf(stderr, "usage: acceptance <path-to-kvlif-cli> <scratch-dir>\n");
        return 64;
    }
    setenv("KVLIF_LOG", "quiet", 1);  // keep in-process command calls silent

    Context ctx;
    ctx.cli = fs::absolute(argv[1]).string();
    ctx.work = fs::absolute(argv[2]);
    std::error_code ec;
    fs::remove_all(ctx.work, ec);
    fs::create_directories(ctx.work);

    const std::vector<Criterion> criteria = {
        {1, "limitation theorems (monotone I_min, closed form vs recursion)", 1.0,
         criterion_limitation},
        {2, "single-step KvLIF oracle (50 cases + worked example)", 1.0, criterion_oracle},
        {3, "saturation contrast (LIF rate 1.0 at >=2*v_th; KvLIF differentiated)", 1.0,
         criterion_saturation},
        {4, "false-positive contrast (event 1.8 + noise 0.7)", 1.0, criterion_false_positive},
        {5, "Poisson-drive dynamics (sparser KvLIF, AHP below rest)", 1.0, criterion_dynamics},
        {6, "gradient check vs central finite differences", 30.0, criterion_gradients},
        {7, "toy training >=95% for every kind (+ reported noise ordering)", 300.0,
         criterion_training},
        {8, "energy accounting (hand counts + 136 uJ arithmetic)", 1.0, criterion_energy},
        {9, "CLI determinism (every command twice, byte-identical)", 60.0,
         criterion_determinism},
        {10, "structural robustness/shortwindow grids", 0.0, criterion_structural},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        Report rep;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(ctx, rep);
        } catch (const std::exception& e) {
            rep.ok = false;
            rep.notes.push_back(std::string("FAILED: unhandled exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0.0 && secs > c.time_limit_s) {
            rep.ok = false;
            rep.notes.push_back("FAILED: runtime " + fmt(secs) + " s exceeds the " +
                                fmt(c.time_limit_s) + " s bound");
        }
        std::printf("[%s] criterion %2d: %s (%.2f s)\n", rep.ok ? "PASS" : "FAIL", c.id,
                    c.title.c_str(), secs);
        for (const std::string& n : rep.notes) std::printf("            - %s\n", n.c_str());
        std::fflush(stdout);
        failures += rep.ok ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
    return failures;
}
