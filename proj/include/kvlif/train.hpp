#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "kvlif/datasets.hpp"
#include "kvlif/errors.hpp"
#include "kvlif/gradients.hpp"
#include "kvlif/loss.hpp"
#include "kvlif/network.hpp"
#include "kvlif/optim.hpp"
#include "kvlif/rng.hpp"

// Desk-scale training loop. Everything is a deterministic function of
// (seed, config): the epoch-e shuffle comes from its own derived stream, so a
// run of N epochs equals a run of k epochs plus a resumed run of N-k epochs
// when the optimizer state travels along (see checkpoint.hpp).

namespace kvlif {

struct TrainOptions {
    std::size_t epochs = 50;
    std::size_t batch = 32;
    std::uint64_t seed = 1000;
    OptimizerOptions optimizer;
    LossKind loss = LossKind::ce_mean;
    double tet_lambda = 0.05;

    void validate() const {
        if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
        if (batch < 1) throw ConfigError("train.batch must be >= 1");
        optimizer.validate();
        if (!(tet_lambda >= 0.0 && tet_lambda <= 1.0))
            throw ConfigError("train.tet_lambda must lie in [0,1]");
    }
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;  // mean minibatch loss over the epoch
    double train_acc = 0.0;   // full-train-set accuracy after the epoch
};

struct TrainHistory {
    std::vector<EpochStats> epochs;

    double best_accuracy() const {
        double best = 0.0;
        for (const auto& e : epochs) best = std::max(best, e.train_acc);
        return best;
    }
};

namespace detail {

inline Tensor3 gather(const Tensor3& x, const std::vector<std::size_t>& idx) {
    Tensor3 out(idx.size(), x.features, x.time);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t f = 0; f < x.features; ++f)
            for (std::size_t t = 0; t < x.time; ++t) out.at(i, f, t) = x.at(idx[i], f, t);
    return out;
}

inline std::vector<int> gather_labels(const std::vector<int>& labels,
                                      const std::vector<std::size_t>& idx) {
    std::vector<int> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
    return out;
}

} // namespace detail

// Argmax of time-averaged logits; ties resolve to the lowest class index.
inline std::vector<int> predict(const Network& net, const Tensor3& x,
                                std::size_t eval_batch = 64) {
    std::vector<int> preds;
    preds.reserve(x.batch);
    for (std::size_t start = 0; start < x.batch; start += eval_batch) {
        const std::size_t stop = std::min(x.batch, start + eval_batch);
        std::vector<std::size_t> idx(stop - start);
        std::iota(idx.begin(), idx.end(), start);
        Tensor3 chunk = detail::gather(x, idx);
        Tensor3 logits = forward(net, chunk, SpikeMode::binary, false).logits;
        for (std::size_t b = 0; b < logits.batch; ++b) {
            int best = 0;
            double best_v = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < logits.features; ++c) {
                double avg = 0.0;
                for (std::size_t t = 0; t < logits.time; ++t) avg += logits.at(b, c, t);
                if (avg > best_v) {
                    best_v = avg;
                    best = int(c);
                }
            }
            preds.push_back(best);
        }
    }
    return preds;
}

inline double accuracy(const Network& net, const Tensor3& x, const std::vector<int>& labels) {
    const std::vector<int> preds = predict(net, x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += (preds[i] == labels[i]);
    return double(hits) / double(labels.size());
}

inline double evaluate(const Network& net, const Dataset& ds) {
    return accuracy(net, ds.x, ds.labels);
}

// Runs epochs [first_epoch, first_epoch + n). The optimizer state is taken by
// reference so a checkpointed run can resume mid-stream.
inline void train_range(Network& net, const Dataset& ds, const TrainOptions& opts,
                        OptimizerState& opt_state, std::size_t first_epoch, std::size_t n_epochs,
                        TrainHistory& history) {
    opts.validate();
    ds.validate();
    net.validate();
    if (ds.x.features != net.in_dim())
        throw ConfigError("train: dataset features do not match network input width");
    if (!opt_state.initialized()) opt_state = make_optimizer_state(net);

    const std::size_t n = ds.size();
    for (std::size_t e = first_epoch; e < first_epoch + n_epochs; ++e) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t(0));
        auto rng = make_engine(opts.seed, seed_stream::shuffle, e);
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        std::size_t seen = 0, batch_index = 0;
        for (std::size_t start = 0; start < n; start += opts.batch, ++batch_index) {
            const std::size_t stop = std::min(n, start + opts.batch);
            std::vector<std::size_t> idx(order.begin() + std::ptrdiff_t(start),
                                         order.begin() + std::ptrdiff_t(stop));
            Tensor3 xb = detail::gather(ds.x, idx);
            std::vector<int> yb = detail::gather_labels(ds.labels, idx);

            ForwardResult fr = forward(net, xb, SpikeMode::binary, true);
            LossResult lr = opts.loss == LossKind::ce_mean
                                ? loss_ce_mean(fr.logits, yb)
                                : loss_tet(fr.logits, yb, opts.tet_lambda);
            if (!std::isfinite(lr.value)) throw DivergenceError(e, batch_index);
            Gradients g = backward(net, fr.tape, lr.grad);
            apply_update(net, g, opt_state, opts.optimizer);

            loss_sum += lr.value * double(stop - start);
            seen += stop - start;
        }

        EpochStats st;
        st.epoch = e;
        st.train_loss = loss_sum / double(seen);
        st.train_acc = evaluate(net, ds);
        history.epochs.push_back(st);
    }
}

inline TrainHistory train(Network& net, const Dataset& ds, const TrainOptions& opts) {
    TrainHistory history;
    OptimizerState st;
    train_range(net, ds, opts, st, 0, opts.epochs, history);
    return history;
}

} // namespace kvlif
