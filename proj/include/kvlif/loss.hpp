#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kvlif/errors.hpp"
#include "kvlif/tensor.hpp"

namespace kvlif {

enum class LossKind { ce_mean, tet };

inline std::string to_string(LossKind k) {
    return k == LossKind::ce_mean ? "ce_mean" : "tet";
}

inline LossKind loss_kind_from_string(const std::string& s) {
    if (s == "ce_mean") return LossKind::ce_mean;
    if (s == "tet") return LossKind::tet;
    throw ConfigError("unknown loss '" + s + "' (expected ce_mean | tet)");
}

struct LossResult {
    double value = 0.0;
    Tensor3 grad;  // dL/dlogits, same shape as logits
};

namespace detail {

inline void check_labels(const Tensor3& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.batch)
        throw ConfigError("loss: got " + std::to_string(labels.size()) + " labels for batch " +
                          std::to_string(logits.batch));
    for (int y : labels)
        if (y < 0 || std::size_t(y) >= logits.features)
            throw ConfigError("loss: label " + std::to_string(y) + " out of range [0," +
                              std::to_string(logits.features) + ")");
}

// Stable softmax of a length-C row.
inline void softmax_row(const std::vector<double>& z, std::vector<double>& p) {
    double zmax = z[0];
    for (double v : z) zmax = v > zmax ? v : zmax;
    double sum = 0.0;
    p.resize(z.size());
    for (std::size_t c = 0; c < z.size(); ++c) {
        p[c] = std::exp(z[c] - zmax);
        sum += p[c];
    }
    for (double& v : p) v /= sum;
}

} // namespace detail

// Softmax cross-entropy on the time-averaged logits, batch-meaned. Each step
// contributes 1/T to the average, so the per-step gradient is uniform.
inline LossResult loss_ce_mean(const Tensor3& logits, const std::vector<int>& labels) {
    detail::check_labels(logits, labels);
    const std::size_t B = logits.batch, C = logits.features, T = logits.time;
    LossResult res;
    res.grad = Tensor3(B, C, T);
    std::vector<double> avg(C), p;
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t c = 0; c < C; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < T; ++t) acc += logits.at(b, c, t);
            avg[c] = acc / double(T);
        }
        detail::softmax_row(avg, p);
        res.value += -std::log(p[std::size_t(labels[b])] > 0.0 ? p[std::size_t(labels[b])]
                                                               : 1e-300);
        for (std::size_t c = 0; c < C; ++c) {
            const double d = (p[c] - (std::size_t(labels[b]) == c ? 1.0 : 0.0)) /
                             (double(B) * double(T));
            for (std::size_t t = 0; t < T; ++t) res.grad.at(b, c, t) = d;
        }
    }
    res.value /= double(B);
    return res;
}

// TET-style loss: (1-lamb) * mean-over-t per-step CE + lamb * MSE(logits, v_th).
// The MSE term pulls every logit toward the threshold at every step.
inline LossResult loss_tet(const Tensor3& logits, const std::vector<int>& labels, double lamb,
                           double v_th = 1.0) {
    if (!(lamb >= 0.0 && lamb <= 1.0))
        throw ConfigError("loss_tet: lamb must lie in [0,1], got " + std::to_string(lamb));
    detail::check_labels(logits, labels);
    const std::size_t B = logits.batch, C = logits.features, T = logits.time;
    LossResult res;
    res.grad = Tensor3(B, C, T);

    double ce = 0.0, mse = 0.0;
    std::vector<double> z(C), p;
    for (std::size_t b = 0; b < B; ++b) {
        const std::size_t y = std::size_t(labels[b]);
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t c = 0; c < C; ++c) z[c] = logits.at(b, c, t);
            detail::softmax_row(z, p);
            ce += -std::log(p[y] > 0.0 ? p[y] : 1e-300);
            for (std::size_t c = 0; c < C; ++c) {
                const double diff = logits.at(b, c, t) - v_th;
                mse += diff * diff;
                res.grad.at(b, c, t) =
                    (1.0 - lamb) * (p[c] - (c == y ? 1.0 : 0.0)) / (double(B) * double(T)) +
                    lamb * 2.0 * diff / (double(B) * double(C) * double(T));
            }
        }
    }
    ce /= double(B) * double(T);
    mse /= double(B) * double(C) * double(T);
    res.value = (1.0 - lamb) * ce + lamb * mse;
    return res;
}

} // namespace kvlif
