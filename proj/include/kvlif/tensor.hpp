#pragma once

#include <cstddef>
#include <vector>

#include "kvlif/errors.hpp"

namespace kvlif {

// Dense row-major matrix. Used for weights (rows = out, cols = in) and for
// static frames (rows = batch, cols = features).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

    std::size_t size() const { return v.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool operator==(const Matrix& o) const { return rows == o.rows && cols == o.cols && v == o.v; }
};

// Rank-3 tensor indexed (batch, neuron/feature, time), row-major in that order.
// Spike trains, encoded inputs and per-step logits all use this layout.
struct Tensor3 {
    std::size_t batch = 0;
    std::size_t features = 0;
    std::size_t time = 0;
    std::vector<double> v;

    Tensor3() = default;
    Tensor3(std::size_t b, std::size_t f, std::size_t t, double fill = 0.0)
        : batch(b), features(f), time(t), v(b * f * t, fill) {}

    double& at(std::size_t b, std::size_t f, std::size_t t) {
        return v[(b * features + f) * time + t];
    }
    double at(std::size_t b, std::size_t f, std::size_t t) const {
        return v[(b * features + f) * time + t];
    }

    std::size_t size() const { return v.size(); }
    bool same_shape(const Tensor3& o) const {
        return batch == o.batch && features == o.features && time == o.time;
    }
    bool operator==(const Tensor3& o) const {
        return same_shape(o) && v == o.v;
    }

    // First `t` time steps of every entry (shortened-window evaluation).
    Tensor3 truncated(std::size_t t) const {
        if (t == 0 || t > time) throw ConfigError("truncated: bad time length");
        Tensor3 out(batch, features, t);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t f = 0; f < features; ++f)
                for (std::size_t k = 0; k < t; ++k) out.at(b, f, k) = at(b, f, k);
        return out;
    }

    // Single-sample slice, keeping (feature, time) layout.
    Tensor3 sample(std::size_t b) const {
        Tensor3 out(1, features, time);
        for (std::size_t f = 0; f < features; ++f)
            for (std::size_t t = 0; t < time; ++t) out.at(0, f, t) = at(b, f, t);
        return out;
    }
};

} // namespace kvlif
