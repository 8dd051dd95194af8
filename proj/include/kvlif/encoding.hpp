#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "kvlif/errors.hpp"
#include "kvlif/rng.hpp"
#include "kvlif/tensor.hpp"

// Input encoders. All are pure functions of (input, T, seed); random draws use
// per-sample split streams so sample i's train never depends on batch order.

namespace kvlif {

enum class EncodingKind { direct, poisson, event };

inline std::string to_string(EncodingKind k) {
    switch (k) {
        case EncodingKind::direct: return "direct";
        case EncodingKind::poisson: return "poisson";
        case EncodingKind::event: return "event";
    }
    return "?";
}

inline EncodingKind encoding_kind_from_string(const std::string& s) {
    if (s == "direct") return EncodingKind::direct;
    if (s == "poisson") return EncodingKind::poisson;
    if (s == "event") return EncodingKind::event;
    throw ConfigError("unknown encoding '" + s + "' (expected direct | poisson | event)");
}

struct EncodedInput {
    Tensor3 values;  // batch x features x T
    EncodingKind kind = EncodingKind::direct;
};

// Repeat each static frame at every time step.
inline EncodedInput encode_direct(const Matrix& frames, std::size_t T) {
    if (frames.rows == 0 || frames.cols == 0) throw ConfigError("encode_direct: empty frame matrix");
    if (T < 1) throw ConfigError("encode_direct: T must be >= 1");
    for (double v : frames.v)
        if (!std::isfinite(v)) throw ConfigError("encode_direct: frames must be finite");
    EncodedInput out;
    out.kind = EncodingKind::direct;
    out.values = Tensor3(frames.rows, frames.cols, T);
    for (std::size_t b = 0; b < frames.rows; ++b)
        for (std::size_t f = 0; f < frames.cols; ++f)
            for (std::size_t t = 0; t < T; ++t) out.values.at(b, f, t) = frames.at(b, f);
    return out;
}

// Bernoulli spike train per entry; intensities are clamped into [0,1] first.
inline EncodedInput encode_poisson(const Matrix& intensities, std::size_t T, std::uint64_t seed) {
    if (intensities.rows == 0 || intensities.cols == 0)
        throw ConfigError("encode_poisson: empty intensity matrix");
    if (T < 1) throw ConfigError("encode_poisson: T must be >= 1");
    EncodedInput out;
    out.kind = EncodingKind::poisson;
    out.values = Tensor3(intensities.rows, intensities.cols, T);
    for (std::size_t b = 0; b < intensities.rows; ++b) {
        auto rng = make_engine(seed, seed_stream::encode, b);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t f = 0; f < intensities.cols; ++f) {
            double p = intensities.at(b, f);
            if (!std::isfinite(p)) throw ConfigError("encode_poisson: non-finite intensity");
            p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
            for (std::size_t t = 0; t < T; ++t)
                out.values.at(b, f, t) = (u(rng) < p) ? 1.0 : 0.0;
        }
    }
    return out;
}

// Wrap an already-binary event tensor (e.g. synthetic DVS-style frames).
inline EncodedInput wrap_event(const Tensor3& events) {
    for (double v : events.v)
        if (v != 0.0 && v != 1.0)
            throw ConfigError("wrap_event: event tensor entries must be binary");
    EncodedInput out;
    out.kind = EncodingKind::event;
    out.values = events;
    return out;
}

} // namespace kvlif
