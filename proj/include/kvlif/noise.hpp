#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "kvlif/errors.hpp"
#include "kvlif/rng.hpp"
#include "kvlif/tensor.hpp"

// The three noise protocols. Deterministic in (input, spec, seed); shapes are
// never changed; untouched entries stay bitwise identical. "Exactly floor(x)"
// counts are deliberate: they make corruption assertions exact.
//
// Static frames are NOT re-clamped after Gaussian injection; the Poisson
// encoder clamps at encode time instead.

namespace kvlif {

enum class NoiseKind { gaussian_static, pixel_event, temporal_drop };

inline std::string to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::gaussian_static: return "gaussian_static";
        case NoiseKind::pixel_event: return "pixel_event";
        case NoiseKind::temporal_drop: return "temporal_drop";
    }
    return "?";
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "gaussian_static") return NoiseKind::gaussian_static;
    if (s == "pixel_event") return NoiseKind::pixel_event;
    if (s == "temporal_drop") return NoiseKind::temporal_drop;
    throw ConfigError("unknown noise kind '" + s +
                      "' (expected gaussian_static | pixel_event | temporal_drop)");
}

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian_static;
    double level = 0.0;      // std for gaussian_static, pixel fraction, or drop rate
    std::uint64_t seed = 0;
    double pixel_std = 0.1;  // std of the Gaussian applied to selected event pixels

    void validate() const {
        if (kind == NoiseKind::gaussian_static) {
            if (!(level >= 0.0)) throw ConfigError("noise.level (std) must be >= 0");
        } else {
            if (!(level >= 0.0 && level <= 1.0))
                throw ConfigError("noise.level (fraction/rate) must lie in [0,1], got " +
                                  std::to_string(level));
        }
        if (!(pixel_std >= 0.0)) throw ConfigError("noise.pixel_std must be >= 0");
    }
};

// Additive zero-mean Gaussian on static frames (rows = samples).
inline Matrix inject_gaussian(const Matrix& frames, double std_dev, std::uint64_t seed) {
    if (!(std_dev >= 0.0)) throw ConfigError("inject_gaussian: std must be >= 0");
    if (std_dev == 0.0) return frames;
    Matrix out = frames;
    for (std::size_t b = 0; b < out.rows; ++b) {
        auto rng = make_engine(seed, seed_stream::noise, b);
        std::normal_distribution<double> n(0.0, std_dev);
        for (std::size_t f = 0; f < out.cols; ++f) out.at(b, f) += n(rng);
    }
    return out;
}

// Same, elementwise over an encoded tensor (first index = sample).
inline Tensor3 inject_gaussian(const Tensor3& frames, double std_dev, std::uint64_t seed) {
    if (!(std_dev >= 0.0)) throw ConfigError("inject_gaussian: std must be >= 0");
    if (std_dev == 0.0) return frames;
    Tensor3 out = frames;
    for (std::size_t b = 0; b < out.batch; ++b) {
        auto rng = make_engine(seed, seed_stream::noise, b);
        std::normal_distribution<double> n(0.0, std_dev);
        for (std::size_t f = 0; f < out.features; ++f)
            for (std::size_t t = 0; t < out.time; ++t) out.at(b, f, t) += n(rng);
    }
    return out;
}

// Gaussian perturbation of exactly floor(fraction*P) spatial positions per
// sample, applied at every time step of each chosen position.
inline Tensor3 inject_pixel_noise(const Tensor3& event_frames, double fraction, double std_dev,
                                  std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw ConfigError("inject_pixel_noise: fraction must lie in [0,1]");
    if (!(std_dev >= 0.0)) throw ConfigError("inject_pixel_noise: std must be >= 0");
    const std::size_t P = event_frames.features;
    const std::size_t chosen = std::size_t(fraction * double(P));
    if (chosen == 0) return event_frames;

    Tensor3 out = event_frames;
    for (std::size_t b = 0; b < out.batch; ++b) {
        auto rng = make_engine(seed, seed_stream::noise, b);
        std::vector<std::size_t> pos(P);
        std::iota(pos.begin(), pos.end(), std::size_t(0));
        std::shuffle(pos.begin(), pos.end(), rng);
        std::normal_distribution<double> n(0.0, std_dev);
        for (std::size_t c = 0; c < chosen; ++c)
            for (std::size_t t = 0; t < out.time; ++t) out.at(b, pos[c], t) += n(rng);
    }
    return out;
}

// Zero exactly floor(rate*T) seed-chosen time slices per sample.
inline Tensor3 drop_timesteps(const Tensor3& event_frames, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("drop_timesteps: rate must lie in [0,1]");
    const std::size_t T = event_frames.time;
    const std::size_t dropped = std::size_t(rate * double(T));
    if (dropped == 0) return event_frames;

    Tensor3 out = event_frames;
    for (std::size_t b = 0; b < out.batch; ++b) {
        auto rng = make_engine(seed, seed_stream::noise, b);
        std::vector<std::size_t> ts(T);
        std::iota(ts.begin(), ts.end(), std::size_t(0));
        std::shuffle(ts.begin(), ts.end(), rng);
        for (std::size_t d = 0; d < dropped; ++d)
            for (std::size_t f = 0; f < out.features; ++f) out.at(b, f, ts[d]) = 0.0;
    }
    return out;
}

} // namespace kvlif
