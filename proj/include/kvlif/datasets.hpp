#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "kvlif/encoding.hpp"
#include "kvlif/errors.hpp"
#include "kvlif/rng.hpp"
#include "kvlif/tensor.hpp"

namespace kvlif {

// A desk-scale labelled dataset. `frames` keeps the pre-encoding static
// intensities (empty for event data) so noise can be injected before
// re-encoding; `x` is what the network actually consumes.
struct Dataset {
    Matrix frames;                // batch x features, static intensities
    Tensor3 x;                    // batch x features x T, encoded
    std::vector<int> labels;
    EncodingKind kind = EncodingKind::direct;
    std::size_t classes = 0;

    std::size_t size() const { return labels.size(); }

    void validate() const {
        if (labels.empty()) throw ConfigError("dataset: empty");
        if (x.batch != labels.size()) throw ConfigError("dataset: label/tensor batch mismatch");
        if (classes < 2) throw ConfigError("dataset: needs >= 2 classes");
        for (int y : labels)
            if (y < 0 || std::size_t(y) >= classes)
                throw ConfigError("dataset: label " + std::to_string(y) + " out of range");
    }
};

// ---------------------------------------------------------------------------
// Synthetic generators.

// Two-class rate discrimination: every feature of a sample carries the class
// intensity (low/high), Poisson-encoded with per-sample streams. Labels
// alternate so classes stay balanced.
inline Dataset make_two_intensity_poisson(std::size_t n, std::size_t features, std::size_t T,
                                          double low, double high, std::uint64_t seed) {
    if (n < 2) throw ConfigError("make_two_intensity_poisson: need at least 2 samples");
    if (!(low >= 0.0 && low <= 1.0 && high >= 0.0 && high <= 1.0))
        throw ConfigError("make_two_intensity_poisson: intensities must lie in [0,1]");
    if (!(low < high)) throw ConfigError("make_two_intensity_poisson: low must be < high");
    Dataset d;
    d.kind = EncodingKind::poisson;
    d.classes = 2;
    d.frames = Matrix(n, features);
    d.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.labels[i] = int(i % 2);
        const double intensity = d.labels[i] ? high : low;
        for (std::size_t f = 0; f < features; ++f) d.frames.at(i, f) = intensity;
    }
    d.x = encode_poisson(d.frames, T, derive_seed(seed, seed_stream::dataset)).values;
    d.validate();
    return d;
}

// Moving vertical bar on an h x w grid, drifting one column per step; class 0
// moves right, class 1 moves left. Start column is drawn per sample.
inline Dataset make_moving_bar_events(std::size_t n, std::size_t h, std::size_t w, std::size_t T,
                                      std::uint64_t seed) {
    if (n < 2) throw ConfigError("make_moving_bar_events: need at least 2 samples");
    if (h == 0 || w < 2 || T < 2) throw ConfigError("make_moving_bar_events: grid/T too small");
    Dataset d;
    d.kind = EncodingKind::event;
    d.classes = 2;
    d.labels.resize(n);
    d.x = Tensor3(n, h * w, T);
    for (std::size_t i = 0; i < n; ++i) {
        d.labels[i] = int(i % 2);
        auto rng = make_engine(seed, seed_stream::dataset, i);
        std::uniform_int_distribution<std::size_t> col(0, w - 1);
        const std::size_t start = col(rng);
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t c = d.labels[i] ? (start + (w - 1) * t) % w   // leftward
                                              : (start + t) % w;           // rightward
            for (std::size_t r = 0; r < h; ++r) d.x.at(i, r * w + c, t) = 1.0;
        }
    }
    d.validate();
    return d;
}

// ---------------------------------------------------------------------------
// idx-style little-endian container (see README for the byte-exact layout):
//   [0x00, 0x00, dtype, ndim] then ndim u32 little-endian dims, then row-major
//   payload. Only dtype 0x08 (unsigned byte) is supported.

struct IdxData {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> bytes;
};

inline IdxData read_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_idx: cannot open '" + path + "'");
    std::uint8_t header[4];
    if (!in.read(reinterpret_cast<char*>(header), 4))
        throw IoError("read_idx: '" + path + "' truncated in header");
    if (header[0] != 0 || header[1] != 0)
        throw IoError("read_idx: '" + path + "' has bad magic bytes");
    if (header[2] != 0x08)
        throw IoError("read_idx: '" + path + "' unsupported dtype 0x" + std::to_string(header[2]) +
                      " (only 0x08 = u8)");
    const unsigned ndim = header[3];
    if (ndim == 0 || ndim > 4) throw IoError("read_idx: '" + path + "' bad dimension count");

    IdxData d;
    std::size_t total = 1;
    for (unsigned i = 0; i < ndim; ++i) {
        std::uint8_t b[4];
        if (!in.read(reinterpret_cast<char*>(b), 4))
            throw IoError("read_idx: '" + path + "' truncated in dims");
        const std::uint32_t dim = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                                  (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
        d.dims.push_back(dim);
        total *= dim;
    }
    d.bytes.resize(total);
    if (total && !in.read(reinterpret_cast<char*>(d.bytes.data()), std::streamsize(total)))
        throw IoError("read_idx: '" + path + "' truncated in payload");
    in.get();
    if (!in.eof()) throw IoError("read_idx: '" + path + "' has trailing bytes");
    return d;
}

inline void write_idx(const std::string& path, const IdxData& d) {
    if (d.dims.empty() || d.dims.size() > 4) throw IoError("write_idx: bad dimension count");
    std::size_t total = 1;
    for (std::uint32_t dim : d.dims) total *= dim;
    if (total != d.bytes.size()) throw IoError("write_idx: dims do not match payload size");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("write_idx: cannot open '" + path + "'");
    const std::uint8_t header[4] = {0, 0, 0x08, std::uint8_t(d.dims.size())};
    out.write(reinterpret_cast<const char*>(header), 4);
    for (std::uint32_t dim : d.dims) {
        const std::uint8_t b[4] = {std::uint8_t(dim & 0xff), std::uint8_t((dim >> 8) & 0xff),
                                   std::uint8_t((dim >> 16) & 0xff), std::uint8_t((dim >> 24) & 0xff)};
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    out.write(reinterpret_cast<const char*>(d.bytes.data()), std::streamsize(d.bytes.size()));
    if (!out) throw IoError("write_idx: failed writing '" + path + "'");
}

// Assemble a dataset from an idx image file (N x H x W) and label file (N).
// Pixels are scaled to [0,1]; encoding is direct or poisson.
inline Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                                std::size_t T, EncodingKind kind, std::uint64_t seed) {
    IdxData imgs = read_idx(images_path);
    IdxData labs = read_idx(labels_path);
    if (imgs.dims.size() != 3)
        throw IoError("load_idx_dataset: image file must be 3-d (count x rows x cols)");
    if (labs.dims.size() != 1) throw IoError("load_idx_dataset: label file must be 1-d");
    if (imgs.dims[0] != labs.dims[0])
        throw IoError("load_idx_dataset: image/label counts differ (" +
                      std::to_string(imgs.dims[0]) + " vs " + std::to_string(labs.dims[0]) + ")");
    const std::size_t n = imgs.dims[0], features = std::size_t(imgs.dims[1]) * imgs.dims[2];
    if (n == 0 || features == 0) throw IoError("load_idx_dataset: empty image file");

    Dataset d;
    d.frames = Matrix(n, features);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < features; ++f)
            d.frames.at(i, f) = double(imgs.bytes[i * features + f]) / 255.0;
    d.labels.assign(labs.bytes.begin(), labs.bytes.end());
    int maxlab = 0;
    for (int y : d.labels) maxlab = y > maxlab ? y : maxlab;
    d.classes = std::size_t(maxlab) + 1;
    if (d.classes < 2) d.classes = 2;

    if (kind == EncodingKind::direct) {
        d.kind = EncodingKind::direct;
        d.x = encode_direct(d.frames, T).values;
    } else if (kind == EncodingKind::poisson) {
        d.kind = EncodingKind::poisson;
        d.x = encode_poisson(d.frames, T, derive_seed(seed, seed_stream::dataset)).values;
    } else {
        throw ConfigError("load_idx_dataset: idx images need direct or poisson encoding");
    }
    d.validate();
    return d;
}

} // namespace kvlif
