#pragma once

#include <cstdint>
#include <random>

// Seeding scheme: every random draw in the library comes from an mt19937_64
// whose seed is derived from (master seed, stream id, index) via splitmix64
// mixing.  Streams keep independent concerns (weight init, shuffling, noise,
// encoding, ...) from aliasing each other; the per-sample index gives split
// streams so that batch-parallel noising would equal sequential noising.

namespace kvlif {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace seed_stream {
inline constexpr std::uint64_t weights = 1;
inline constexpr std::uint64_t shuffle = 2;
inline constexpr std::uint64_t dataset = 3;
inline constexpr std::uint64_t encode = 4;
inline constexpr std::uint64_t noise = 5;
inline constexpr std::uint64_t dynamics = 6;
} // namespace seed_stream

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                           std::uint64_t index = 0) {
    return splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index);
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(master, stream, index));
}

} // namespace kvlif
