#pragma once

#include <cstdint>

namespace fairsens::rng {

// Counter-based uniform stream: every draw is keyed by
// (seed, stream, row, col), so output never depends on evaluation order
// and partitioned generation is bit-identical to serial generation.

enum class Stream : std::uint64_t {
    pick_freeze_u = 1,
    pick_freeze_u_prime = 2,
    nn_tie_break = 3,
    bootstrap = 4,
    dag_normals = 5,
    replicate = 6,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t row, std::uint64_t col) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ stream);
    h = mix64(h ^ row);
    h = mix64(h ^ col);
    return h;
}

// Uniform draw in the open interval (0,1); never returns an endpoint.
constexpr double uniform01(std::uint64_t seed, Stream stream,
                           std::uint64_t row, std::uint64_t col = 0) {
    const std::uint64_t h = hash_key(seed, static_cast<std::uint64_t>(stream), row, col);
    return (static_cast<double>(h) + 0.5) * 0x1.0p-64;
}

// Uniform integer in [0, n) via the multiply-high map (n must be > 0; the
// modulo bias is below 2^-50 for any n that fits an audit table).
constexpr std::uint64_t bounded(std::uint64_t hash, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(hash) * static_cast<unsigned __int128>(n)) >> 64);
}

// Derives an independent sub-seed, e.g. one per bootstrap replicate.
constexpr std::uint64_t derive(std::uint64_t seed, Stream stream, std::uint64_t k) {
    return hash_key(seed, static_cast<std::uint64_t>(stream), k, 0x5eedULL);
}

} // namespace fairsens::rng
