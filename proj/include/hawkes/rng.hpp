#pragma once

#include <cstdint>
#include <random>

namespace hawkes {

// splitmix64; used to derive independent, reproducible engine seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream keyed by (seed, stream); serial and parallel runs that
/// use the same keys draw identical values.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(mix64(mix64(seed) ^ mix64(stream + 0x5851f42d4c957f2dULL)));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return make_stream(seed, mix64(a) ^ (b * 0xda942042e4dd58b5ULL + 1));
}

}  // namespace hawkes
