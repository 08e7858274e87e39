#pragma once

#include <cmath>
#include <cstdint>

namespace drddpc {

// Counter-based Gaussian generator. Every draw is a pure function of
// (seed, stream, index), so replaying a realization for a different
// controller consumes exactly the same values at the same time indices.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_key(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index, std::uint64_t lane) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ index);
    h = splitmix64(h ^ lane);
    return h;
}

// Uniform in (0,1), 53-bit resolution, never exactly 0 or 1.
inline double uniform01(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two hashed uniforms.
inline double standard_normal(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index) {
    const double u1 = uniform01(hash_key(seed, stream, index, 0));
    const double u2 = uniform01(hash_key(seed, stream, index, 1));
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Stream labels used by the toolkit; keeping them in one place guarantees
// distinct subsystems never collide on the same counter.
enum Stream : std::uint64_t {
    kOfflineInput = 1,
    kOfflineNoise = 2,
    kOfflineInit = 3,
    kLoopNoise = 4,
    kLoopInit = 5,
};

} // namespace rng
} // namespace drddpc
