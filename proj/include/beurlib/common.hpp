#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <string>

namespace beurlib {

inline constexpr double kPi = 3.14159265358979323846;

using Cpx = std::complex<double>;

inline double sq(double v) { return v * v; }

// Smallest power of two >= v (v > 0).
inline double pow2ceil(double v) {
    double p = 1.0;
    while (p < v) p *= 2.0;
    while (p / 2.0 >= v) p /= 2.0;
    return p;
}

// ell = 2^{-j}, exact for the generation range used here.
inline double dyadic_len(int j) { return std::ldexp(1.0, -j); }

// FNV-1a, used for cache keys and content-addressed file names.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 1469598103934665603ull) {
    return fnv1a(s.data(), s.size(), seed);
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Shortest round-trip decimal; keeps CSV output byte-stable across runs.
inline std::string fmt_double(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    for (int prec = 1; prec <= 16; ++prec) {
        char trial[40];
        std::snprintf(trial, sizeof trial, "%.*g", prec, v);
        std::sscanf(trial, "%lf", &back);
        if (back == v) return trial;
    }
    return buf;
}

// splitmix64; deterministic seed expansion for quasi-random point sets.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

}  // namespace beurlib
