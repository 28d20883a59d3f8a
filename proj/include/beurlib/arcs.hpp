#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

#include "beurlib/errors.hpp"
#include "beurlib/geometry.hpp"

namespace beurlib {

inline constexpr std::uint32_t kNoArc = 0xffffffffu;

// Half-open parameter interval [a, b) on the boundary parameterization.
// Closed boundaries use arclength; graph boundaries use the x coordinate, so
// length() is the parameter length (the chord is at least that long divided
// by sqrt(1 + c0^2)).
struct BoundaryArc {
    int j = 0;          // generation
    long long k = 0;    // index within the generation
    double a = 0.0, b = 0.0;
    std::uint32_t parent = kNoArc;
    std::uint32_t child0 = kNoArc, child1 = kNoArc;
};

inline double length(const BoundaryArc& p) { return p.b - p.a; }
inline double midpoint_param(const BoundaryArc& p) { return 0.5 * (p.a + p.b); }

struct ArcHierarchy {
    Domain domain;
    std::vector<BoundaryArc> arcs;          // generation-major, index-ordered
    std::vector<std::size_t> gen_offset;    // size (j_max - j_min + 2); arcs of
                                            // generation j live in
                                            // [gen_offset[j-j_min], gen_offset[j-j_min+1])
    int j_min = 0, j_max = 0;
    long long roots = 0;                    // arc count at generation j_min
    double total_length = 0.0;              // parameter length of the boundary
    bool closed = true;

    std::size_t gen_begin(int j) const { return gen_offset[static_cast<std::size_t>(j - j_min)]; }
    std::size_t gen_end(int j) const { return gen_offset[static_cast<std::size_t>(j - j_min) + 1]; }
    long long gen_count(int j) const { return static_cast<long long>(gen_end(j) - gen_begin(j)); }
    const BoundaryArc& arc_at(int j, long long k) const {
        return arcs[gen_begin(j) + static_cast<std::size_t>(k)];
    }
};

// Closed boundaries split into ceil(S) equal root arcs at generation 0, each
// halved per generation, so lengths stay within a factor 2 of 2^-j. Graph
// boundaries use dyadic x-intervals of the clip window, whose roots are the
// two halves of [-W, W).
inline ArcHierarchy dyadic_arcs(const Domain& dom, int j_min, int j_max) {
    if (std::holds_alternative<HalfPlaneDomain>(dom))
        throw UnsupportedDomain("half-plane boundaries have no finite parameterization");
    if (j_min > j_max) throw WindowOutOfRange("j_min exceeds j_max");

    ArcHierarchy h;
    h.domain = dom;
    h.j_min = j_min;
    h.j_max = j_max;
    h.closed = boundary_closed(dom);

    long long m0 = 0;  // arc count at generation 0 (closed) or per unit pattern (graph)
    double begin = 0.0;
    if (h.closed) {
        if (j_min < 0) throw WindowOutOfRange("closed boundaries start at generation 0");
        h.total_length = boundary_param_length(dom);
        m0 = static_cast<long long>(std::ceil(h.total_length));
        begin = 0.0;
    } else {
        const auto& g = std::get<LipschitzGraphDomain>(dom);
        double W = clip_halfwidth(g);
        int j_root = -static_cast<int>(std::lround(std::log2(W)));  // 2 arcs of length W
        if (j_min < j_root) throw WindowOutOfRange("generation coarser than the clip window");
        h.total_length = 2.0 * W;
        begin = -W;
    }
    // Generation j carries m0 * 2^j arcs (closed) or intervals of length 2^-j
    // tiling [-W, W) (graph); both count absolute in j.
    auto count_at = [&](int j) {
        return h.closed ? m0 * (1ll << j)
                        : static_cast<long long>(std::llround(h.total_length * std::ldexp(1.0, j)));
    };

    h.gen_offset.push_back(0);
    for (int j = j_min; j <= j_max; ++j) {
        long long count = count_at(j);
        double u = h.total_length / double(count);
        for (long long k = 0; k < count; ++k) {
            BoundaryArc p;
            p.j = j;
            p.k = k;
            p.a = begin + double(k) * u;
            p.b = begin + double(k + 1) * u;
            h.arcs.push_back(p);
        }
        h.gen_offset.push_back(h.arcs.size());
    }
    h.roots = count_at(j_min);

    // Parent/child links: exact nesting by index halving.
    for (int j = j_min + 1; j <= j_max; ++j) {
        std::size_t off = h.gen_begin(j), up = h.gen_begin(j - 1);
        long long count = h.gen_count(j);
        for (long long k = 0; k < count; ++k) {
            std::uint32_t self = static_cast<std::uint32_t>(off + k);
            std::uint32_t par = static_cast<std::uint32_t>(up + (k >> 1));
            h.arcs[self].parent = par;
            if ((k & 1) == 0) h.arcs[par].child0 = self;
            else h.arcs[par].child1 = self;
        }
    }
    return h;
}

// Deterministic sample points along an arc (parameter-uniform, endpoints
// inclusive); the workhorse for set distances involving arcs.
inline void arc_samples(const ArcHierarchy& h, const BoundaryArc& p, int count,
                        std::vector<PlanePoint>& out) {
    out.clear();
    for (int i = 0; i < count; ++i) {
        double t = count == 1 ? 0.5 : double(i) / double(count - 1);
        double s = p.a + t * (p.b - p.a);
        out.push_back(boundary_point(h.domain, s));
    }
}

inline PlanePoint arc_midpoint(const ArcHierarchy& h, const BoundaryArc& p) {
    return boundary_point(h.domain, midpoint_param(p));
}

// Euclidean diameter of the sampled arc.
inline double arc_diameter(const ArcHierarchy& h, const BoundaryArc& p, int count = 17) {
    std::vector<PlanePoint> pts;
    arc_samples(h, p, count, pts);
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, dist(pts[i], pts[j]));
    return best;
}

}  // namespace beurlib
