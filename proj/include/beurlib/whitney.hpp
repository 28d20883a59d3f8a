#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "beurlib/errors.hpp"
#include "beurlib/geometry.hpp"

namespace beurlib {

// Half-open dyadic square [k1 2^-j, (k1+1) 2^-j) x [k2 2^-j, (k2+1) 2^-j).
// j may be negative (sides larger than 1). Two dyadic squares are always
// disjoint or nested.
struct DyadicSquare {
    int j = 0;
    long long k1 = 0, k2 = 0;
};

inline bool operator==(const DyadicSquare& a, const DyadicSquare& b) {
    return a.j == b.j && a.k1 == b.k1 && a.k2 == b.k2;
}

inline bool square_key_less(const DyadicSquare& a, const DyadicSquare& b) {
    if (a.j != b.j) return a.j < b.j;
    if (a.k1 != b.k1) return a.k1 < b.k1;
    return a.k2 < b.k2;
}

inline double side(const DyadicSquare& q) { return dyadic_len(q.j); }

inline PlanePoint center(const DyadicSquare& q) {
    double s = side(q);
    return {(double(q.k1) + 0.5) * s, (double(q.k2) + 0.5) * s};
}

inline Rect rect(const DyadicSquare& q) {
    double s = side(q);
    return {double(q.k1) * s, double(q.k2) * s, double(q.k1 + 1) * s, double(q.k2 + 1) * s};
}

// Concentric dilation aQ as a closed rect of side a * l(Q).
inline Rect dilated(const DyadicSquare& q, double a) {
    PlanePoint c = center(q);
    double h = 0.5 * a * side(q);
    return {c.x - h, c.y - h, c.x + h, c.y + h};
}

inline DyadicSquare parent(const DyadicSquare& q) {
    return {q.j - 1, q.k1 >> 1, q.k2 >> 1};  // arithmetic shift floors negatives
}

inline DyadicSquare child(const DyadicSquare& q, int which) {
    return {q.j + 1, 2 * q.k1 + (which & 1), 2 * q.k2 + ((which >> 1) & 1)};
}

// Cells at the resolution floor that still meet the closure of Omega; inside
// means the cell itself lies in Omega (its 13-dilate does not).
struct CollarCell {
    DyadicSquare sq;
    bool inside = false;
};

struct WhitneyDecomposition {
    std::vector<DyadicSquare> cells;                  // sorted by (j, k1, k2)
    std::vector<std::vector<std::uint32_t>> neighbors;  // 5Q cap 5Q' != empty, self excluded
    std::vector<CollarCell> collar;
    double rho = 27.0;   // every cell's rho-dilate meets the complement
    int d0 = 0;          // measured max neighbor count
    int j_max = 0;
    Rect window{};       // root coverage window
    double collar_area = 0.0;
};

namespace detail {

struct SquareKeyHash {
    std::size_t operator()(const std::pair<long long, long long>& k) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 0x100000001b3ull;
        };
        mix(static_cast<std::uint64_t>(k.first));
        mix(static_cast<std::uint64_t>(k.second));
        return static_cast<std::size_t>(h);
    }
};

// 13Q inside Omega: boundary misses the closed dilate and the center is a
// member. For a connected boundary this is exact containment.
inline bool dilate13_inside(const Domain& dom, const DyadicSquare& q) {
    Rect r13 = dilated(q, 13.0);
    if (boundary_intersects_rect(dom, r13)) return false;
    return contains(dom, center(q));
}

}  // namespace detail

// Top-down refinement. A square is accepted when its 13-dilate lies in Omega
// but its parent's does not; the bands this forces (sup-norm boundary distance
// in (6.5 l, 13.5 l]) give 5Q in Omega, 27Q meeting the complement, and
// neighbor sides within a factor 2. Cells at generation j_max that were not
// accepted and still meet Omega form the collar.
inline WhitneyDecomposition whitney_decompose(const Domain& dom, int j_max) {
    if (std::holds_alternative<HalfPlaneDomain>(dom))
        throw UnsupportedDomain("half-plane interiors have no finite decomposition");

    WhitneyDecomposition out;
    out.j_max = j_max;

    std::vector<DyadicSquare> roots;
    if (const auto* g = std::get_if<LipschitzGraphDomain>(&dom)) {
        double W = clip_halfwidth(*g);
        int j0 = -static_cast<int>(std::lround(std::log2(W)));
        if (j0 > j_max) throw EmptyDomain("no interior at this resolution");
        for (long long k1 : {-1ll, 0ll})
            for (long long k2 : {-1ll, 0ll}) roots.push_back({j0, k1, k2});
        out.window = {-W, -W, W, W};
    } else {
        Rect bb{};
        if (const auto* d = std::get_if<DiskDomain>(&dom))
            bb = {d->center.x - d->radius, d->center.y - d->radius,
                  d->center.x + d->radius, d->center.y + d->radius};
        else {
            const auto& poly = std::get<BoundedLipschitzDomain>(dom);
            bb = {poly.vertices[0].x, poly.vertices[0].y, poly.vertices[0].x, poly.vertices[0].y};
            for (const auto& v : poly.vertices) {
                bb.x0 = std::min(bb.x0, v.x);
                bb.y0 = std::min(bb.y0, v.y);
                bb.x1 = std::max(bb.x1, v.x);
                bb.y1 = std::max(bb.y1, v.y);
            }
        }
        double s = pow2ceil(std::max(bb.x1 - bb.x0, bb.y1 - bb.y0));
        int j0 = -static_cast<int>(std::lround(std::log2(s)));
        long long ka = static_cast<long long>(std::floor(bb.x0 / s));
        long long kb = static_cast<long long>(std::floor(bb.x1 / s));
        long long kc = static_cast<long long>(std::floor(bb.y0 / s));
        long long kd = static_cast<long long>(std::floor(bb.y1 / s));
        for (long long k1 = ka; k1 <= kb; ++k1)
            for (long long k2 = kc; k2 <= kd; ++k2) roots.push_back({j0, k1, k2});
        out.window = {double(ka) * s, double(kc) * s, double(kb + 1) * s, double(kd + 1) * s};
        if (j0 > j_max) throw EmptyDomain("no interior at this resolution");
    }

    std::vector<DyadicSquare> stack(roots);
    while (!stack.empty()) {
        DyadicSquare q = stack.back();
        stack.pop_back();
        RectClass cls = classify_rect(dom, rect(q));
        if (cls == RectClass::Outside) continue;
        if (cls == RectClass::Inside && detail::dilate13_inside(dom, q)) {
            out.cells.push_back(q);
            continue;
        }
        if (q.j == j_max) {
            out.collar.push_back({q, cls == RectClass::Inside});
            out.collar_area += rect(q).area();
            continue;
        }
        for (int c = 0; c < 4; ++c) stack.push_back(child(q, c));
    }
    if (out.cells.empty()) throw EmptyDomain("no interior at this resolution");
    std::sort(out.cells.begin(), out.cells.end(), square_key_less);
    std::sort(out.collar.begin(), out.collar.end(),
              [](const CollarCell& a, const CollarCell& b) { return square_key_less(a.sq, b.sq); });

    // Neighbor index: candidates live in generations j-1, j, j+1; closed
    // 5-dilates meet iff the center gap is at most 2.5 (l + l') per axis.
    using GenMap = std::unordered_map<std::pair<long long, long long>, std::uint32_t,
                                      detail::SquareKeyHash>;
    std::unordered_map<int, GenMap> by_gen;
    for (std::uint32_t i = 0; i < out.cells.size(); ++i)
        by_gen[out.cells[i].j].emplace(std::make_pair(out.cells[i].k1, out.cells[i].k2), i);

    out.neighbors.assign(out.cells.size(), {});
    for (std::uint32_t i = 0; i < out.cells.size(); ++i) {
        const DyadicSquare& q = out.cells[i];
        PlanePoint zq = center(q);
        double lq = side(q);
        for (int dj = -1; dj <= 1; ++dj) {
            auto it = by_gen.find(q.j + dj);
            if (it == by_gen.end()) continue;
            double lp = dyadic_len(q.j + dj);
            double reach = 2.5 * (lq + lp) + 0.5 * lp;  // center-to-center plus own half side
            long long ka = static_cast<long long>(std::floor((zq.x - reach) / lp));
            long long kb = static_cast<long long>(std::floor((zq.x + reach) / lp));
            long long kc = static_cast<long long>(std::floor((zq.y - reach) / lp));
            long long kd = static_cast<long long>(std::floor((zq.y + reach) / lp));
            for (long long k1 = ka; k1 <= kb; ++k1) {
                for (long long k2 = kc; k2 <= kd; ++k2) {
                    auto hit = it->second.find({k1, k2});
                    if (hit == it->second.end() || hit->second == i) continue;
                    PlanePoint zp = center(out.cells[hit->second]);
                    double gap = 2.5 * (lq + lp);
                    if (std::abs(zp.x - zq.x) <= gap && std::abs(zp.y - zq.y) <= gap)
                        out.neighbors[i].push_back(hit->second);
                }
            }
        }
        std::sort(out.neighbors[i].begin(), out.neighbors[i].end());
        out.d0 = std::max(out.d0, static_cast<int>(out.neighbors[i].size()));
    }
    return out;
}

}  // namespace beurlib
