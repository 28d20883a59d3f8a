#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "beurlib/arcs.hpp"
#include "beurlib/errors.hpp"
#include "beurlib/whitney.hpp"

namespace beurlib {

namespace detail {

// Generation whose arcs best match length l in log scale; ties toward coarser.
inline int matching_generation(const ArcHierarchy& h, double l) {
    int best = h.j_min;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int j = h.j_min; j <= h.j_max; ++j) {
        double arc_len = h.total_length / double(h.gen_count(j));
        double gap = std::abs(std::log2(arc_len) - std::log2(l));
        if (gap < best_gap - 1e-12) {
            best_gap = gap;
            best = j;
        }
    }
    return best;
}

// Arc of generation j containing boundary parameter s.
inline const BoundaryArc& arc_containing(const ArcHierarchy& h, int j, double s) {
    long long count = h.gen_count(j);
    const BoundaryArc& first = h.arcs[h.gen_begin(j)];
    double u = h.total_length / double(count);
    double rel = (s - first.a) / u;
    long long k = static_cast<long long>(std::floor(rel));
    if (h.closed) {
        k %= count;
        if (k < 0) k += count;
    } else {
        k = std::clamp(k, 0ll, count - 1);
    }
    return h.arc_at(j, k);
}

// Smallest distance from the sampled arc to a closed rectangle.
inline double sampled_rect_distance(const ArcHierarchy& h, const BoundaryArc& p, const Rect& r,
                                    int count, std::vector<PlanePoint>& scratch) {
    arc_samples(h, p, count, scratch);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& pt : scratch) best = std::min(best, dist_point_rect(pt, r));
    return best;
}

inline const DyadicSquare* find_cell(const WhitneyDecomposition& w, const DyadicSquare& q) {
    auto it = std::lower_bound(w.cells.begin(), w.cells.end(), q, square_key_less);
    if (it != w.cells.end() && *it == q) return &*it;
    return nullptr;
}

}  // namespace detail

// Boundary arc assigned to a Whitney square: an arc of comparable scale that
// meets rho Q. The boundary always crosses the closed rho-dilate (rho Q holds
// a complement point and the segment from z_Q to it stays inside), so some
// arc of the matched generation passes within sampling error of the dilate.
// Arcs whose sampled distance sits below an eighth of the arc length are
// admissible; among them the one whose midpoint is closest to z_Q wins, ties
// toward the smaller interval start. If sampling certifies none, the arc with
// the smallest sampled distance stands in.
inline const BoundaryArc& phi_map(const WhitneyDecomposition& w, const ArcHierarchy& h,
                                  const DyadicSquare& q) {
    double lq = side(q);
    PlanePoint zq = center(q);
    int j = detail::matching_generation(h, lq);
    Rect admissible = dilated(q, w.rho);

    // Midpoint prefilter: an arc reaching the rho-dilate has its midpoint
    // within half the admissible diagonal plus its own parameter spread.
    double arc_len = h.total_length / double(h.gen_count(j));
    double reach = 0.5 * admissible.diam() + 2.0 * arc_len;
    const BoundaryArc* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    const BoundaryArc* nearest = nullptr;
    double nearest_sd = std::numeric_limits<double>::infinity();
    std::vector<PlanePoint> scratch;
    for (std::size_t i = h.gen_begin(j); i < h.gen_end(j); ++i) {
        const BoundaryArc& p = h.arcs[i];
        PlanePoint mid = arc_midpoint(h, p);
        double d = dist(mid, zq);
        if (d > reach) continue;
        double sd = detail::sampled_rect_distance(h, p, admissible, 33, scratch);
        if (sd < nearest_sd) {
            nearest_sd = sd;
            nearest = &p;
        }
        if (sd <= arc_len / 8.0 && d < best_d) {
            best_d = d;
            best = &p;
        }
    }
    if (best) return *best;
    if (nearest) return *nearest;
    return detail::arc_containing(h, j, nearest_boundary_param(h.domain, zq));
}

// Whitney square assigned to a boundary arc: side within a factor 2 of the
// arc length, center as close to the arc midpoint as the decomposition
// allows. Ring search over the cell lattice, deterministic scan order.
inline const DyadicSquare& psi_map(const ArcHierarchy& h, const WhitneyDecomposition& w,
                                   const BoundaryArc& p) {
    double lp = length(p);
    PlanePoint mid = arc_midpoint(h, p);
    int j_lo = static_cast<int>(std::ceil(-std::log2(2.0 * lp) - 1e-12));
    int j_hi = static_cast<int>(std::floor(-std::log2(0.5 * lp) + 1e-12));
    const DyadicSquare* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    constexpr int kMaxRing = 32;
    for (int j = j_lo; j <= j_hi; ++j) {
        double s = dyadic_len(j);
        long long k1c = static_cast<long long>(std::floor(mid.x / s));
        long long k2c = static_cast<long long>(std::floor(mid.y / s));
        for (int r = 0; r <= kMaxRing; ++r) {
            if (best && best_d < double(r - 1) * s) break;
            for (long long k1 = k1c - r; k1 <= k1c + r; ++k1) {
                for (long long k2 = k2c - r; k2 <= k2c + r; ++k2) {
                    if (std::max(std::llabs(k1 - k1c), std::llabs(k2 - k2c)) != r) continue;
                    const DyadicSquare* cell = detail::find_cell(w, {j, k1, k2});
                    if (!cell) continue;
                    double d = dist(center(*cell), mid);
                    if (d < best_d) {
                        best_d = d;
                        best = cell;
                    }
                }
            }
        }
    }
    if (!best) throw UnresolvedScale("no Whitney square of comparable scale near the arc");
    return *best;
}

// Big distance D(Q, R) = l(Q) + l(R) + dist(Q, R). Set distances involving
// arcs use deterministic parameter-uniform samples.
inline double big_distance(const DyadicSquare& q, const DyadicSquare& r) {
    Rect a = rect(q), b = rect(r);
    double dx = std::max({a.x0 - b.x1, b.x0 - a.x1, 0.0});
    double dy = std::max({a.y0 - b.y1, b.y0 - a.y1, 0.0});
    return side(q) + side(r) + std::hypot(dx, dy);
}

inline double big_distance(const ArcHierarchy& h, const BoundaryArc& p, const BoundaryArc& r,
                           int samples = 17) {
    std::vector<PlanePoint> a, b;
    arc_samples(h, p, samples, a);
    arc_samples(h, r, samples, b);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& x : a)
        for (const auto& y : b) d = std::min(d, dist(x, y));
    return length(p) + length(r) + d;
}

inline double big_distance(const ArcHierarchy& h, const BoundaryArc& p, const DyadicSquare& q,
                           int samples = 33) {
    std::vector<PlanePoint> a;
    arc_samples(h, p, samples, a);
    Rect r = rect(q);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& x : a) d = std::min(d, dist_point_rect(x, r));
    return length(p) + side(q) + d;
}

inline double big_distance(const ArcHierarchy& h, const DyadicSquare& q, const BoundaryArc& p,
                           int samples = 33) {
    return big_distance(h, p, q, samples);
}

struct ScaleWindow {
    int j_lo = 0;
    int j_hi = 0;
};

// Truncated sum over arcs R of l(R)^(1+eta) / D(Q,R)^(1+tau); finite for
// eta < tau with the bound c / l(Q)^(tau-eta).
inline double geometric_sum(const ArcHierarchy& h, const BoundaryArc& q, double eta, double tau,
                            ScaleWindow window) {
    if (!(eta > 0.0) || !(eta < tau)) throw BadExponents("need 0 < eta < tau");
    int lo = std::max(window.j_lo, h.j_min);
    int hi = std::min(window.j_hi, h.j_max);
    if (lo > hi) throw WindowOutOfRange("scale window misses the built hierarchy");

    std::vector<PlanePoint> qs, rs;
    arc_samples(h, q, 17, qs);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) {
        for (std::size_t i = h.gen_begin(j); i < h.gen_end(j); ++i) {
            const BoundaryArc& r = h.arcs[i];
            arc_samples(h, r, 17, rs);
            double d = std::numeric_limits<double>::infinity();
            for (const auto& x : qs)
                for (const auto& y : rs) d = std::min(d, dist(x, y));
            double D = length(q) + length(r) + d;
            sum += std::pow(length(r), 1.0 + eta) / std::pow(D, 1.0 + tau);
        }
    }
    return sum;
}

}  // namespace beurlib
