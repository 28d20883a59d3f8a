#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <variant>
#include <vector>

#include "beurlib/common.hpp"
#include "beurlib/errors.hpp"

namespace beurlib {

struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
};

inline PlanePoint operator+(PlanePoint a, PlanePoint b) { return {a.x + b.x, a.y + b.y}; }
inline PlanePoint operator-(PlanePoint a, PlanePoint b) { return {a.x - b.x, a.y - b.y}; }
inline PlanePoint operator*(double s, PlanePoint p) { return {s * p.x, s * p.y}; }
inline double dot(PlanePoint a, PlanePoint b) { return a.x * b.x + a.y * b.y; }
inline double cross(PlanePoint a, PlanePoint b) { return a.x * b.y - a.y * b.x; }
inline double norm2(PlanePoint p) { return std::hypot(p.x, p.y); }
inline double dist(PlanePoint a, PlanePoint b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline Cpx cpx(PlanePoint p) { return {p.x, p.y}; }
inline PlanePoint point(Cpx z) { return {z.real(), z.imag()}; }

struct UnitNormal {
    double nx = 0.0;
    double ny = 0.0;
};

// Axis-aligned rectangle, x0 <= x1 and y0 <= y1.
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    double diam() const { return std::hypot(width(), height()); }
    PlanePoint center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    bool contains(PlanePoint p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

inline double dist_point_rect(PlanePoint p, const Rect& r) {
    double dx = std::max({r.x0 - p.x, 0.0, p.x - r.x1});
    double dy = std::max({r.y0 - p.y, 0.0, p.y - r.y1});
    return std::hypot(dx, dy);
}

inline double maxdist_point_rect(PlanePoint p, const Rect& r) {
    double dx = std::max(std::abs(p.x - r.x0), std::abs(p.x - r.x1));
    double dy = std::max(std::abs(p.y - r.y0), std::abs(p.y - r.y1));
    return std::hypot(dx, dy);
}

inline double dist_point_segment(PlanePoint p, PlanePoint a, PlanePoint b) {
    PlanePoint ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 == 0.0) return dist(p, a);
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return dist(p, a + t * ab);
}

inline bool segments_intersect(PlanePoint p1, PlanePoint p2, PlanePoint q1, PlanePoint q2) {
    auto orient = [](PlanePoint a, PlanePoint b, PlanePoint c) {
        double v = cross(b - a, c - a);
        return (v > 0.0) - (v < 0.0);
    };
    int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    auto on = [](PlanePoint a, PlanePoint b, PlanePoint c) {
        return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
               std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
    };
    if (o1 == 0 && on(p1, p2, q1)) return true;
    if (o2 == 0 && on(p1, p2, q2)) return true;
    if (o3 == 0 && on(q1, q2, p1)) return true;
    if (o4 == 0 && on(q1, q2, p2)) return true;
    return false;
}

inline bool segment_intersects_rect(PlanePoint a, PlanePoint b, const Rect& r) {
    if (std::max(a.x, b.x) < r.x0 || std::min(a.x, b.x) > r.x1 ||
        std::max(a.y, b.y) < r.y0 || std::min(a.y, b.y) > r.y1)
        return false;
    if (r.contains(a) || r.contains(b)) return true;
    PlanePoint c00{r.x0, r.y0}, c10{r.x1, r.y0}, c11{r.x1, r.y1}, c01{r.x0, r.y1};
    return segments_intersect(a, b, c00, c10) || segments_intersect(a, b, c10, c11) ||
           segments_intersect(a, b, c11, c01) || segments_intersect(a, b, c01, c00);
}

// ---------------------------------------------------------------------------
// Domain presentations. All domains are open sets; boundary points are not
// members. Membership at the boundary is exact only up to float rounding.

struct DiskDomain {
    PlanePoint center;
    double radius = 1.0;
};

// Omega = { z : dot(z - anchor, inward_normal) > 0 }.
struct HalfPlaneDomain {
    PlanePoint anchor;
    UnitNormal inward_normal{0.0, 1.0};
};

// Supergraph { (x, y) : y > A(x) } of a piecewise-linear A sampled on a
// uniform grid x_i = x0 + i*spacing. A vanishes for |x| >= support_radius and
// the sample grid must cover [-support_radius, support_radius]. A'(x) uses the
// left slope at knots; A' = 0 beyond the grid.
struct LipschitzGraphDomain {
    double x0 = 0.0;
    double spacing = 0.0;
    std::vector<double> samples;
    double support_radius = 0.0;
    double lipschitz_bound = 0.0;
};

// Simple closed CCW polygonal chain.
struct BoundedLipschitzDomain {
    std::vector<PlanePoint> vertices;
    // Derived, filled by make_polygon.
    std::vector<double> cum_length;  // cum_length[i] = arclength from vertices[0] to vertices[i]
    double perimeter = 0.0;
    double diameter = 0.0;
    double chord_arc_constant = 0.0;
    // Horizontal slabs for membership tests: row i lists the edges whose
    // y-span meets [row_y0 + i*row_h, row_y0 + (i+1)*row_h].  The even-odd
    // crossing test ignores every other edge, so filtering by slab changes
    // nothing but the work done.  Empty rows mean "scan all edges".
    double row_y0 = 0.0, row_h = 0.0;
    std::vector<std::vector<int>> row_edges;
};

using Domain = std::variant<DiskDomain, HalfPlaneDomain, LipschitzGraphDomain, BoundedLipschitzDomain>;

inline DiskDomain make_disk(PlanePoint center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidDomain("disk radius must be positive");
    return {center, radius};
}

inline HalfPlaneDomain make_halfplane(PlanePoint anchor, PlanePoint inward) {
    double n = norm2(inward);
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidDomain("halfplane inward normal must be nonzero");
    return {anchor, {inward.x / n, inward.y / n}};
}

inline LipschitzGraphDomain make_graph(double x0, double spacing, std::vector<double> samples,
                                       double support_radius, double lipschitz_bound) {
    if (!(spacing > 0.0)) throw InvalidDomain("graph spacing must be positive");
    if (samples.size() < 2) throw InvalidDomain("graph needs at least two samples");
    if (!(support_radius > 0.0)) throw InvalidDomain("graph support radius must be positive");
    if (lipschitz_bound < 0.0) throw InvalidDomain("graph lipschitz bound must be nonnegative");
    double xN = x0 + spacing * double(samples.size() - 1);
    if (x0 > -support_radius || xN < support_radius)
        throw InvalidDomain("graph sample grid must cover [-support_radius, support_radius]");
    double slack = 1e-9 * std::max(1.0, lipschitz_bound) * spacing;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) throw InvalidDomain("graph sample not finite");
        if (std::abs(samples[i + 1] - samples[i]) > lipschitz_bound * spacing + slack)
            throw InvalidDomain("graph samples exceed the declared lipschitz bound");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double x = x0 + spacing * double(i);
        if ((x <= -support_radius || x >= support_radius) && samples[i] != 0.0) {
            // Allow the knots straddling +-support_radius to interpolate to zero.
            double xprev = x - spacing, xnext = x + spacing;
            bool straddles = (x <= -support_radius && xnext > -support_radius) ||
                             (x >= support_radius && xprev < support_radius);
            if (!straddles)
                throw InvalidDomain("graph samples must vanish outside the support radius");
        }
    }
    return {x0, spacing, std::move(samples), support_radius, lipschitz_bound};
}

inline BoundedLipschitzDomain make_polygon(std::vector<PlanePoint> vertices) {
    std::size_t n = vertices.size();
    if (n < 3) throw InvalidDomain("polygon needs at least three vertices");
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        PlanePoint a = vertices[i], b = vertices[(i + 1) % n];
        if (dist(a, b) == 0.0) throw InvalidDomain("polygon has a zero-length edge");
        area2 += cross(a, b);
    }
    if (area2 <= 0.0) throw InvalidDomain("polygon chain must be counterclockwise");
    // Simplicity: non-adjacent edges must not intersect.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]))
                throw InvalidDomain("polygon chain self-intersects");
        }
    }
    BoundedLipschitzDomain d;
    d.vertices = std::move(vertices);
    d.cum_length.resize(n + 1);
    d.cum_length[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        d.cum_length[i + 1] = d.cum_length[i] + dist(d.vertices[i], d.vertices[(i + 1) % n]);
    d.perimeter = d.cum_length[n];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double chord = dist(d.vertices[i], d.vertices[j]);
            d.diameter = std::max(d.diameter, chord);
            if (chord > 0.0) {
                double arc = d.cum_length[j] - d.cum_length[i];
                arc = std::min(arc, d.perimeter - arc);
                d.chord_arc_constant = std::max(d.chord_arc_constant, arc / chord);
            }
        }
    double ylo = d.vertices[0].y, yhi = ylo;
    for (const auto& v : d.vertices) {
        ylo = std::min(ylo, v.y);
        yhi = std::max(yhi, v.y);
    }
    std::size_t rows = std::min<std::size_t>(4 * n, 1024);
    d.row_y0 = ylo;
    d.row_h = (yhi - ylo) / double(rows);
    if (d.row_h > 0.0) {
        d.row_edges.assign(rows, {});
        for (std::size_t i = 0; i < n; ++i) {
            // Edge i runs from vertices[i-1] to vertices[i], matching contains().
            double a = d.vertices[i].y, b = d.vertices[(i + n - 1) % n].y;
            auto lo = static_cast<long long>(std::floor((std::min(a, b) - ylo) / d.row_h));
            auto hi = static_cast<long long>(std::floor((std::max(a, b) - ylo) / d.row_h));
            lo = std::clamp(lo, 0ll, static_cast<long long>(rows) - 1);
            hi = std::clamp(hi, 0ll, static_cast<long long>(rows) - 1);
            for (long long r = lo; r <= hi; ++r) d.row_edges[static_cast<std::size_t>(r)].push_back(int(i));
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Graph evaluation.

inline std::size_t graph_cell(const LipschitzGraphDomain& g, double x) {
    double t = (x - g.x0) / g.spacing;
    auto i = static_cast<long long>(std::floor(t));
    i = std::clamp(i, 0ll, static_cast<long long>(g.samples.size()) - 2);
    return static_cast<std::size_t>(i);
}

inline double graph_value(const LipschitzGraphDomain& g, double x) {
    double xN = g.x0 + g.spacing * double(g.samples.size() - 1);
    if (x <= g.x0 || x >= xN) return 0.0;
    std::size_t i = graph_cell(g, x);
    double xi = g.x0 + g.spacing * double(i);
    double t = (x - xi) / g.spacing;
    return g.samples[i] + t * (g.samples[i + 1] - g.samples[i]);
}

// Left slope at knots: A'(x_i) uses the cell ending at x_i.
inline double graph_slope(const LipschitzGraphDomain& g, double x) {
    double xN = g.x0 + g.spacing * double(g.samples.size() - 1);
    if (x <= g.x0 || x > xN) return 0.0;
    double t = (x - g.x0) / g.spacing;
    double f = std::floor(t);
    auto i = static_cast<long long>(f);
    if (t == f) --i;  // knot: take the left cell
    i = std::clamp(i, 0ll, static_cast<long long>(g.samples.size()) - 2);
    auto c = static_cast<std::size_t>(i);
    return (g.samples[c + 1] - g.samples[c]) / g.spacing;
}

inline double graph_max_abs(const LipschitzGraphDomain& g) {
    double m = 0.0;
    for (double v : g.samples) m = std::max(m, std::abs(v));
    return m;
}

// Decomposition clip window half-width: power of two, >= 4 * support radius
// and comfortably above max|A|.
inline double clip_halfwidth(const LipschitzGraphDomain& g) {
    return pow2ceil(std::max({4.0 * g.support_radius, 2.0 * graph_max_abs(g), 1.0}));
}

// ---------------------------------------------------------------------------
// Membership.

inline bool contains(const DiskDomain& d, PlanePoint p) { return dist(p, d.center) < d.radius; }

inline bool contains(const HalfPlaneDomain& h, PlanePoint p) {
    return (p.x - h.anchor.x) * h.inward_normal.nx + (p.y - h.anchor.y) * h.inward_normal.ny > 0.0;
}

inline bool contains(const LipschitzGraphDomain& g, PlanePoint p) { return p.y > graph_value(g, p.x); }

inline bool contains(const BoundedLipschitzDomain& d, PlanePoint p) {
    bool inside = false;
    std::size_t n = d.vertices.size();
    if (!d.row_edges.empty() && d.row_h > 0.0) {
        auto r = static_cast<long long>(std::floor((p.y - d.row_y0) / d.row_h));
        if (r < 0 || r >= static_cast<long long>(d.row_edges.size())) return false;
        for (int i : d.row_edges[static_cast<std::size_t>(r)]) {
            PlanePoint a = d.vertices[static_cast<std::size_t>(i)];
            PlanePoint b = d.vertices[(static_cast<std::size_t>(i) + n - 1) % n];
            if ((a.y > p.y) != (b.y > p.y)) {
                double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if (p.x < xint) inside = !inside;
            }
        }
        return inside;
    }
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        PlanePoint a = d.vertices[i], b = d.vertices[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

inline bool contains(const Domain& d, PlanePoint p) {
    return std::visit([&](const auto& v) { return contains(v, p); }, d);
}

// ---------------------------------------------------------------------------
// Distance to the boundary.

inline double dist_to_boundary(const DiskDomain& d, PlanePoint p) {
    return std::abs(d.radius - dist(p, d.center));
}

inline double dist_to_boundary(const HalfPlaneDomain& h, PlanePoint p) {
    return std::abs((p.x - h.anchor.x) * h.inward_normal.nx + (p.y - h.anchor.y) * h.inward_normal.ny);
}

inline double dist_to_boundary(const LipschitzGraphDomain& g, PlanePoint p) {
    std::size_t n = g.samples.size();
    double x_first = g.x0, x_last = g.x0 + g.spacing * double(n - 1);
    double best = std::numeric_limits<double>::infinity();
    // Tails y = 0 beyond the grid.
    best = std::min(best, p.x <= x_first ? std::abs(p.y) : std::hypot(p.x - x_first, p.y));
    best = std::min(best, p.x >= x_last ? std::abs(p.y) : std::hypot(p.x - x_last, p.y));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double xa = g.x0 + g.spacing * double(i);
        double xd = std::max({xa - p.x, 0.0, p.x - (xa + g.spacing)});
        if (xd >= best) continue;  // x gap alone already exceeds the best distance
        PlanePoint a{xa, g.samples[i]};
        PlanePoint b{xa + g.spacing, g.samples[i + 1]};
        best = std::min(best, dist_point_segment(p, a, b));
    }
    return best;
}

inline double dist_to_boundary(const BoundedLipschitzDomain& d, PlanePoint p) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t n = d.vertices.size();
    for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, dist_point_segment(p, d.vertices[i], d.vertices[(i + 1) % n]));
    return best;
}

inline double dist_to_boundary(const Domain& d, PlanePoint p) {
    return std::visit([&](const auto& v) { return dist_to_boundary(v, p); }, d);
}

// ---------------------------------------------------------------------------
// Boundary vs rectangle tests, exact per presentation.

inline bool boundary_intersects_rect(const DiskDomain& d, const Rect& r) {
    return dist_point_rect(d.center, r) <= d.radius && maxdist_point_rect(d.center, r) >= d.radius;
}

inline bool boundary_intersects_rect(const HalfPlaneDomain& h, const Rect& r) {
    double s0 = (r.x0 - h.anchor.x) * h.inward_normal.nx + (r.y0 - h.anchor.y) * h.inward_normal.ny;
    double s1 = (r.x1 - h.anchor.x) * h.inward_normal.nx + (r.y0 - h.anchor.y) * h.inward_normal.ny;
    double s2 = (r.x0 - h.anchor.x) * h.inward_normal.nx + (r.y1 - h.anchor.y) * h.inward_normal.ny;
    double s3 = (r.x1 - h.anchor.x) * h.inward_normal.nx + (r.y1 - h.anchor.y) * h.inward_normal.ny;
    double lo = std::min({s0, s1, s2, s3}), hi = std::max({s0, s1, s2, s3});
    return lo <= 0.0 && hi >= 0.0;
}

inline bool boundary_intersects_rect(const LipschitzGraphDomain& g, const Rect& r) {
    std::size_t n = g.samples.size();
    double x_first = g.x0, x_last = g.x0 + g.spacing * double(n - 1);
    // Flat tails.
    if (r.y0 <= 0.0 && r.y1 >= 0.0 && (r.x0 < x_first || r.x1 > x_last)) return true;
    if (r.x1 < x_first || r.x0 > x_last) return false;
    std::size_t i0 = graph_cell(g, std::max(r.x0, x_first));
    std::size_t i1 = graph_cell(g, std::min(r.x1, x_last));
    for (std::size_t i = i0; i <= i1 && i + 1 < n; ++i) {
        PlanePoint a{g.x0 + g.spacing * double(i), g.samples[i]};
        PlanePoint b{g.x0 + g.spacing * double(i + 1), g.samples[i + 1]};
        if (segment_intersects_rect(a, b, r)) return true;
    }
    return false;
}

inline bool boundary_intersects_rect(const BoundedLipschitzDomain& d, const Rect& r) {
    std::size_t n = d.vertices.size();
    for (std::size_t i = 0; i < n; ++i)
        if (segment_intersects_rect(d.vertices[i], d.vertices[(i + 1) % n], r)) return true;
    return false;
}

inline bool boundary_intersects_rect(const Domain& d, const Rect& r) {
    return std::visit([&](const auto& v) { return boundary_intersects_rect(v, r); }, d);
}

enum class RectClass { Outside, Inside, Straddle };

inline RectClass classify_rect(const Domain& d, const Rect& r) {
    if (boundary_intersects_rect(d, r)) return RectClass::Straddle;
    return contains(d, r.center()) ? RectClass::Inside : RectClass::Outside;
}

// ---------------------------------------------------------------------------
// Outward unit normals. Graph normals follow the supergraph identity
// (1+A'^2)^{-1/2} (A', -1) with the left slope at knots.

inline UnitNormal normal_from_graph(const LipschitzGraphDomain& g, double x) {
    double s = graph_slope(g, x);
    double d = std::sqrt(1.0 + s * s);
    return {s / d, -1.0 / d};
}

inline UnitNormal normal_from_slope(double slope) {
    double d = std::sqrt(1.0 + slope * slope);
    return {slope / d, -1.0 / d};
}

// ---------------------------------------------------------------------------
// Boundary parameterization. Closed presentations use arclength in [0, S);
// graph domains use the x coordinate over the clip window [-W, W].

inline bool boundary_closed(const Domain& d) {
    return std::holds_alternative<DiskDomain>(d) || std::holds_alternative<BoundedLipschitzDomain>(d);
}

inline double boundary_length(const DiskDomain& d) { return 2.0 * kPi * d.radius; }
inline double boundary_length(const BoundedLipschitzDomain& d) { return d.perimeter; }

// Total parameter length; for graph domains this is the clip window width 2W.
inline double boundary_param_length(const Domain& d) {
    if (const auto* disk = std::get_if<DiskDomain>(&d)) return boundary_length(*disk);
    if (const auto* poly = std::get_if<BoundedLipschitzDomain>(&d)) return boundary_length(*poly);
    if (const auto* g = std::get_if<LipschitzGraphDomain>(&d)) return 2.0 * clip_halfwidth(*g);
    throw UnsupportedDomain("halfplane boundaries have no finite parameterization");
}

inline double boundary_param_begin(const Domain& d) {
    if (const auto* g = std::get_if<LipschitzGraphDomain>(&d)) return -clip_halfwidth(*g);
    return 0.0;
}

inline PlanePoint boundary_point(const DiskDomain& d, double s) {
    double th = s / d.radius;
    return {d.center.x + d.radius * std::cos(th), d.center.y + d.radius * std::sin(th)};
}

inline PlanePoint boundary_point(const BoundedLipschitzDomain& d, double s) {
    double S = d.perimeter;
    s = s - S * std::floor(s / S);
    auto it = std::upper_bound(d.cum_length.begin(), d.cum_length.end(), s);
    std::size_t i = it == d.cum_length.begin() ? 0 : static_cast<std::size_t>(it - d.cum_length.begin()) - 1;
    i = std::min(i, d.vertices.size() - 1);
    PlanePoint a = d.vertices[i], b = d.vertices[(i + 1) % d.vertices.size()];
    double seg = d.cum_length[i + 1] - d.cum_length[i];
    double t = seg > 0.0 ? (s - d.cum_length[i]) / seg : 0.0;
    return a + t * (b - a);
}

inline PlanePoint boundary_point(const Domain& d, double s) {
    if (const auto* disk = std::get_if<DiskDomain>(&d)) return boundary_point(*disk, s);
    if (const auto* poly = std::get_if<BoundedLipschitzDomain>(&d)) return boundary_point(*poly, s);
    if (const auto* g = std::get_if<LipschitzGraphDomain>(&d)) return {s, graph_value(*g, s)};
    throw UnsupportedDomain("halfplane boundaries have no finite parameterization");
}

inline UnitNormal boundary_normal(const DiskDomain& d, double s) {
    double th = s / d.radius;
    return {std::cos(th), std::sin(th)};
}

// Edge normal; at vertices the edge containing s in [cum_i, cum_{i+1}) wins.
inline UnitNormal boundary_normal(const BoundedLipschitzDomain& d, double s) {
    double S = d.perimeter;
    s = s - S * std::floor(s / S);
    auto it = std::upper_bound(d.cum_length.begin(), d.cum_length.end(), s);
    std::size_t i = it == d.cum_length.begin() ? 0 : static_cast<std::size_t>(it - d.cum_length.begin()) - 1;
    i = std::min(i, d.vertices.size() - 1);
    PlanePoint a = d.vertices[i], b = d.vertices[(i + 1) % d.vertices.size()];
    PlanePoint t = b - a;
    double len = norm2(t);
    return {t.y / len, -t.x / len};  // outward for a CCW chain
}

inline UnitNormal boundary_normal(const Domain& d, double s) {
    if (const auto* disk = std::get_if<DiskDomain>(&d)) return boundary_normal(*disk, s);
    if (const auto* poly = std::get_if<BoundedLipschitzDomain>(&d)) return boundary_normal(*poly, s);
    if (const auto* g = std::get_if<LipschitzGraphDomain>(&d)) return normal_from_graph(*g, s);
    throw UnsupportedDomain("halfplane boundaries have no finite parameterization");
}

// Parameter of a boundary point nearest to p (euclidean; deterministic
// tie-break toward the smaller parameter).
inline double nearest_boundary_param(const Domain& dom, PlanePoint p) {
    if (const auto* d = std::get_if<DiskDomain>(&dom)) {
        double th = std::atan2(p.y - d->center.y, p.x - d->center.x);
        if (!std::isfinite(th) || (p.x == d->center.x && p.y == d->center.y)) th = 0.0;
        if (th < 0.0) th += 2.0 * kPi;
        return th * d->radius;
    }
    if (const auto* poly = std::get_if<BoundedLipschitzDomain>(&dom)) {
        double best = std::numeric_limits<double>::infinity(), best_s = 0.0;
        std::size_t n = poly->vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            PlanePoint a = poly->vertices[i], b = poly->vertices[(i + 1) % n];
            PlanePoint ab = b - a;
            double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
            double dd = dist(p, a + t * ab);
            // Strict comparison keeps the earlier (smaller) parameter on ties.
            if (dd < best) {
                best = dd;
                best_s = poly->cum_length[i] + t * (poly->cum_length[i + 1] - poly->cum_length[i]);
            }
        }
        return best_s;
    }
    if (const auto* g = std::get_if<LipschitzGraphDomain>(&dom)) {
        double W = clip_halfwidth(*g);
        std::size_t n = g->samples.size();
        double x_first = g->x0, x_last = g->x0 + g->spacing * double(n - 1);
        double best = std::numeric_limits<double>::infinity(), best_x = 0.0;
        auto consider = [&](double x, double dd) {
            if (dd < best) { best = dd; best_x = x; }
        };
        double xl = std::clamp(std::min(p.x, x_first), -W, W);
        consider(xl, dist(p, {xl, 0.0}));
        double xr = std::clamp(std::max(p.x, x_last), -W, W);
        consider(xr, dist(p, {xr, 0.0}));
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double xa = g->x0 + g->spacing * double(i);
            double xd = std::max({xa - p.x, 0.0, p.x - (xa + g->spacing)});
            if (xd >= best) continue;
            PlanePoint a{xa, g->samples[i]};
            PlanePoint b{xa + g->spacing, g->samples[i + 1]};
            PlanePoint ab = b - a;
            double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
            consider(xa + t * g->spacing, dist(p, a + t * ab));
        }
        return std::clamp(best_x, -W, W);
    }
    throw UnsupportedDomain("halfplane boundaries have no finite parameterization");
}

// ---------------------------------------------------------------------------
// Polygon clipping (convex clip window) with exact area and centroid; used by
// the quadrature layers for straddling cells.

inline void clip_polygon_halfplane(std::vector<PlanePoint>& poly, PlanePoint a, PlanePoint n,
                                   std::vector<PlanePoint>& out) {
    // Keeps { p : dot(p - a, n) >= 0 }.
    out.clear();
    std::size_t m = poly.size();
    if (m == 0) return;
    double sp = dot(poly[m - 1] - a, n);
    PlanePoint prev = poly[m - 1];
    for (std::size_t i = 0; i < m; ++i) {
        PlanePoint cur = poly[i];
        double sc = dot(cur - a, n);
        if (sc >= 0.0) {
            if (sp < 0.0) {
                double t = sp / (sp - sc);
                out.push_back(prev + t * (cur - prev));
            }
            out.push_back(cur);
        } else if (sp >= 0.0) {
            double t = sp / (sp - sc);
            out.push_back(prev + t * (cur - prev));
        }
        prev = cur;
        sp = sc;
    }
}

inline void clip_polygon_rect(const std::vector<PlanePoint>& poly, const Rect& r,
                              std::vector<PlanePoint>& out, std::vector<PlanePoint>& scratch) {
    out.assign(poly.begin(), poly.end());
    clip_polygon_halfplane(out, {r.x0, r.y0}, {1.0, 0.0}, scratch);
    clip_polygon_halfplane(scratch, {r.x1, r.y0}, {-1.0, 0.0}, out);
    clip_polygon_halfplane(out, {r.x0, r.y0}, {0.0, 1.0}, scratch);
    clip_polygon_halfplane(scratch, {r.x0, r.y1}, {0.0, -1.0}, out);
}

struct AreaCentroid {
    double area = 0.0;
    PlanePoint centroid;
};

inline AreaCentroid polygon_area_centroid(const std::vector<PlanePoint>& poly) {
    AreaCentroid ac;
    std::size_t n = poly.size();
    if (n < 3) return ac;
    double a2 = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        PlanePoint p = poly[i], q = poly[(i + 1) % n];
        double w = cross(p, q);
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    ac.area = 0.5 * std::abs(a2);
    if (a2 != 0.0) ac.centroid = {cx / (3.0 * a2), cy / (3.0 * a2)};
    return ac;
}

}  // namespace beurlib
