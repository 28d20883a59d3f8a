#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <queue>
#include <vector>

#include "beurlib/errors.hpp"
#include "beurlib/geometry.hpp"

namespace beurlib {

// Principal-value quadrature controls. epsilon only constrains the derivative
// kernel (it must stay below the distance to the boundary); the engine removes
// the singular neighbourhood analytically, so smaller epsilon never costs
// accuracy. outer_radius = 0 lets the engine grow the truncation square until
// the tail bound drops below target_tol / 10. anchor overrides the default
// regularisation point of the unbounded-domain transform when use_anchor is
// set; it must lie outside the closed domain.
struct PVQuadratureSpec {
    double epsilon = 1e-3;
    double outer_radius = 0.0;  // 0 = automatic
    long long budget = 200000;  // minimum 1000 cell evaluations
    double target_tol = 1e-4;
    PlanePoint anchor;
    bool use_anchor = false;
};

struct TransformValue {
    Cpx value{0.0, 0.0};
    double est_error = 0.0;
    long long evals = 0;
    bool budget_exhausted = false;
};

namespace detail {

// ---------------------------------------------------------------------------
// Exact kernel integrals over rectangles.
//
// For f analytic with primitive F, Stokes gives
//     integral_R f dm = (i/2) contour_{dR} F(w) dwbar.
// Both kernels have rational or logarithmic primitives, so cells that lie
// entirely inside the domain cost eight elementary evaluations and carry no
// quadrature error at all.

// log(p) - log(q) with the imaginary part unwrapped into (-pi, pi). Valid when
// p and q are the values of a - w at the two endpoints of a straight segment
// whose interior does not pass through a: the viewing angle of a segment from
// an off-segment point is below pi.
inline Cpx logdiff(Cpx p, Cpx q) {
    double da = std::arg(p) - std::arg(q);
    if (da > kPi) da -= 2.0 * kPi;
    if (da < -kPi) da += 2.0 * kPi;
    return {0.5 * std::log(std::norm(p) / std::norm(q)), da};
}

// integral_R (a - w)^{-2} dm(w), a outside the closed rectangle.
inline Cpx exact_rect_sq(Cpx a, const Rect& r) {
    Cpx c1{r.x0, r.y0}, c2{r.x1, r.y0}, c3{r.x1, r.y1}, c4{r.x0, r.y1};
    Cpx loop = -logdiff(a - c2, a - c1) + logdiff(a - c3, a - c2) +
               logdiff(a - c3, a - c4) + logdiff(a - c1, a - c4);
    return Cpx{0.0, 0.5} * loop;
}

// integral_R (a - w)^{-3} dm(w), a outside the closed rectangle.
inline Cpx exact_rect_cu(Cpx a, const Rect& r) {
    Cpx c1{r.x0, r.y0}, c2{r.x1, r.y0}, c3{r.x1, r.y1}, c4{r.x0, r.y1};
    Cpx loop = 1.0 / (a - c2) + 1.0 / (a - c4) - 1.0 / (a - c1) - 1.0 / (a - c3);
    return Cpx{0.0, 0.5} * loop;
}

enum class KernelPower { Square, Cube };

struct EngineResult {
    Cpx integral{0.0, 0.0};
    double est = 0.0;
    long long evals = 0;
    bool exhausted = false;
};

inline double domain_scale(const Domain& dom) {
    if (const auto* d = std::get_if<DiskDomain>(&dom)) return d->radius;
    if (const auto* p = std::get_if<BoundedLipschitzDomain>(&dom)) return p->diameter;
    if (const auto* g = std::get_if<LipschitzGraphDomain>(&dom))
        return std::max(1.0, g->support_radius + graph_max_abs(*g));
    const auto& h = std::get<HalfPlaneDomain>(dom);
    return 1.0 + std::hypot(h.anchor.x, h.anchor.y);
}

inline bool is_unbounded(const Domain& dom) {
    return std::holds_alternative<HalfPlaneDomain>(dom) ||
           std::holds_alternative<LipschitzGraphDomain>(dom);
}

inline Rect bounded_bbox(const Domain& dom) {
    if (const auto* d = std::get_if<DiskDomain>(&dom))
        return {d->center.x - d->radius, d->center.y - d->radius,
                d->center.x + d->radius, d->center.y + d->radius};
    const auto& p = std::get<BoundedLipschitzDomain>(dom);
    Rect r{p.vertices[0].x, p.vertices[0].y, p.vertices[0].x, p.vertices[0].y};
    for (const auto& v : p.vertices) {
        r.x0 = std::min(r.x0, v.x);
        r.y0 = std::min(r.y0, v.y);
        r.x1 = std::max(r.x1, v.x);
        r.y1 = std::max(r.y1, v.y);
    }
    return r;
}

// Default regularisation point for the unbounded-domain transform: well below
// the boundary, independent of the evaluation point.
inline PlanePoint default_anchor(const Domain& dom) {
    if (const auto* g = std::get_if<LipschitzGraphDomain>(&dom))
        return {0.0, -1.0 - 2.0 * graph_max_abs(*g)};
    const auto& h = std::get<HalfPlaneDomain>(dom);
    double s = 1.0 + domain_scale(dom);
    return {h.anchor.x - s * h.inward_normal.nx, h.anchor.y - s * h.inward_normal.ny};
}

struct StraddleLeaf {
    Rect r;
    Cpx value{0.0, 0.0};
    double err = 0.0;
    long long seq = 0;
};

struct LeafWorse {
    bool operator()(const StraddleLeaf& a, const StraddleLeaf& b) const {
        if (a.err != b.err) return a.err < b.err;
        return a.seq < b.seq;
    }
};

struct ClipOut {
    Cpx value{0.0, 0.0};
    bool degenerate = false;
    // Bound on the integral over the lens between the secant and the true
    // boundary trace: measured sagitta times chord length times the kernel.
    double lens_bound = 0.0;
};

// Integral of the kernel over cell-and-domain for a cell the boundary
// crosses: the boundary trace is replaced by the secant through its two edge
// crossings, the clipped polygon has exact area and centroid, and the kernel
// is sampled at the centroid. Degenerate when the boundary does not separate
// the sampled corners (it then dips into the cell): falls back to the
// membership-weighted midpoint.
template <class KernelFn>
inline ClipOut secant_clip(const Domain& dom, const Rect& r, KernelFn&& k,
                           std::vector<PlanePoint>& sp, std::vector<PlanePoint>& sq) {
    PlanePoint c = r.center();
    bool cin = contains(dom, c);
    PlanePoint corners[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
    bool in[4];
    for (int i = 0; i < 4; ++i) in[i] = contains(dom, corners[i]);

    PlanePoint hits[2];
    int nh = 0;
    for (int i = 0; i < 4 && nh < 2; ++i) {
        int j = (i + 1) % 4;
        if (in[i] == in[j]) continue;
        PlanePoint a = corners[i], b = corners[j];
        for (int it = 0; it < 40; ++it) {
            PlanePoint m = 0.5 * (a + b);
            if (contains(dom, m) == in[i]) a = m; else b = m;
        }
        hits[nh++] = 0.5 * (a + b);
    }

    PlanePoint probe;
    bool have_probe = false;
    for (int i = 0; i < 4; ++i)
        if (in[i]) { probe = corners[i]; have_probe = true; break; }
    if (!have_probe && cin) { probe = c; have_probe = true; }

    PlanePoint t = nh == 2 ? hits[1] - hits[0] : PlanePoint{0.0, 0.0};
    double tl = std::hypot(t.x, t.y);
    if (nh < 2 || !have_probe || tl < 1e-13 * r.diam())
        return {cin ? r.area() * k(c) : Cpx{0.0, 0.0}, true};

    PlanePoint n{-t.y, t.x};
    if (dot(probe - hits[0], n) < 0.0) n = {-n.x, -n.y};
    sp.assign(corners, corners + 4);
    clip_polygon_halfplane(sp, hits[0], n, sq);
    AreaCentroid ac = polygon_area_centroid(sq);

    // The secant models the boundary trace as its chord, which hides the lens
    // between chord and arc. The gap against the next level hides it too when
    // a child inherits the same two crossing points, so measure the lens
    // directly: probe from the chord midpoint along the chord normal for the
    // nearest membership flip. That distance is the sagitta, and a parabolic
    // cap of that height over the chord bounds the lens area. Flat boundary
    // pieces report zero and cost nothing.
    PlanePoint mid = 0.5 * (hits[0] + hits[1]);
    PlanePoint nu{n.x / tl, n.y / tl};
    bool mem = contains(dom, mid);
    double h = r.diam();
    double sag = h;
    for (double dir : {1.0, -1.0}) {
        PlanePoint e = mid + (dir * h) * nu;
        if (contains(dom, e) == mem) continue;
        double lo = 0.0, hi = h;
        for (int it = 0; it < 40; ++it) {
            double md = 0.5 * (lo + hi);
            if (contains(dom, mid + (dir * md) * nu) == mem) lo = md; else hi = md;
        }
        sag = std::min(sag, hi);
    }
    double lens = (2.0 / 3.0) * tl * sag * std::abs(k(mid));
    return {ac.area > 0.0 ? ac.area * k(ac.centroid) : Cpx{0.0, 0.0}, false, lens};
}

// Straddle-cell value with a Richardson-style error estimate: the cell value
// is assembled from its four quadrants (exact rectangle integral for clean
// quadrants, secant clip otherwise) and compared against the one-level secant
// value of the whole cell. The gap tracks the genuine clip error, so it
// decays with the cube of the cell size near smooth boundary pieces instead
// of the first-order midpoint gap.
template <class KernelFn, class ExactFn>
inline StraddleLeaf eval_straddle(const Domain& dom, const Rect& r, KernelFn&& k, ExactFn&& exact,
                                  std::vector<PlanePoint>& sp, std::vector<PlanePoint>& sq) {
    StraddleLeaf leaf;
    leaf.r = r;
    ClipOut whole = secant_clip(dom, r, k, sp, sq);
    double penalty = 0.0;
    double mx = 0.5 * (r.x0 + r.x1);
    double my = 0.5 * (r.y0 + r.y1);
    Rect kids[4] = {{r.x0, r.y0, mx, my},
                    {mx, r.y0, r.x1, my},
                    {r.x0, my, mx, r.y1},
                    {mx, my, r.x1, r.y1}};
    Cpx sum{0.0, 0.0};
    for (const Rect& kid : kids) {
        switch (classify_rect(dom, kid)) {
            case RectClass::Outside:
                break;
            case RectClass::Inside:
                sum += exact(kid);
                break;
            case RectClass::Straddle: {
                ClipOut co = secant_clip(dom, kid, k, sp, sq);
                sum += co.value;
                if (co.degenerate) penalty += 0.5 * std::abs(k(kid.center())) * kid.area();
                penalty += co.lens_bound;
                break;
            }
        }
    }
    leaf.value = sum;
    leaf.err = std::abs(whole.value - sum) + penalty + 1e-16 * std::abs(sum);
    return leaf;
}

// Adaptive integral of (z-w)^{-2} or (z-w)^{-3} (optionally minus the same
// kernel anchored at another point) over the domain.
//
// Geometry around z: a centred exclusion square S0 with half-width a0 below
// the boundary distance, then square frames doubling outward, each split into
// twelve congruent cells. S0 lies entirely on one side of the boundary, so it
// contributes exactly zero: either the integrand vanishes on it, or the
// principal value over a centred square is zero by quarter-turn symmetry. The
// same symmetry lets whole frames inside the domain be skipped when no anchor
// term rides along. Cells inside the domain use the exact rectangle formulas;
// cells the boundary crosses go into a worst-first refinement queue.
inline EngineResult integrate_power_kernel(const Domain& dom, PlanePoint z, KernelPower kp,
                                           const PlanePoint* anchor, double raw_tol,
                                           long long budget, double outer_request) {
    const bool cube = kp == KernelPower::Cube;
    const bool unb = is_unbounded(dom);
    const bool anc = anchor != nullptr;
    const Cpx zc{z.x, z.y};
    const Cpx acx = anc ? Cpx{anchor->x, anchor->y} : Cpx{0.0, 0.0};
    const double scale = domain_scale(dom);
    const double d = dist_to_boundary(dom, z);
    const double a0 = 0.45 * d;

    auto kern = [&](PlanePoint w) -> Cpx {
        Cpx ww{w.x, w.y};
        Cpx t = cube ? 1.0 / ((zc - ww) * (zc - ww) * (zc - ww)) : 1.0 / ((zc - ww) * (zc - ww));
        if (anc)
            t -= cube ? 1.0 / ((acx - ww) * (acx - ww) * (acx - ww))
                      : 1.0 / ((acx - ww) * (acx - ww));
        return t;
    };
    auto exact_cell = [&](const Rect& r) -> Cpx {
        Cpx t = cube ? exact_rect_cu(zc, r) : exact_rect_sq(zc, r);
        if (anc) t -= cube ? exact_rect_cu(acx, r) : exact_rect_sq(acx, r);
        return t;
    };

    int frames = 0;
    double tail = 0.0;
    if (!unb) {
        Rect bb = bounded_bbox(dom);
        double reach = std::max({std::abs(bb.x0 - z.x), std::abs(bb.x1 - z.x),
                                 std::abs(bb.y0 - z.y), std::abs(bb.y1 - z.y)});
        frames = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(reach / a0, 1.0)))));
    } else {
        // Truncating at the outer square |w - z|_inf = aM leaves a tail bounded
        // by tail_const / aM: the cube kernel is absolutely integrable, the
        // anchored difference decays like |z - anchor| |w|^{-3}, and for the
        // plain square kernel the quarter-turn symmetry of the truncation
        // square cancels the oscillatory mode, leaving the boundary-offset
        // residue.
        double zmag = std::hypot(z.x, z.y);
        double tail_const = cube ? 8.0 * kPi
                                 : (anc ? 16.0 * kPi * std::abs(zc - acx)
                                        : 16.0 * kPi * (zmag + scale + 1.0));
        double need = tail_const / (0.1 * raw_tol);
        double am_req = std::max({outer_request, need, 4.0 * (zmag + scale + 1.0), 8.0 * a0});
        frames = static_cast<int>(std::ceil(std::log2(am_req / a0)));
        frames = std::clamp(frames, 1, 52);
        tail = tail_const / (a0 * std::ldexp(1.0, frames));
    }

    EngineResult out;
    double noise = 0.0;
    Cpx exact_sum{0.0, 0.0};
    Cpx frozen_sum{0.0, 0.0};
    double frozen_err = 0.0;
    Cpx leaf_sum{0.0, 0.0};
    double leaf_err = 0.0;
    std::priority_queue<StraddleLeaf, std::vector<StraddleLeaf>, LeafWorse> queue;
    long long seq = 0;
    std::vector<PlanePoint> sp, sq;
    const double min_side = 1e-12 * a0;

    static const int kOff[12][2] = {{-2, -2}, {-1, -2}, {0, -2}, {1, -2}, {-2, 1}, {-1, 1},
                                    {0, 1},   {1, 1},   {-2, -1}, {-2, 0}, {1, -1}, {1, 0}};

    auto handle_cell = [&](const Rect& r) {
        ++out.evals;
        switch (classify_rect(dom, r)) {
            case RectClass::Outside:
                break;
            case RectClass::Inside: {
                Cpx e = exact_cell(r);
                exact_sum += e;
                noise += 5e-16 * std::abs(e);
                break;
            }
            case RectClass::Straddle: {
                StraddleLeaf leaf = eval_straddle(dom, r, kern, exact_cell, sp, sq);
                leaf.seq = seq++;
                leaf_sum += leaf.value;
                leaf_err += leaf.err;
                queue.push(leaf);
                break;
            }
        }
    };

    // Quarter-turn symmetry zeroes the principal value of the plain kernel
    // over the centred exclusion square, but the anchor term is not centred
    // at z and must still be integrated over it when the square sits inside
    // the domain.
    if (anc && contains(dom, z)) {
        Rect s0{z.x - a0, z.y - a0, z.x + a0, z.y + a0};
        Cpx e = cube ? exact_rect_cu(acx, s0) : exact_rect_sq(acx, s0);
        exact_sum -= e;
        noise += 5e-16 * std::abs(e);
    }

    for (int m = 0; m < frames; ++m) {
        double a = a0 * std::ldexp(1.0, m);
        Rect outer{z.x - 2.0 * a, z.y - 2.0 * a, z.x + 2.0 * a, z.y + 2.0 * a};
        RectClass oc = classify_rect(dom, outer);
        if (oc == RectClass::Outside) continue;
        if (oc == RectClass::Inside && !anc) continue;  // exact zero by symmetry
        for (const auto& off : kOff) {
            Rect r{z.x + off[0] * a, z.y + off[1] * a, z.x + (off[0] + 1) * a,
                   z.y + (off[1] + 1) * a};
            handle_cell(r);
        }
    }

    while (!queue.empty()) {
        if (1.5 * (leaf_err + frozen_err) <= 0.5 * raw_tol) break;
        if (out.evals + 4 > budget) {
            out.exhausted = true;
            break;
        }
        StraddleLeaf top = queue.top();
        queue.pop();
        leaf_sum -= top.value;
        leaf_err -= top.err;
        if (top.r.width() < min_side) {
            frozen_sum += top.value;
            frozen_err += top.err;
            continue;
        }
        double mx = 0.5 * (top.r.x0 + top.r.x1);
        double my = 0.5 * (top.r.y0 + top.r.y1);
        Rect kids[4] = {{top.r.x0, top.r.y0, mx, my},
                        {mx, top.r.y0, top.r.x1, my},
                        {top.r.x0, my, mx, top.r.y1},
                        {mx, my, top.r.x1, top.r.y1}};
        for (const Rect& r : kids) handle_cell(r);
    }

    out.integral = exact_sum + frozen_sum + leaf_sum;
    out.est = 1.5 * (leaf_err + frozen_err) + noise + tail;
    return out;
}

inline void check_spec(const PVQuadratureSpec& spec) {
    if (!(spec.epsilon > 0.0)) throw DegenerateInput("epsilon must be positive");
    if (!(spec.target_tol > 0.0)) throw DegenerateInput("target_tol must be positive");
    if (spec.budget < 1000) throw DegenerateInput("budget below the 1000-evaluation floor");
    if (spec.outer_radius != 0.0 && spec.outer_radius <= spec.epsilon)
        throw DegenerateInput("outer radius must exceed epsilon");
}

inline double boundary_tol(const Domain& dom, PlanePoint z) {
    return 1e-12 * std::max({domain_scale(dom), std::hypot(z.x, z.y), 1.0});
}

inline double checked_distance(const Domain& dom, PlanePoint z) {
    double d = dist_to_boundary(dom, z);
    if (d <= boundary_tol(dom, z)) throw OnBoundary("evaluation point on the boundary");
    return d;
}

inline PlanePoint resolve_anchor(const Domain& dom, const PVQuadratureSpec& spec) {
    if (!spec.use_anchor) return default_anchor(dom);
    PlanePoint a = spec.anchor;
    if (contains(dom, a) || dist_to_boundary(dom, a) <= boundary_tol(dom, a))
        throw DegenerateInput("anchor must lie outside the closed domain");
    return a;
}

}  // namespace detail

// Transform of the disk indicator in closed form: zero inside, and outside a
// single negative power of z - center scaled by the squared radius.
inline Cpx beurling_disk(const DiskDomain& d, PlanePoint z) {
    double r = dist(z, d.center);
    if (std::abs(r - d.radius) <= 1e-12 * std::max(d.radius, r))
        throw OnBoundary("evaluation point on the circle");
    if (r < d.radius) return {0.0, 0.0};
    Cpx dz{z.x - d.center.x, z.y - d.center.y};
    return -d.radius * d.radius / (kPi * dz * dz);
}

// Principal-value transform of the domain indicator. Bounded domains use the
// plain normalised kernel integral; unbounded ones subtract the same kernel at
// an anchor outside the closure, which makes the integrand absolutely
// integrable (values then depend on the anchor, differences do not).
inline TransformValue pv_beurling(const Domain& dom, PlanePoint z,
                                  const PVQuadratureSpec& spec = {}) {
    detail::check_spec(spec);
    detail::checked_distance(dom, z);
    const double raw_tol = kPi * kPi * spec.target_tol;
    detail::EngineResult er;
    if (detail::is_unbounded(dom)) {
        PlanePoint anchor = detail::resolve_anchor(dom, spec);
        er = detail::integrate_power_kernel(dom, z, detail::KernelPower::Square, &anchor,
                                            raw_tol, spec.budget, spec.outer_radius);
    } else {
        er = detail::integrate_power_kernel(dom, z, detail::KernelPower::Square, nullptr,
                                            raw_tol, spec.budget, spec.outer_radius);
    }
    const double c = 1.0 / (kPi * kPi);
    return {-c * er.integral, c * er.est, er.evals, er.exhausted};
}

// Derivative of the transform along the domain parameter direction, computed
// from the cube kernel. epsilon must stay below the boundary distance; the
// value is epsilon-independent because the kernel integrates to zero over any
// annulus centred at z, and the engine exploits exactly that cancellation.
inline TransformValue d_beurling(const Domain& dom, PlanePoint z,
                                 const PVQuadratureSpec& spec = {}) {
    detail::check_spec(spec);
    double d = detail::checked_distance(dom, z);
    if (spec.epsilon >= d)
        throw EpsilonTooLarge("epsilon reaches the boundary of the domain");
    const double raw_tol = 0.5 * kPi * kPi * spec.target_tol;
    detail::EngineResult er = detail::integrate_power_kernel(
        dom, z, detail::KernelPower::Cube, nullptr, raw_tol, spec.budget, spec.outer_radius);
    const double c = 2.0 / (kPi * kPi);
    return {c * er.integral, c * er.est, er.evals, er.exhausted};
}

// Difference of transform values at two interior points. Anchor-free: the two
// evaluations share one truncation scale, so the regularising terms cancel
// exactly for bounded domains and up to the reported tail for unbounded ones.
inline TransformValue beurling_difference(const Domain& dom, PlanePoint x, PlanePoint y,
                                          const PVQuadratureSpec& spec = {}) {
    detail::check_spec(spec);
    detail::checked_distance(dom, x);
    detail::checked_distance(dom, y);
    if (x.x == y.x && x.y == y.y) return {Cpx{0.0, 0.0}, 0.0, 0, false};
    const double raw_tol = 0.5 * kPi * kPi * spec.target_tol;
    double outer = spec.outer_radius;
    if (detail::is_unbounded(dom)) {
        // Force a shared truncation scale covering both evaluation points.
        double zmag = std::max(std::hypot(x.x, x.y), std::hypot(y.x, y.y));
        double tail_const = 16.0 * kPi * (zmag + detail::domain_scale(dom) + 1.0);
        outer = std::max(outer, tail_const / (0.1 * raw_tol));
    }
    detail::EngineResult ex = detail::integrate_power_kernel(
        dom, x, detail::KernelPower::Square, nullptr, raw_tol, spec.budget, outer);
    detail::EngineResult ey = detail::integrate_power_kernel(
        dom, y, detail::KernelPower::Square, nullptr, raw_tol, spec.budget, outer);
    const double c = 1.0 / (kPi * kPi);
    return {-c * (ex.integral - ey.integral), c * (ex.est + ey.est), ex.evals + ey.evals,
            ex.exhausted || ey.exhausted};
}

}  // namespace beurlib
