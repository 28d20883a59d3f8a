#pragma once

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "beurlib/arcs.hpp"
#include "beurlib/errors.hpp"
#include "beurlib/geometry.hpp"
#include "beurlib/l1fit.hpp"
#include "beurlib/maps.hpp"

namespace beurlib {

// Flatness coefficient of a function over an interval or of a boundary curve
// over an arc: best L1 affine (resp. line) residual over the tripled window,
// divided by the square of the base length.
struct Beta1Result {
    double value = 0.0;
    double window_a = 0.0;  // tripled window actually used, in x or in
    double window_b = 0.0;  // boundary parameter
    std::variant<AffineFit, LineFit> fit;
};

namespace detail {

// Piecewise linear f restricted to [wa, wb]: interior knots plus exactly
// interpolated endpoint values. Knots within 1e-12*(wb-wa) of an endpoint
// are absorbed into it so node abscissae stay strictly increasing.
inline void crop_pl(const std::vector<double>& xs, const std::vector<double>& vs, double wa,
                    double wb, std::vector<double>& cx, std::vector<double>& cv) {
    double tol = 1e-12 * (wb - wa);
    cx.clear();
    cv.clear();
    cx.push_back(wa);
    cv.push_back(pl_value(xs, vs, wa));
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] > wa + tol && xs[i] < wb - tol) {
            cx.push_back(xs[i]);
            cv.push_back(vs[i]);
        }
    cx.push_back(wb);
    cv.push_back(pl_value(xs, vs, wb));
}

// beta_1 over an explicit window, no sample-count guard: used by the dyadic
// sums where fine windows legitimately see locally affine data.
inline Beta1Result beta1_function_window(const std::vector<double>& xs,
                                         const std::vector<double>& vs, double wa, double wb,
                                         double base_len) {
    std::vector<double> cx, cv;
    crop_pl(xs, vs, wa, wb, cx, cv);
    AffineFit fit = affine_l1_fit_pl(cx, cv);
    Beta1Result r;
    r.value = fit.l1_residual / (base_len * base_len);
    r.window_a = wa;
    r.window_b = wb;
    r.fit = fit;
    return r;
}

}  // namespace detail

// beta_1(f, I) for piecewise linear f given by nodes (xs, vs) and the
// interval I = [lo, hi): L1 residual of the best affine fit over the
// concentric tripled interval, divided by (hi - lo)^2. The integral is exact
// for the piecewise linear data. The tripled window must stay inside the
// sampled support (extend the samples by zero first when the model calls for
// it) and must hold at least 16 nodes so the data resolves the window.
inline Beta1Result beta1_function(const std::vector<double>& xs, const std::vector<double>& vs,
                                  double lo, double hi) {
    if (xs.size() < 2 || xs.size() != vs.size())
        throw DegenerateInput("piecewise linear data needs matching node arrays of size >= 2");
    if (!(hi > lo)) throw DegenerateInput("interval must have positive length");
    double len = hi - lo;
    double c = 0.5 * (lo + hi);
    double wa = c - 1.5 * len, wb = c + 1.5 * len;
    if (wa < xs.front() - 1e-12 * len || wb > xs.back() + 1e-12 * len)
        throw WindowOutOfRange("tripled interval escapes the sampled support");
    std::size_t inside = 0;
    for (double x : xs)
        if (x >= wa && x <= wb) ++inside;
    if (inside < 16) throw DegenerateInput("tripled interval holds fewer than 16 sample nodes");
    return detail::beta1_function_window(xs, vs, wa, wb, len);
}

// beta_1 of the boundary over an arc P: best L1 line residual over the
// concentric tripled arc, divided by l(P)^2. The tripled arc is sampled
// parameter-uniformly and integrated as a polyline, exact in the piecewise
// linear sense; on closed boundaries the window wraps and is capped at one
// full revolution. Integrals are taken in the boundary parameter, which is
// arclength for closed curves and the x-coordinate for graphs.
inline Beta1Result beta1_curve(const Domain& dom, const BoundaryArc& p, int nodes = 257,
                               int angular_grid = 256) {
    double lp = length(p);
    if (!(lp > 0.0)) throw DegenerateArc("arc must have positive length");
    if (nodes < 16) throw DegenerateInput("tripled arc needs at least 16 sample nodes");
    double mid = 0.5 * (p.a + p.b);
    double half = 1.5 * lp;
    if (boundary_closed(dom)) half = std::min(half, 0.5 * boundary_param_length(dom));
    double wa = mid - half, wb = mid + half;
    std::vector<double> ss(nodes);
    std::vector<PlanePoint> ts(nodes);
    for (int i = 0; i < nodes; ++i) {
        double s = wa + (wb - wa) * double(i) / double(nodes - 1);
        ss[i] = s;
        ts[i] = boundary_point(dom, s);
    }
    LineFit fit = line_l1_fit_pl(ss, ts, angular_grid);
    Beta1Result r;
    r.value = fit.l1_residual / (lp * lp);
    r.window_a = wa;
    r.window_b = wb;
    r.fit = fit;
    return r;
}

// Multiscale flatness sum for a function: over dyadic intervals
// I = [k 2^{-j}, (k+1) 2^{-j}) with j in the window, accumulate
// (beta_1(f, I) / l(I)^(alpha-1))^p * l(I). When the sampled end values
// vanish, f continues by zero beyond its sampled range (the compactly
// supported model) and every tripled window is covered; intervals whose
// tripled window misses the support contribute nothing. Data with nonzero
// ends admits no zero continuation, so there the sum runs only over
// intervals whose tripled window the samples cover.
inline double dorronsoro_sum_function(const std::vector<double>& xs,
                                      const std::vector<double>& vs, double alpha, double p,
                                      ScaleWindow window) {
    if (!(alpha >= 1.0 && alpha < 2.0)) throw BadExponents("alpha must lie in [1, 2)");
    if (!(p >= 1.0)) throw BadExponents("p must be at least 1");
    if (window.j_lo > window.j_hi) throw WindowOutOfRange("empty scale window");
    if (xs.size() < 2 || xs.size() != vs.size())
        throw DegenerateInput("piecewise linear data needs matching node arrays of size >= 2");

    bool zero_ends = vs.front() == 0.0 && vs.back() == 0.0;
    double lmax = dyadic_len(window.j_lo);
    std::vector<double> ex, ev;
    ex.reserve(xs.size() + 2);
    ev.reserve(vs.size() + 2);
    if (zero_ends) {
        ex.push_back(xs.front() - 5.0 * lmax);
        ev.push_back(0.0);
    }
    ex.insert(ex.end(), xs.begin(), xs.end());
    ev.insert(ev.end(), vs.begin(), vs.end());
    if (zero_ends) {
        ex.push_back(xs.back() + 5.0 * lmax);
        ev.push_back(0.0);
    }

    double x0 = xs.front(), x1 = xs.back();
    double sum = 0.0;
    for (int j = window.j_lo; j <= window.j_hi; ++j) {
        double l = dyadic_len(j);
        long long k_lo = static_cast<long long>(std::floor(x0 / l)) - 2;
        long long k_hi = static_cast<long long>(std::floor(x1 / l)) + 1;
        for (long long k = k_lo; k <= k_hi; ++k) {
            double wa = double(k) * l - l;
            double wb = double(k + 1) * l + l;
            if (!zero_ends && (wa < x0 - 1e-12 * l || wb > x1 + 1e-12 * l)) continue;
            Beta1Result b = detail::beta1_function_window(ex, ev, wa, wb, l);
            if (b.value > 0.0) sum += std::pow(b.value / std::pow(l, alpha - 1.0), p) * l;
        }
    }
    return sum;
}

// Multiscale flatness sum for a boundary: over every arc P in the hierarchy,
// accumulate (beta_1(boundary, P) / l(P)^alpha)^p * l(P). Arcs are visited in
// key order, so the reduction is deterministic.
inline double dorronsoro_sum_curve(const Domain& dom, const ArcHierarchy& h, double alpha,
                                   double p, int nodes = 129) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw BadExponents("alpha must lie in (0, 1)");
    if (!(p >= 1.0)) throw BadExponents("p must be at least 1");
    double sum = 0.0;
    for (const BoundaryArc& arc : h.arcs) {
        double beta = beta1_curve(dom, arc, nodes).value;
        if (beta > 0.0) sum += std::pow(beta / std::pow(length(arc), alpha), p) * length(arc);
    }
    return sum;
}

}  // namespace beurlib
