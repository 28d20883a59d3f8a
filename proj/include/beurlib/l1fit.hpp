#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "beurlib/errors.hpp"
#include "beurlib/geometry.hpp"

namespace beurlib {

// Exact integral of |v| where v is piecewise linear through (xs[i], vs[i]);
// sign changes inside a cell are split at the root.
// Piecewise linear interpolation through nodes (xs, vs), xs strictly
// increasing; constant beyond the end nodes.
inline double pl_value(const std::vector<double>& xs, const std::vector<double>& vs, double x) {
    if (x <= xs.front()) return vs.front();
    if (x >= xs.back()) return vs.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    double h = xs[i + 1] - xs[i];
    double t = h > 0.0 ? (x - xs[i]) / h : 0.0;
    return vs[i] + t * (vs[i + 1] - vs[i]);
}

inline double integrate_abs_pl(const std::vector<double>& xs, const std::vector<double>& vs) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        double h = xs[i + 1] - xs[i];
        double a = vs[i], b = vs[i + 1];
        if (h <= 0.0) continue;
        if ((a >= 0.0) == (b >= 0.0)) {
            acc += 0.5 * h * (std::abs(a) + std::abs(b));
        } else {
            double t = a / (a - b);  // root position in [0,1]
            acc += 0.5 * h * (t * std::abs(a) + (1.0 - t) * std::abs(b));
        }
    }
    return acc;
}

// Minimizer over t of the exact integral of |v(x) - t| for piecewise-linear v;
// t is the median of the value distribution under Lebesgue measure on x.
inline double pl_median(const std::vector<double>& xs, const std::vector<double>& vs) {
    double total = xs.back() - xs.front();
    if (!(total > 0.0)) return vs.empty() ? 0.0 : vs.front();
    auto measure_below = [&](double t) {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            double h = xs[i + 1] - xs[i];
            double lo = std::min(vs[i], vs[i + 1]), hi = std::max(vs[i], vs[i + 1]);
            if (t >= hi) m += h;
            else if (t > lo && hi > lo) m += h * (t - lo) / (hi - lo);
        }
        return m;
    };
    std::vector<double> breaks(vs);
    std::sort(breaks.begin(), breaks.end());
    double half = 0.5 * total;
    // Find the straddling break interval, then solve linearly inside it.
    std::size_t lo = 0, hi = breaks.size() - 1;
    if (measure_below(breaks[lo]) >= half) return breaks[lo];
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (measure_below(breaks[mid]) >= half) hi = mid; else lo = mid;
    }
    double t0 = breaks[lo], t1 = breaks[hi];
    double m0 = measure_below(t0), m1 = measure_below(t1);
    if (m1 <= m0) return t1;
    return t0 + (half - m0) / (m1 - m0) * (t1 - t0);
}

inline double discrete_weighted_median(std::vector<double> vals, std::vector<double> ws) {
    std::vector<std::size_t> idx(vals.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    double total = std::accumulate(ws.begin(), ws.end(), 0.0);
    double acc = 0.0;
    for (std::size_t k : idx) {
        acc += ws[k];
        if (acc >= 0.5 * total) return vals[k];
    }
    return vals[idx.back()];
}

struct AffineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double l1_residual = 0.0;
};

inline double affine_residual(const std::vector<double>& xs, const std::vector<double>& us,
                              const std::vector<double>& ws, double a, double b) {
    double r = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) r += ws[i] * std::abs(us[i] - (a * xs[i] + b));
    return r;
}

// Weighted discrete L1 affine fit. An optimal fit interpolates at least two
// samples with distinct x, so exhaustive pair enumeration is exact; ties break
// toward the first pair in (i, j) order. O(n^3).
inline AffineFit affine_l1_fit(const std::vector<double>& xs, const std::vector<double>& us,
                               const std::vector<double>& ws) {
    std::size_t n = xs.size();
    if (n < 2 || us.size() != n || ws.size() != n)
        throw DegenerateInput("affine fit needs matching sample/weight arrays with n >= 2");
    for (double w : ws)
        if (!(w > 0.0)) throw DegenerateInput("affine fit weights must be positive");
    double xmin = *std::min_element(xs.begin(), xs.end());
    double xmax = *std::max_element(xs.begin(), xs.end());
    if (xmin == xmax) throw DegenerateInput("affine fit needs two distinct x values");
    AffineFit best;
    bool have = false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (xs[i] == xs[j]) continue;
            double a = (us[j] - us[i]) / (xs[j] - xs[i]);
            double b = us[i] - a * xs[i];
            double r = affine_residual(xs, us, ws, a, b);
            if (!have || r < best.l1_residual * (1.0 - 1e-14)) {
                best = {a, b, r};
                have = true;
            }
        }
    }
    return best;
}

// Continuum L1 affine fit to the piecewise-linear interpolant of (xs, vs):
// minimizes the exact integral of |f - (a x + b)|. Convex in (a, b); solved by
// golden section on the slope with an exact median intercept per slope.
inline AffineFit affine_l1_fit_pl(const std::vector<double>& xs, const std::vector<double>& vs) {
    std::size_t n = xs.size();
    if (n < 2) throw DegenerateInput("continuum affine fit needs at least two nodes");
    double a_lo = 0.0, a_hi = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double h = xs[i + 1] - xs[i];
        if (h <= 0.0) continue;
        double s = (vs[i + 1] - vs[i]) / h;
        a_lo = std::min(a_lo, s);
        a_hi = std::max(a_hi, s);
    }
    double pad = 0.125 * (a_hi - a_lo) + 1e-12;
    a_lo -= pad;
    a_hi += pad;
    std::vector<double> resid(n);
    auto eval = [&](double a, double* b_out) {
        for (std::size_t i = 0; i < n; ++i) resid[i] = vs[i] - a * xs[i];
        double b = pl_median(xs, resid);
        for (std::size_t i = 0; i < n; ++i) resid[i] -= b;
        if (b_out) *b_out = b;
        return integrate_abs_pl(xs, resid);
    };
    const double gr = 0.6180339887498949;
    double a1 = a_hi - gr * (a_hi - a_lo), a2 = a_lo + gr * (a_hi - a_lo);
    double f1 = eval(a1, nullptr), f2 = eval(a2, nullptr);
    for (int it = 0; it < 120 && a_hi - a_lo > 1e-13 * (1.0 + std::abs(a_lo) + std::abs(a_hi)); ++it) {
        if (f1 <= f2) {
            a_hi = a2; a2 = a1; f2 = f1;
            a1 = a_hi - gr * (a_hi - a_lo);
            f1 = eval(a1, nullptr);
        } else {
            a_lo = a1; a1 = a2; f1 = f2;
            a2 = a_lo + gr * (a_hi - a_lo);
            f2 = eval(a2, nullptr);
        }
    }
    AffineFit fit;
    fit.slope = 0.5 * (a_lo + a_hi);
    fit.l1_residual = eval(fit.slope, &fit.intercept);
    return fit;
}

struct LineFit {
    PlanePoint point;       // a point on the line
    PlanePoint tangent;     // unit direction
    double l1_residual = 0.0;
};

inline double dist_to_line(PlanePoint p, const LineFit& L) {
    return std::abs(cross(p - L.point, L.tangent));
}

// L1 fit of a line to a polyline given by arclength nodes ss and points ps:
// minimizes the exact integral over s of |<x(s), n> - t| (piecewise linear in
// s for fixed direction). Angular grid plus two golden-section passes.
inline LineFit line_l1_fit_pl(const std::vector<double>& ss, const std::vector<PlanePoint>& ps,
                              int angular_grid = 256) {
    std::size_t n = ps.size();
    if (n < 2) throw DegenerateArc("line fit needs at least two nodes");
    std::vector<double> u(n);
    auto eval = [&](double theta, double* t_out) {
        double cn = std::cos(theta), sn = std::sin(theta);
        for (std::size_t i = 0; i < n; ++i) u[i] = ps[i].x * cn + ps[i].y * sn;
        double t = pl_median(ss, u);
        for (std::size_t i = 0; i < n; ++i) u[i] -= t;
        if (t_out) *t_out = t;
        return integrate_abs_pl(ss, u);
    };
    double best_theta = 0.0, best_val = eval(0.0, nullptr);
    for (int k = 1; k < angular_grid; ++k) {
        double th = kPi * double(k) / double(angular_grid);
        double v = eval(th, nullptr);
        if (v < best_val * (1.0 - 1e-14)) { best_val = v; best_theta = th; }
    }
    double span = kPi / double(angular_grid);
    const double gr = 0.6180339887498949;
    for (int pass = 0; pass < 2; ++pass) {
        double lo = best_theta - span, hi = best_theta + span;
        double t1 = hi - gr * (hi - lo), t2 = lo + gr * (hi - lo);
        double f1 = eval(t1, nullptr), f2 = eval(t2, nullptr);
        for (int it = 0; it < 60; ++it) {
            if (f1 <= f2) {
                hi = t2; t2 = t1; f2 = f1;
                t1 = hi - gr * (hi - lo);
                f1 = eval(t1, nullptr);
            } else {
                lo = t1; t1 = t2; f1 = f2;
                t2 = lo + gr * (hi - lo);
                f2 = eval(t2, nullptr);
            }
        }
        best_theta = 0.5 * (lo + hi);
        span *= 0.01;
    }
    double t_opt = 0.0;
    double val = eval(best_theta, &t_opt);
    LineFit fit;
    double cn = std::cos(best_theta), sn = std::sin(best_theta);
    fit.point = {t_opt * cn, t_opt * sn};
    fit.tangent = {-sn, cn};
    fit.l1_residual = val;
    return fit;
}

}  // namespace beurlib
