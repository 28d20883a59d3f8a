#pragma once

// Reference LP solver for weighted L1 affine regression, used only to
// cross-check the pair-enumeration fit. Solves
//   min sum w_i (p_i + q_i)  s.t.  a x_i + b + p_i - q_i = u_i,  p, q >= 0
// with a and b split into nonnegative parts, by dense tableau simplex with
// Bland's rule. Sized for test instances (n up to a few hundred).

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace lp_oracle {

struct Result {
    double slope = 0.0;
    double intercept = 0.0;
    double objective = 0.0;
};

inline Result l1_affine_lp(const std::vector<double>& xs, const std::vector<double>& us,
                           const std::vector<double>& ws) {
    std::size_t n = xs.size();
    std::size_t nv = 4 + 2 * n;  // a+, a-, b+, b-, p_i, q_i
    std::vector<double> cost(nv, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cost[4 + i] = ws[i];
        cost[4 + n + i] = ws[i];
    }
    // Tableau rows: one per sample, columns nv + 1 with RHS last.
    std::vector<std::vector<double>> T(n, std::vector<double>(nv + 1, 0.0));
    std::vector<std::size_t> basis(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Rows with negative RHS are stored pre-negated so the starting basis
        // (p_i or q_i by residual sign) is a unit column with RHS >= 0.
        double sgn = us[i] >= 0.0 ? 1.0 : -1.0;
        T[i][0] = sgn * xs[i];
        T[i][1] = -sgn * xs[i];
        T[i][2] = sgn;
        T[i][3] = -sgn;
        T[i][4 + i] = sgn;
        T[i][4 + n + i] = -sgn;
        T[i][nv] = sgn * us[i];
        basis[i] = us[i] >= 0.0 ? 4 + i : 4 + n + i;
    }
    std::vector<double> red(nv + 1);
    for (long iter = 0; iter < 200000; ++iter) {
        for (std::size_t j = 0; j <= nv; ++j) red[j] = j < nv ? cost[j] : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= nv; ++j) red[j] -= cb * T[i][j];
        }
        std::size_t enter = nv;
        for (std::size_t j = 0; j < nv; ++j)
            if (red[j] < -1e-11) { enter = j; break; }  // Bland: first improving column
        if (enter == nv) {
            Result r;
            r.objective = -red[nv];
            for (std::size_t i = 0; i < n; ++i) {
                if (basis[i] == 0) r.slope += T[i][nv];
                if (basis[i] == 1) r.slope -= T[i][nv];
                if (basis[i] == 2) r.intercept += T[i][nv];
                if (basis[i] == 3) r.intercept -= T[i][nv];
            }
            return r;
        }
        std::size_t leave = n;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (T[i][enter] <= 1e-11) continue;
            double ratio = T[i][nv] / T[i][enter];
            if (leave == n || ratio < best - 1e-13 ||
                (ratio < best + 1e-13 && basis[i] < basis[leave]))
            { best = ratio; leave = i; }
        }
        if (leave == n) throw std::runtime_error("l1_affine_lp: unbounded");
        double piv = T[leave][enter];
        for (std::size_t j = 0; j <= nv; ++j) T[leave][j] /= piv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == leave || T[i][enter] == 0.0) continue;
            double f = T[i][enter];
            for (std::size_t j = 0; j <= nv; ++j) T[i][j] -= f * T[leave][j];
        }
        basis[leave] = enter;
    }
    throw std::runtime_error("l1_affine_lp: iteration cap hit");
}

}  // namespace lp_oracle
