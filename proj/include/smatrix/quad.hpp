#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "smatrix/types.hpp"

namespace smx {

struct QuadConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;
    double tail_cutoff_tol = 1e-14;
};

using CplxFn = std::function<Cplx(double)>;

namespace detail {

// Gauss-Kronrod 15(7) nodes and weights on [-1, 1] (positive half).
inline constexpr double gk_x[8] = {
    0.99145537112081263920685469752633, 0.94910791234275852452618968404785,
    0.86486442335976907278971278864093, 0.74153118559939443986386477328079,
    0.58608723546769113029414483825873, 0.40584515137739716690660641207696,
    0.20778495500789846760068940377324, 0.0};
inline constexpr double gk_wk[8] = {
    0.02293532201052922496373200805897, 0.06309209262997855329070066318921,
    0.10479001032225018383987632254152, 0.14065325971552591874518959051024,
    0.16900472663926790282658342659855, 0.19035057806478540991325640242101,
    0.20443294007529889241416199923465, 0.20948214108472782801299917489171};
inline constexpr double gk_wg[4] = {
    0.12948496616886969327061143267908, 0.27970539148927666790146777142378,
    0.38183005050511894495036977548898, 0.41795918367346938775510204081633};

struct PanelResult {
    Cplx value;
    double err;
};

inline PanelResult gk15(const CplxFn& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const Cplx fc = f(c);
    Cplx kron = gk_wk[7] * fc;
    Cplx gauss = gk_wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const Cplx fp = f(c + h * gk_x[j]);
        const Cplx fm = f(c - h * gk_x[j]);
        kron += gk_wk[j] * (fp + fm);
        if (j % 2 == 1) gauss += gk_wg[j / 2] * (fp + fm);
    }
    kron *= h;
    gauss *= h;
    return {kron, std::abs(kron - gauss)};
}

struct AdaptiveState {
    int splits_left;
};

inline Cplx adapt(const CplxFn& f, double lo, double hi, double tol, AdaptiveState& st) {
    PanelResult r = gk15(f, lo, hi);
    if (r.err <= tol || hi - lo < 1e-14 * (1.0 + std::abs(lo) + std::abs(hi))) return r.value;
    if (st.splits_left-- <= 0) throw ToleranceNotMet("integrate_finite: subdivision budget exhausted");
    const double mid = 0.5 * (lo + hi);
    return adapt(f, lo, mid, 0.5 * tol, st) + adapt(f, mid, hi, 0.5 * tol, st);
}

}  // namespace detail

// Adaptive complex-valued quadrature on [lo, hi]. Supplied breakpoints become
// mandatory panel boundaries (jump points of piecewise-analytic integrands).
inline Cplx integrate_finite(const CplxFn& f, double lo, double hi, const QuadConfig& cfg = {},
                             const std::vector<double>& breakpoints = {}) {
    if (hi == lo) return Cplx{0.0, 0.0};
    double sign = 1.0;
    if (hi < lo) {
        std::swap(lo, hi);
        sign = -1.0;
    }
    std::vector<double> pts{lo};
    for (double b : breakpoints)
        if (b > lo && b < hi) pts.push_back(b);
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());

    // First pass for the magnitude that drives the relative tolerance.
    Cplx rough{0.0, 0.0};
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) rough += detail::gk15(f, pts[k], pts[k + 1]).value;
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(rough));

    detail::AdaptiveState st{cfg.max_subdivisions};
    Cplx total{0.0, 0.0};
    const double span = hi - lo;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double frac = (pts[k + 1] - pts[k]) / span;
        total += detail::adapt(f, pts[k], pts[k + 1], tol * std::max(frac, 0.05), st);
    }
    return sign * total;
}

// Truncation point for integrands bounded by C e^{-decay_rate x}.
inline double halfline_cutoff(double decay_rate, const QuadConfig& cfg = {}) {
    if (!(decay_rate > 0.0)) throw NonDecaying("integrate_halfline: decay_rate must be positive");
    return std::log(1.0 / cfg.tail_cutoff_tol) / decay_rate;
}

inline Cplx integrate_halfline(const CplxFn& f, double decay_rate, const QuadConfig& cfg = {},
                               const std::vector<double>& breakpoints = {}) {
    const double xstar = halfline_cutoff(decay_rate, cfg);
    return integrate_finite(f, 0.0, xstar, cfg, breakpoints);
}

struct DerivResult {
    Cplx value;
    double err;
};

// Central difference in the real direction with Richardson extrapolation.
inline DerivResult complex_derivative(const std::function<Cplx(Cplx)>& f, Cplx z,
                                      const QuadConfig& cfg = {}) {
    (void)cfg;
    constexpr int levels = 8;
    Cplx table[levels][levels];
    double h = 5e-3 * (1.0 + std::abs(z));
    Cplx best{0.0, 0.0};
    double best_err = std::numeric_limits<double>::infinity();
    for (int k = 0; k < levels; ++k) {
        table[k][0] = (f(z + h) - f(z - h)) / (2.0 * h);
        double p4 = 4.0;
        for (int j = 1; j <= k; ++j) {
            table[k][j] = (p4 * table[k][j - 1] - table[k - 1][j - 1]) / (p4 - 1.0);
            p4 *= 4.0;
        }
        if (k > 0) {
            const double err = std::abs(table[k][k] - table[k - 1][k - 1]);
            if (err < best_err) {
                best_err = err;
                best = table[k][k];
            } else if (err > 32.0 * best_err) {
                break;  // noise floor reached
            }
        }
        h *= 0.5;
    }
    if (!std::isfinite(best_err))
        throw NonConvergent("complex_derivative: Richardson extrapolation stalled");
    return {best, best_err};
}

}  // namespace smx
