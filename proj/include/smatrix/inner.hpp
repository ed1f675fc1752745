#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "smatrix/quad.hpp"
#include "smatrix/types.hpp"

namespace smx {

// Inner function of H^inf(C+): constant one, the shift symbol e^{i delta rho},
// or a finite Blaschke power ((delta - i)/(delta + i))^k.
struct InnerFn {
    enum class Kind { One, Shift, BlaschkePow };
    Kind kind = Kind::One;
    double rho = 0.0;  // Shift
    int k = 0;         // BlaschkePow

    static InnerFn one() { return {Kind::One, 0.0, 0}; }
    static InnerFn shift(double rho) {
        if (!(rho > 0.0)) throw ConfigError("InnerFn::shift: rho must be positive");
        return {Kind::Shift, rho, 0};
    }
    static InnerFn blaschke_pow(int k) {
        if (k < 1) throw ConfigError("InnerFn::blaschke_pow: k must be positive");
        return {Kind::BlaschkePow, 0.0, k};
    }
};

inline Cplx pow_int(Cplx base, int n) {
    Cplx r{1.0, 0.0};
    for (int i = 0; i < n; ++i) r *= base;
    return r;
}

inline Cplx eval_inner(const InnerFn& psi, const Cplx& w) {
    require_upper_closed(w, "eval_inner: w");
    switch (psi.kind) {
        case InnerFn::Kind::One: return {1.0, 0.0};
        case InnerFn::Kind::Shift: return std::exp(I * w * psi.rho);
        case InnerFn::Kind::BlaschkePow: return pow_int((w - I) / (w + I), psi.k);
    }
    return {};
}

// Lower-half-plane continuation of psi(-delta)/psi(delta).
inline Cplx psi_ratio(const InnerFn& psi, const Cplx& z) {
    require_lower_half(z, "psi_ratio: z");
    switch (psi.kind) {
        case InnerFn::Kind::One: return {1.0, 0.0};
        case InnerFn::Kind::Shift: return std::exp(-2.0 * I * z * psi.rho);
        case InnerFn::Kind::BlaschkePow: return pow_int((z + I) / (z - I), 2 * psi.k);
    }
    return {};
}

// Scalar s with psi(B)* e^{-i mu x} = s e^{-i mu x}; equals conj(psi(conj(mu))).
inline Cplx psi_star_exp(const InnerFn& psi, const Cplx& mu) {
    require_lower_half(mu, "psi_star_exp: mu");
    return std::conj(eval_inner(psi, std::conj(mu)));
}

// Laguerre function q_n(x) = e^{-x/2} L_n(x), computed via the polynomial
// three-term recurrence.
inline double laguerre_fn(int n, double x) {
    double lkm1 = 1.0;      // L_0
    double lk = 1.0 - x;    // L_1
    if (n == 0) return std::exp(-0.5 * x);
    for (int m = 1; m < n; ++m) {
        const double lkp1 = ((2.0 * m + 1.0 - x) * lk - m * lkm1) / (m + 1.0);
        lkm1 = lk;
        lk = lkp1;
    }
    return std::exp(-0.5 * x) * lk;
}

// Orthonormal basis element on (0, inf) with respect to dx: sqrt(2) q_n(2x).
inline double laguerre_basis(int n, double x) {
    return std::sqrt(2.0) * laguerre_fn(n, 2.0 * x);
}

// Exact symbolic image of e^{-i mu x} under psi(B): a multiple of the same
// exponential plus a finite Laguerre tail (nonzero only for Blaschke powers,
// where T e^{-i mu x} = B e^{-i mu x} + (2i/(mu+i)) q_0(2x) with
// B = (mu-i)/(mu+i) and T q_n(2x) = q_{n+1}(2x)).
struct ExpImage {
    Cplx mu;                          // e^{-i mu x} carrier
    Cplx exp_coeff;                   // multiple of the exponential
    std::vector<Cplx> lag_coeffs;     // coefficients of q_n(2x), n = 0..
    double shift = 0.0;               // Shift variant: translate by rho, zero-fill

    Cplx operator()(double x) const {
        if (shift > 0.0) {
            if (x < shift) return {0.0, 0.0};
            return exp_coeff * std::exp(-I * mu * (x - shift));
        }
        Cplx v = exp_coeff * std::exp(-I * mu * x);
        for (std::size_t n = 0; n < lag_coeffs.size(); ++n)
            v += lag_coeffs[n] * laguerre_fn(static_cast<int>(n), 2.0 * x);
        return v;
    }
};

// psi(B) applied to e^{-i mu x}, mu in the lower half-plane.
inline ExpImage psi_apply_exp(const InnerFn& psi, const Cplx& mu) {
    require_lower_half(mu, "psi_apply_exp: mu");
    ExpImage img{mu, {1.0, 0.0}, {}, 0.0};
    switch (psi.kind) {
        case InnerFn::Kind::One: return img;
        case InnerFn::Kind::Shift:
            img.shift = psi.rho;
            return img;
        case InnerFn::Kind::BlaschkePow: {
            const Cplx b = (mu - I) / (mu + I);
            const Cplx feed = 2.0 * I / (mu + I);
            img.exp_coeff = pow_int(b, psi.k);
            img.lag_coeffs.resize(psi.k);
            for (int n = 0; n < psi.k; ++n) img.lag_coeffs[n] = feed * pow_int(b, psi.k - 1 - n);
            return img;
        }
    }
    return img;
}

// psi(B) and psi(B)* for the Shift variant acting on scalar functions.
inline CplxFn shift_apply(const InnerFn& psi, CplxFn f) {
    if (psi.kind != InnerFn::Kind::Shift)
        throw UnsupportedVariant("shift_apply: Shift variant required");
    const double rho = psi.rho;
    return [rho, f = std::move(f)](double x) -> Cplx {
        return x >= rho ? f(x - rho) : Cplx{0.0, 0.0};
    };
}

inline CplxFn shift_adjoint_apply(const InnerFn& psi, CplxFn f) {
    if (psi.kind != InnerFn::Kind::Shift)
        throw UnsupportedVariant("shift_adjoint_apply: Shift variant required");
    const double rho = psi.rho;
    return [rho, f = std::move(f)](double x) -> Cplx { return f(x + rho); };
}

// P_{h0} for the Shift variant: zero on [0, rho).
inline CplxFn shift_project(const InnerFn& psi, CplxFn f) {
    if (psi.kind != InnerFn::Kind::Shift)
        throw UnsupportedVariant("shift_project: Shift variant required");
    const double rho = psi.rho;
    return [rho, f = std::move(f)](double x) -> Cplx {
        return x >= rho ? f(x) : Cplx{0.0, 0.0};
    };
}

// Expansion coefficients of a function in the orthonormal basis sqrt(2) q_n(2x).
inline std::vector<Cplx> laguerre_expand(const CplxFn& f, double f_decay, int n_max,
                                         const QuadConfig& cfg = {}) {
    std::vector<Cplx> out(n_max + 1);
    // basis elements decay like e^{-x} times a polynomial; budget the rate at
    // 0.5 so the truncation point absorbs the polynomial growth
    const double rate = f_decay + 0.5;
    for (int n = 0; n <= n_max; ++n)
        out[n] = integrate_halfline([&](double x) { return f(x) * laguerre_basis(n, x); }, rate, cfg);
    return out;
}

// Truncated Laguerre partial-sum projector complement: identity minus the
// rank-(k) projector onto span{sqrt(2) q_n(2x)}_{n<k}. Used as P_{h0} for
// BlaschkePow(k); exact on functions whose expansion terminates.
inline CplxFn laguerre_project_complement(int k, CplxFn f, double f_decay,
                                          const QuadConfig& cfg = {}) {
    auto coeffs = laguerre_expand(f, f_decay, k - 1, cfg);
    return [k, coeffs = std::move(coeffs), f = std::move(f)](double x) -> Cplx {
        Cplx v = f(x);
        for (int n = 0; n < k; ++n) v -= coeffs[n] * laguerre_basis(n, x);
        return v;
    };
}

}  // namespace smx
