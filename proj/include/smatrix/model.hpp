#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "smatrix/inner.hpp"
#include "smatrix/quad.hpp"
#include "smatrix/types.hpp"

namespace smx {

// Two-component function on the half-line (an element of L2(R+, C^2)).
struct PairFn {
    std::function<std::array<Cplx, 2>(double)> eval;
    double decay_rate = 1.0;                // |f_j(x)| <= C e^{-decay_rate x}
    double support_end = std::numeric_limits<double>::infinity();
    std::vector<double> breakpoints;        // jump points (mandatory panel boundaries)
    bool exact_at_zero = true;              // eval(0) is the one-sided limit
    double grid_h = 0.0;                    // sampling step for extrapolated limits

    std::array<Cplx, 2> operator()(double x) const { return eval(x); }
};

// Interaction profiles. Each analytic family carries its declared inner
// functions; NumericPair must declare them explicitly.
struct ZeroProfile {};

struct EvenBoxProfile {
    Cplx M;
    double rho;
};

struct OddBoxProfile {
    Cplx M;
    double rho;
};

struct PolyExpProfile {
    std::vector<Cplx> coeffs;  // P_m coefficients, ascending powers
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    Cplx poly(double x) const {
        Cplx v{0.0, 0.0};
        for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
        return v;
    }
};

struct NumericPairProfile {
    std::vector<double> grid;  // strictly increasing from 0
    std::vector<Cplx> q1;
    std::vector<Cplx> q2;
    InnerFn psi1;
    InnerFn psi2;
    double x_max() const { return grid.empty() ? 0.0 : grid.back(); }
};

struct Profile {
    std::variant<ZeroProfile, EvenBoxProfile, OddBoxProfile, PolyExpProfile, NumericPairProfile> v;

    static Profile zero() { return {ZeroProfile{}}; }
    static Profile even_box(Cplx M, double rho) {
        if (!(rho > 0.0)) throw ConfigError("even_box: rho must be positive");
        return {EvenBoxProfile{M, rho}};
    }
    static Profile odd_box(Cplx M, double rho) {
        if (!(rho > 0.0)) throw ConfigError("odd_box: rho must be positive");
        return {OddBoxProfile{M, rho}};
    }
    static Profile poly_exp(std::vector<Cplx> coeffs) {
        if (coeffs.empty()) throw ConfigError("poly_exp: coeffs must be non-empty");
        if (coeffs.size() > 1 && coeffs.back() == Cplx{0.0, 0.0})
            throw ConfigError("poly_exp: leading coefficient must be nonzero");
        return {PolyExpProfile{std::move(coeffs)}};
    }
    static Profile numeric(std::vector<double> grid, std::vector<Cplx> q1, std::vector<Cplx> q2,
                           InnerFn psi1, InnerFn psi2) {
        if (grid.size() < 3 || grid.size() != q1.size() || grid.size() != q2.size())
            throw ConfigError("numeric: grid/q1/q2 sizes must agree (>= 3 nodes)");
        if (grid.front() != 0.0) throw ConfigError("numeric: grid must start at 0");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1])) throw ConfigError("numeric: grid must be strictly increasing");
        return {NumericPairProfile{std::move(grid), std::move(q1), std::move(q2), psi1, psi2}};
    }

    bool is_zero() const { return std::holds_alternative<ZeroProfile>(v); }

    // Declared inner function for component j (1 or 2).
    InnerFn inner(int j) const {
        return std::visit(
            [j](const auto& p) -> InnerFn {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, ZeroProfile>) {
                    return InnerFn::one();
                } else if constexpr (std::is_same_v<T, EvenBoxProfile> ||
                                     std::is_same_v<T, OddBoxProfile>) {
                    return InnerFn::shift(p.rho);
                } else if constexpr (std::is_same_v<T, PolyExpProfile>) {
                    return InnerFn::blaschke_pow(p.degree() + 1);
                } else {
                    return j == 1 ? p.psi1 : p.psi2;
                }
            },
            v);
    }
};

// Coupling: finite a in C or the distinguished marker for H_infinity.
struct Coupling {
    bool infinite = false;
    Cplx value{0.0, 0.0};

    static Coupling finite(Cplx a) { return {false, a}; }
    static Coupling infinity() { return {true, {}}; }
};

struct Model {
    Coupling a;
    Profile profile;
};

namespace detail {
inline Cplx lerp_samples(const std::vector<double>& g, const std::vector<Cplx>& q, double x) {
    if (x <= g.front()) return q.front();
    if (x >= g.back()) return {0.0, 0.0};
    auto it = std::upper_bound(g.begin(), g.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - g.begin());
    const double t = (x - g[i - 1]) / (g[i] - g[i - 1]);
    return q[i - 1] * (1.0 - t) + q[i] * t;
}
}  // namespace detail

// The half-line pair q = Yq of the profile.
inline PairFn q_pair(const Profile& profile) {
    return std::visit(
        [](const auto& p) -> PairFn {
            using T = std::decay_t<decltype(p)>;
            PairFn out;
            if constexpr (std::is_same_v<T, ZeroProfile>) {
                out.eval = [](double) { return std::array<Cplx, 2>{Cplx{0, 0}, Cplx{0, 0}}; };
                out.support_end = 0.0;
                out.decay_rate = 1.0;
            } else if constexpr (std::is_same_v<T, EvenBoxProfile>) {
                const Cplx M = p.M;
                const double rho = p.rho;
                out.eval = [M, rho](double x) {
                    const Cplx v = (x <= rho) ? M : Cplx{0.0, 0.0};
                    return std::array<Cplx, 2>{v, v};
                };
                out.support_end = rho;
                out.breakpoints = {rho};
                out.decay_rate = 1.0;
            } else if constexpr (std::is_same_v<T, OddBoxProfile>) {
                const Cplx M = p.M;
                const double rho = p.rho;
                out.eval = [M, rho](double x) {
                    const Cplx v = (x <= rho) ? M : Cplx{0.0, 0.0};
                    return std::array<Cplx, 2>{v, -v};
                };
                out.support_end = rho;
                out.breakpoints = {rho};
                out.decay_rate = 1.0;
            } else if constexpr (std::is_same_v<T, PolyExpProfile>) {
                out.eval = [p](double x) {
                    const double e = std::exp(-x);
                    return std::array<Cplx, 2>{p.poly(x) * e, p.poly(-x) * e};
                };
                out.decay_rate = 0.9;  // e^{-x} times a polynomial
            } else {
                out.eval = [p](double x) {
                    return std::array<Cplx, 2>{detail::lerp_samples(p.grid, p.q1, x),
                                               detail::lerp_samples(p.grid, p.q2, x)};
                };
                out.support_end = p.x_max();
                out.decay_rate = 1.0;
                out.exact_at_zero = false;
                out.grid_h = p.grid[1] - p.grid[0];
            }
            return out;
        },
        profile.v);
}

// Y-transform: f on R maps to (f(x), f(-x)) on the half-line.
inline PairFn y_transform(std::function<Cplx(double)> f, double decay_rate = 1.0,
                          std::vector<double> breakpoints = {}) {
    PairFn out;
    out.eval = [f = std::move(f)](double x) { return std::array<Cplx, 2>{f(x), f(-x)}; };
    out.decay_rate = decay_rate;
    out.breakpoints = std::move(breakpoints);
    return out;
}

namespace detail {
// Limit at 0+ by Richardson extrapolation from the 3 smallest sample points.
inline Cplx limit_at_zero(const std::function<Cplx(double)>& f, double h, double tol,
                          const char* what) {
    const Cplx f1 = f(h), f2 = f(2.0 * h), f3 = f(3.0 * h);
    const Cplx quad = 3.0 * f1 - 3.0 * f2 + f3;
    const Cplx lin = 2.0 * f1 - f2;
    const double scale = 1.0 + std::abs(quad);
    if (std::abs(quad - lin) > tol * scale)
        throw NonConvergent(std::string(what) + ": extrapolated boundary limits disagree");
    return quad;
}
}  // namespace detail

inline std::array<Cplx, 2> boundary_values(const PairFn& f) {
    if (f.exact_at_zero) return f.eval(0.0);
    const double h = f.grid_h > 0.0 ? f.grid_h : 1e-4;
    const Cplx v1 = detail::limit_at_zero([&](double x) { return f.eval(x)[0]; }, h, 1e-6,
                                          "boundary limit (component 1)");
    const Cplx v2 = detail::limit_at_zero([&](double x) { return f.eval(x)[1]; }, h, 1e-6,
                                          "boundary limit (component 2)");
    return {v1, v2};
}

// [f]_r = (f1(0+) + f2(0+))/2
inline Cplx boundary_mean(const PairFn& f) {
    const auto v = boundary_values(f);
    return 0.5 * (v[0] + v[1]);
}

// [f]_s = f1(0+) - f2(0+)
inline Cplx boundary_jump(const PairFn& f) {
    const auto v = boundary_values(f);
    return v[0] - v[1];
}

// Inner product on L2(R+, C^2), linear in the first argument.
inline Cplx pair_inner(const PairFn& f, const PairFn& g, const QuadConfig& cfg = {}) {
    const double rate = f.decay_rate + g.decay_rate;
    double cutoff = halfline_cutoff(rate, cfg);
    cutoff = std::min(cutoff, std::min(f.support_end, g.support_end));
    if (cutoff <= 0.0) return {0.0, 0.0};
    std::vector<double> bp = f.breakpoints;
    bp.insert(bp.end(), g.breakpoints.begin(), g.breakpoints.end());
    return integrate_finite(
        [&](double x) {
            const auto a = f.eval(x);
            const auto b = g.eval(x);
            return a[0] * std::conj(b[0]) + a[1] * std::conj(b[1]);
        },
        0.0, cutoff, cfg, bp);
}

// Expansion coefficients of component j of a PolyExp profile in the
// normalized basis {sqrt(2) q_n(2x)}. Coefficients above the degree vanish.
inline std::vector<Cplx> laguerre_coeffs(const Profile& profile, int component, int n_max,
                                         const QuadConfig& cfg = {}) {
    const auto* p = std::get_if<PolyExpProfile>(&profile.v);
    if (!p) throw UnsupportedFamily("laguerre_coeffs: PolyExp profile required");
    if (component != 1 && component != 2) throw ConfigError("laguerre_coeffs: component must be 1 or 2");
    if (n_max < p->degree()) throw ConfigError("laguerre_coeffs: n_max must be >= degree");
    const double sign = component == 1 ? 1.0 : -1.0;
    return laguerre_expand(
        [p, sign](double x) { return p->poly(sign * x) * std::exp(-x); }, 0.9, n_max, cfg);
}

}  // namespace smx
