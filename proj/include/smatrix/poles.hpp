#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "smatrix/smatrix.hpp"

namespace smx {

struct SearchRect {
    double re_min, re_max, im_min, im_max;

    SearchRect(double a, double b, double c, double d) : re_min(a), re_max(b), im_min(c), im_max(d) {
        if (!(re_min < re_max) || !(im_min < im_max))
            throw ConfigError("SearchRect: degenerate rectangle");
        if (!(im_max < 0.0)) throw ConfigError("SearchRect: must lie strictly in the lower half-plane");
    }

    bool contains(const Cplx& z) const {
        return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
    }
    double diameter() const { return std::hypot(re_max - re_min, im_max - im_min); }
};

enum class PoleClass { Simple, Exceptional, Silent };

inline const char* pole_class_name(PoleClass c) {
    switch (c) {
        case PoleClass::Simple: return "simple";
        case PoleClass::Exceptional: return "exceptional";
        case PoleClass::Silent: return "silent";
    }
    return "?";
}

struct PoleReport {
    Cplx z;
    Cplx lambda;
    int order = 1;
    SMat2 residue;
    PoleClass classification = PoleClass::Simple;
    Region region = Region::MinusAxis;
};

struct PoleConfig {
    double refine_tol = 1e-10;
    double wprime_tol = 1e-6;
    double silent_tol = 1e-8;
    double cluster_tol = 1e-6;
    int n_res = 64;
    double r_res = 1e-2;
    int max_cells = 4096;
    QuadConfig quad{1e-10, 1e-8, 4000, 1e-14};
};

using AnalyticFn = std::function<Cplx(Cplx)>;

// Winding number (1/2 pi i) contour integral of f'/f over the rectangle
// boundary, by adaptive quadrature edge by edge. The rectangle is jittered
// and retried when a zero sits too close to the boundary.
inline int count_zeros_rect(const AnalyticFn& f, const AnalyticFn& fp, SearchRect rect,
                            const PoleConfig& cfg = {}) {
    for (int attempt = 0; attempt < 6; ++attempt) {
        const Cplx corners[4] = {{rect.re_min, rect.im_min},
                                 {rect.re_max, rect.im_min},
                                 {rect.re_max, rect.im_max},
                                 {rect.re_min, rect.im_max}};
        // boundary-zero screen
        double min_abs = std::numeric_limits<double>::infinity();
        double scale = 0.0;
        for (int e = 0; e < 4; ++e) {
            const Cplx a = corners[e], b = corners[(e + 1) % 4];
            for (int s = 0; s < 24; ++s) {
                const Cplx v = f(a + (b - a) * (s / 24.0));
                min_abs = std::min(min_abs, std::abs(v));
                scale = std::max(scale, std::abs(v));
            }
        }
        // Relative screen: near a multiple zero the whole boundary scale
        // shrinks like diam^order, so an absolute floor would misfire.
        if (scale > 0.0 && min_abs > 1e-6 * scale) {
            Cplx total{0.0, 0.0};
            bool ok = true;
            for (int e = 0; e < 4 && ok; ++e) {
                const Cplx a = corners[e], b = corners[(e + 1) % 4];
                try {
                    total += integrate_finite(
                        [&](double t) {
                            const Cplx w = a + (b - a) * t;
                            return fp(w) / f(w) * (b - a);
                        },
                        0.0, 1.0, cfg.quad);
                } catch (const ToleranceNotMet&) {
                    ok = false;  // near-boundary zero makes the integrand stiff; jitter
                }
            }
            if (ok) {
                const double winding = (total / (2.0 * M_PI * I)).real();
                const double rounded = std::round(winding);
                if (std::abs(winding - rounded) >= 0.25)
                    throw NonIntegerWinding("count_zeros_rect: winding residual " +
                                            std::to_string(std::abs(winding - rounded)));
                return static_cast<int>(rounded);
            }
        }
        // jitter: dilate slightly around the center, deterministic per attempt
        const double fr = 0.013 * (attempt + 1);
        const double cx = 0.5 * (rect.re_min + rect.re_max);
        const double w = 0.5 * (rect.re_max - rect.re_min) * (1.0 + fr);
        const double cy = 0.5 * (rect.im_min + rect.im_max);
        const double h = 0.5 * (rect.im_max - rect.im_min) * (1.0 + fr);
        rect = SearchRect(cx - w, cx + w, cy, std::min(cy + h, -1e-6));
        rect.im_min = cy - h;
    }
    throw BoundaryZero("count_zeros_rect: zero persists on the boundary after retries");
}

namespace detail {

struct ZeroCandidate {
    Cplx z;
    int multiplicity;
};

inline void quadrisect(const AnalyticFn& f, const AnalyticFn& fp, const SearchRect& rect,
                       const PoleConfig& cfg, std::vector<ZeroCandidate>& out, int& budget) {
    if (budget-- <= 0) throw BudgetExceeded("find_poles: subdivision budget exhausted");
    const int n = count_zeros_rect(f, fp, rect, cfg);
    if (n == 0) return;
    if (n == 1 || rect.diameter() < cfg.cluster_tol) {
        out.push_back({Cplx{0.5 * (rect.re_min + rect.re_max), 0.5 * (rect.im_min + rect.im_max)},
                       n});
        return;
    }
    const double cx = 0.5 * (rect.re_min + rect.re_max);
    const double cy = 0.5 * (rect.im_min + rect.im_max);
    std::vector<ZeroCandidate> sub;
    try {
        quadrisect(f, fp, SearchRect(rect.re_min, cx, rect.im_min, cy), cfg, sub, budget);
        quadrisect(f, fp, SearchRect(cx, rect.re_max, rect.im_min, cy), cfg, sub, budget);
        quadrisect(f, fp, SearchRect(rect.re_min, cx, cy, rect.im_max), cfg, sub, budget);
        quadrisect(f, fp, SearchRect(cx, rect.re_max, cy, rect.im_max), cfg, sub, budget);
    } catch (const BoundaryZero&) {
        // a zero of multiplicity n pinned at a subdivision line; report the
        // cell as one cluster and let Newton refine it
        out.push_back({Cplx{cx, cy}, n});
        return;
    } catch (const NonIntegerWinding&) {
        out.push_back({Cplx{cx, cy}, n});
        return;
    }
    int total = 0;
    for (const auto& c : sub) total += c.multiplicity;
    if (total != n) {
        out.push_back({Cplx{cx, cy}, n});  // count not conserved; keep the parent cell
        return;
    }
    out.insert(out.end(), sub.begin(), sub.end());
}

// Newton refinement in the z variable; multiplicity-m zeros take the
// modified step m f/f'.
inline Cplx newton_refine(const AnalyticFn& f, const AnalyticFn& fp, Cplx z0, int mult,
                          double tol) {
    Cplx z = z0;
    for (int it = 0; it < 80; ++it) {
        const Cplx fv = f(z);
        const Cplx dv = fp(z);
        if (std::abs(dv) == 0.0) break;
        const Cplx step = static_cast<double>(mult) * fv / dv;
        z -= step;
        if (std::abs(step) < 0.1 * tol) break;
    }
    return z;
}

}  // namespace detail

// Contour residue of S(z) around z0: (1/2 pi i) trapezoidal loop integral,
// spectrally accurate for the analytic integrand off the pole.
inline SMat2 residue(const Model& model, const Cplx& z0, const PoleConfig& cfg = {},
                     Path path = Path::Auto) {
    double r = cfg.r_res;
    for (int attempt = 0; attempt < 3; ++attempt) {
        try {
            SMat2 acc{};
            for (int k = 0; k < cfg.n_res; ++k) {
                const double th = 2.0 * M_PI * k / cfg.n_res;
                const Cplx w = z0 + r * std::exp(I * th);
                const SMat2 s = s_matrix(model, w, path, cfg.quad);
                const Cplx jac = r * std::exp(I * th) * I;  // dz/dtheta / i ... folded below
                acc = acc + (jac * (1.0 / static_cast<double>(cfg.n_res))) * s;
            }
            // (1/2 pi i) * integral over theta of S(z(th)) i r e^{i th} dth
            return (1.0 / I) * acc;
        } catch (const AtPole&) {
            r *= 0.1;  // pole on (or too close to) the contour; shrink and retry
        }
    }
    throw PoleOnContour("residue: could not place a contour free of poles");
}

// Simple vs exceptional vs silent classification at a located zero of a - W(z^2).
inline PoleClass classify_pole(const Model& model, const Cplx& z0, const PoleConfig& cfg = {},
                               const SMat2* residue_hint = nullptr) {
    if (model.a.infinite) throw NotAPole("classify_pole: H_infinity has no S-matrix poles");
    const Cplx w = weyl_titchmarsh(model.profile, z0);
    const double scale = 1.0 + std::abs(model.a.value);
    if (std::abs(model.a.value - w) > 1e3 * cfg.refine_tol * scale)
        throw NotAPole("classify_pole: a - W(z0^2) not small at z0");
    SMat2 res;
    if (residue_hint) {
        res = *residue_hint;
    } else {
        res = residue(model, z0, cfg);
    }
    if (res.frob_norm() < cfg.silent_tol) return PoleClass::Silent;
    const Cplx wp = weyl_titchmarsh_deriv(model.profile, z0);
    if (std::abs(wp) < cfg.wprime_tol * scale) return PoleClass::Exceptional;
    return PoleClass::Simple;
}

struct RegionConsistency {
    bool consistent = true;
    std::vector<std::string> violations;
};

// Half-plane constraints: poles cannot populate both open
// quadrant parts, and the sign of im(a) fixes the admissible part.
inline RegionConsistency region_consistency(const Model& model,
                                            const std::vector<PoleReport>& poles,
                                            double axis_band = 1e-9) {
    RegionConsistency rep;
    if (model.a.infinite) return rep;
    bool left = false, right = false;
    for (const auto& p : poles) {
        if (p.region == Region::MinusLeft) left = true;
        if (p.region == Region::MinusRight) right = true;
    }
    const double ia = model.a.value.imag();
    auto flag = [&](std::string msg) {
        rep.consistent = false;
        rep.violations.push_back(std::move(msg));
    };
    if (left && right) flag("poles present in both MinusLeft and MinusRight");
    for (const auto& p : poles) {
        if (p.region == Region::MinusLeft && !(ia > 0.0))
            flag("pole in MinusLeft but im(a) <= 0");
        if (p.region == Region::MinusRight && !(ia < 0.0))
            flag("pole in MinusRight but im(a) >= 0");
        if (p.region == Region::MinusAxis && std::abs(ia) > axis_band)
            flag("pole on MinusAxis but im(a) != 0");
    }
    return rep;
}

// Locate all zeros of a - W(z^2) inside the rectangle, refine, classify,
// and package as pole reports sorted by (re, im).
inline std::vector<PoleReport> find_poles(const Model& model, const SearchRect& rect,
                                          const PoleConfig& cfg = {}) {
    if (model.a.infinite) throw ConfigError("find_poles: model must have finite coupling");
    if (rect.im_max > -1e-3)
        throw ConfigError("find_poles: search rect must satisfy im_max <= -1e-3");
    const Cplx a = model.a.value;
    AnalyticFn f = [&](Cplx z) { return a - weyl_titchmarsh(model.profile, z); };
    AnalyticFn fp = [&](Cplx z) { return -2.0 * z * weyl_titchmarsh_deriv(model.profile, z); };

    std::vector<detail::ZeroCandidate> cands;
    int budget = cfg.max_cells;
    detail::quadrisect(f, fp, rect, cfg, cands, budget);

    std::vector<PoleReport> out;
    for (const auto& c : cands) {
        PoleReport rep;
        rep.z = detail::newton_refine(f, fp, c.z, c.multiplicity, cfg.refine_tol);
        if (!rect.contains(rep.z)) rep.z = c.z;
        rep.lambda = rep.z * rep.z;

        // Order from winding on a small circle; radius adapted to stay above
        // the double-precision cancellation floor of a - W(z^2).
        double r_ord = 1e-4;
        for (const auto& other : cands)
            if (&other != &c) r_ord = std::min(r_ord, 0.45 * std::abs(other.z - c.z));
        r_ord = std::max(r_ord, 10.0 * cfg.refine_tol);
        try {
            const SearchRect cell(rep.z.real() - r_ord, rep.z.real() + r_ord,
                                  rep.z.imag() - r_ord, std::min(rep.z.imag() + r_ord, -1e-6));
            rep.order = std::max(1, count_zeros_rect(f, fp, cell, cfg));
        } catch (const NumericError&) {
            rep.order = c.multiplicity;
        }

        rep.residue = residue(model, rep.z, cfg);
        rep.classification = classify_pole(model, rep.z, cfg, &rep.residue);
        if (rep.order >= 2) rep.classification = PoleClass::Exceptional;
        rep.region = region_of(rep.z);
        out.push_back(rep);
    }
    std::sort(out.begin(), out.end(), [](const PoleReport& x, const PoleReport& y) {
        if (x.z.real() != y.z.real()) return x.z.real() < y.z.real();
        return x.z.imag() < y.z.imag();
    });
    return out;
}

}  // namespace smx
