#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>

#include "smatrix/inner.hpp"
#include "smatrix/model.hpp"
#include "smatrix/quad.hpp"
#include "smatrix/smat2.hpp"
#include "smatrix/types.hpp"

namespace smx {

// Evaluation route: Auto dispatches to a family closed form when one exists,
// Quadrature forces the numeric path (used for cross-validation).
enum class Path { Auto, Quadrature };

namespace detail {

inline void require_nonzero_z(const Cplx& z) {
    if (std::abs(z) < 1e-14) throw ZeroSpectralParameter("spectral parameter z must be nonzero");
}

// Effective decay rate of (H_inf - mu^2)^{-1} q for the profile.
inline double resolvent_decay(const Profile& profile, const Cplx& mu) {
    const double r = std::abs(mu.imag());
    if (std::holds_alternative<PolyExpProfile>(profile.v)) return std::min(r, 0.9);
    return r;
}

inline double psi_image_decay(const InnerFn& psi, const Cplx& mu) {
    const double r = std::abs(mu.imag());
    if (psi.kind == InnerFn::Kind::BlaschkePow) return std::min(r, 0.95);
    return r;
}

}  // namespace detail

// Free resolvent (H_inf - z^2)^{-1} applied to a decaying pair function.
// Precomputes the full-line moment so repeated point evaluations are cheap.
class FreeResolvent {
public:
    FreeResolvent(PairFn f, Cplx z, QuadConfig cfg = {})
        : f_(std::move(f)), z_(z), cfg_(cfg) {
        detail::require_nonzero_z(z_);
        require_lower_half(z_, "FreeResolvent: z");
        const double rate = f_.decay_rate + std::abs(z_.imag());
        cutoff_ = std::min(halfline_cutoff(rate, cfg_), f_.support_end);
        for (int j = 0; j < 2; ++j)
            moment_[j] = integrate_finite(
                [&, j](double s) { return std::exp(-I * z_ * s) * f_.eval(s)[j]; }, 0.0, cutoff_,
                cfg_, f_.breakpoints);
    }

    std::array<Cplx, 2> eval(double x) const {
        std::array<Cplx, 2> out;
        const Cplx pref = I / (2.0 * z_);
        for (int j = 0; j < 2; ++j) {
            // A_z(x) e^{-izx} without cancellation: shift the integration variable
            // so every factor stays bounded.
            Cplx termA = std::exp(-I * z_ * x) * moment_[j];
            if (x > 0.0) {
                std::vector<double> bp;
                for (double b : f_.breakpoints)
                    if (x - b > 0.0 && x - b < x) bp.push_back(x - b);
                termA -= integrate_finite(
                    [&, j](double t) { return std::exp(-I * z_ * t) * f_.eval(x - t)[j]; }, 0.0, x,
                    cfg_, bp);
            }
            Cplx termB{0.0, 0.0};
            if (x < cutoff_) {
                std::vector<double> bp;
                for (double b : f_.breakpoints)
                    if (b - x > 0.0 && b - x < cutoff_ - x) bp.push_back(b - x);
                termB = -integrate_finite(
                    [&, j](double t) { return std::exp(-I * z_ * t) * f_.eval(x + t)[j]; }, 0.0,
                    cutoff_ - x, cfg_, bp);
            }
            out[j] = pref * (termA + termB);
        }
        return out;
    }

private:
    PairFn f_;
    Cplx z_;
    QuadConfig cfg_;
    double cutoff_ = 0.0;
    std::array<Cplx, 2> moment_{};
};

inline std::array<Cplx, 2> free_resolvent(const PairFn& f, const Cplx& z, double x,
                                          const QuadConfig& cfg = {}) {
    return FreeResolvent(f, z, cfg).eval(x);
}

// (H_inf - mu^2)^{-1} q for the interaction profile; closed forms for the
// analytic families, quadrature otherwise.
class ProfileResolvent {
public:
    ProfileResolvent(const Profile& profile, Cplx mu, Path path = Path::Auto, QuadConfig cfg = {})
        : profile_(profile), mu_(mu), cfg_(cfg) {
        detail::require_nonzero_z(mu_);
        require_lower_half(mu_, "ProfileResolvent: mu");
        closed_ = path == Path::Auto && has_closed_form(profile);
        if (!closed_) numeric_.emplace(q_pair(profile), mu_, cfg_);
    }

    static bool has_closed_form(const Profile& p) {
        if (std::holds_alternative<ZeroProfile>(p.v) || std::holds_alternative<EvenBoxProfile>(p.v) ||
            std::holds_alternative<OddBoxProfile>(p.v))
            return true;
        if (const auto* pe = std::get_if<PolyExpProfile>(&p.v)) return pe->degree() == 0;
        return false;
    }

    std::array<Cplx, 2> eval(double x) const {
        if (!closed_) return numeric_->eval(x);
        if (std::holds_alternative<ZeroProfile>(profile_.v)) return {Cplx{0, 0}, Cplx{0, 0}};
        if (const auto* p = std::get_if<EvenBoxProfile>(&profile_.v)) {
            const Cplx v = box_component(p->M, p->rho, x);
            return {v, v};
        }
        if (const auto* p = std::get_if<OddBoxProfile>(&profile_.v))
            return {box_component(p->M, p->rho, x), box_component(-p->M, p->rho, x)};
        const auto& p = std::get<PolyExpProfile>(profile_.v);
        const Cplx M = p.coeffs[0];
        if (std::abs(1.0 + mu_ * mu_) < 1e-12)
            throw ZeroSpectralParameter("ProfileResolvent: mu^2 = -1 closed form singular");
        const Cplx v = M * (std::exp(-I * mu_ * x) - std::exp(-x)) / (1.0 + mu_ * mu_);
        return {v, v};
    }

    double decay_rate() const { return detail::resolvent_decay(profile_, mu_); }

private:
    Cplx box_component(Cplx M, double rho, double x) const {
        const Cplx E = std::exp(-I * mu_ * rho);
        const Cplx pref = -M / (2.0 * mu_ * mu_);
        if (x <= rho) {
            return pref * ((E - 2.0) * std::exp(-I * mu_ * x) + 2.0 -
                           std::exp(-I * mu_ * (rho - x)));
        }
        return pref * (E + 1.0 / E - 2.0) * std::exp(-I * mu_ * x);
    }

    Profile profile_;
    Cplx mu_;
    QuadConfig cfg_;
    bool closed_ = false;
    std::optional<FreeResolvent> numeric_;
};

// Eigenfunction u_mu = e^{-i mu x} (1,1)^T - (H_inf - mu^2)^{-1} q of H_max.
inline PairFn eigenfunction_u(const Profile& profile, const Cplx& mu, Path path = Path::Auto,
                              const QuadConfig& cfg = {}) {
    auto res = std::make_shared<ProfileResolvent>(profile, mu, path, cfg);
    PairFn out;
    out.eval = [res, mu](double x) {
        const Cplx e = std::exp(-I * mu * x);
        const auto r = res->eval(x);
        return std::array<Cplx, 2>{e - r[0], e - r[1]};
    };
    out.decay_rate = std::min(std::abs(mu.imag()), res->decay_rate());
    out.exact_at_zero = true;
    return out;
}

// Weyl-Titchmarsh function W(z^2) of the boundary triplet.
inline Cplx weyl_titchmarsh(const Profile& profile, const Cplx& z, Path path = Path::Auto,
                            const QuadConfig& cfg = {}) {
    detail::require_nonzero_z(z);
    require_lower_half(z, "weyl_titchmarsh: z");
    if (path == Path::Auto) {
        if (std::holds_alternative<ZeroProfile>(profile.v)) return -2.0 * I * z;
        if (const auto* p = std::get_if<EvenBoxProfile>(&profile.v)) {
            const Cplx E = std::exp(-I * z * p->rho);
            const Cplx z3 = z * z * z;
            return -2.0 * I * z - (4.0 * p->M.real() / (I * z)) * (1.0 - E) +
                   (std::norm(p->M) / (I * z3)) *
                       ((E - 2.0) * (E - 2.0) - 2.0 * I * z * p->rho - 1.0);
        }
        if (const auto* p = std::get_if<OddBoxProfile>(&profile.v)) {
            const Cplx E = std::exp(-I * z * p->rho);
            const Cplx z3 = z * z * z;
            return -2.0 * I * z + (std::norm(p->M) / (I * z3)) *
                                      ((E - 2.0) * (E - 2.0) - 2.0 * I * z * p->rho - 1.0);
        }
        if (const auto* p = std::get_if<PolyExpProfile>(&profile.v); p && p->degree() == 0) {
            const Cplx M = p->coeffs[0];
            const Cplx d = 1.0 + I * z;
            return -2.0 * I * z - 4.0 * M.real() / d + std::norm(M) / (d * d);
        }
    }
    // Quadrature route straight from the defining formula.
    PairFn q = q_pair(profile);
    const double rate2 = q.decay_rate + std::abs(z.imag());
    const double cut2 = std::min(halfline_cutoff(rate2, cfg), q.support_end);
    Cplx middle{0.0, 0.0};
    if (cut2 > 0.0)
        middle = integrate_finite(
            [&](double x) {
                const auto v = q.eval(x);
                return std::exp(-I * z * x) * (v[0].real() + v[1].real());
            },
            0.0, cut2, cfg, q.breakpoints);

    FreeResolvent rq(q, z, cfg);
    const double rate3 = detail::resolvent_decay(profile, z) + q.decay_rate;
    const double cut3 = std::min(halfline_cutoff(rate3, cfg), q.support_end);
    Cplx third{0.0, 0.0};
    if (cut3 > 0.0)
        third = integrate_finite(
            [&](double x) {
                const auto r = rq.eval(x);
                const auto v = q.eval(x);
                return r[0] * std::conj(v[0]) + r[1] * std::conj(v[1]);
            },
            0.0, cut3, cfg, q.breakpoints);
    return -2.0 * I * z - 2.0 * middle + third;
}

// dW/dz, closed forms where the family admits one.
inline std::optional<Cplx> weyl_dz_closed(const Profile& profile, const Cplx& z) {
    if (std::holds_alternative<ZeroProfile>(profile.v)) return Cplx{0.0, -2.0};
    if (const auto* p = std::get_if<PolyExpProfile>(&profile.v); p && p->degree() == 0) {
        const Cplx d = 1.0 + I * z;
        return -2.0 * I + 4.0 * I * p->coeffs[0].real() / (d * d) -
               2.0 * I * std::norm(p->coeffs[0]) / (d * d * d);
    }
    const Cplx* Mp = nullptr;
    double rho = 0.0;
    bool even = false;
    if (const auto* p = std::get_if<EvenBoxProfile>(&profile.v)) {
        Mp = &p->M;
        rho = p->rho;
        even = true;
    } else if (const auto* p = std::get_if<OddBoxProfile>(&profile.v)) {
        Mp = &p->M;
        rho = p->rho;
    } else {
        return std::nullopt;
    }
    const Cplx E = std::exp(-I * z * rho);
    const Cplx Ep = -I * rho * E;
    const Cplx z2 = z * z, z3 = z2 * z;
    Cplx d = -2.0 * I;
    if (even) {
        // d/dz [ (1-E)/(iz) ]
        const Cplx t = (-Ep * (I * z) - (1.0 - E) * I) / (-z2);
        d += -4.0 * Mp->real() * t;
    }
    const Cplx G = (E - 2.0) * (E - 2.0) - 2.0 * I * z * rho - 1.0;
    const Cplx Gp = 2.0 * (E - 2.0) * Ep - 2.0 * I * rho;
    d += std::norm(*Mp) * (Gp * (I * z3) - G * (3.0 * I * z2)) / (-z3 * z3);
    return d;
}

// W'(lambda) = dW/d(lambda) at lambda = z^2, computed as (dW/dz)/(2z).
inline Cplx weyl_titchmarsh_deriv(const Profile& profile, const Cplx& z, Path path = Path::Auto,
                                  const QuadConfig& cfg = {}) {
    detail::require_nonzero_z(z);
    require_lower_half(z, "weyl_titchmarsh_deriv: z");
    if (path == Path::Auto) {
        if (auto dz = weyl_dz_closed(profile, z)) return *dz / (2.0 * z);
    }
    const auto d = complex_derivative(
        [&](Cplx w) { return weyl_titchmarsh(profile, w, path, cfg); }, z, cfg);
    return d.value / (2.0 * z);
}

// Coefficient c(mu, q_j) of psi(B)* u_mu in front of e^{-i mu x}.
inline Cplx c_coeff(const Profile& profile, const Cplx& mu, int j, Path path = Path::Auto,
                    const QuadConfig& cfg = {}) {
    detail::require_nonzero_z(mu);
    require_lower_half(mu, "c_coeff: mu");
    if (j != 1 && j != 2) throw ConfigError("c_coeff: j must be 1 or 2");
    if (path == Path::Auto) {
        if (std::holds_alternative<ZeroProfile>(profile.v)) return {1.0, 0.0};
        if (const auto* p = std::get_if<EvenBoxProfile>(&profile.v)) {
            const Cplx kappa = 1.0 - std::cos(mu * p->rho);
            return std::exp(-I * mu * p->rho) * (1.0 - kappa * p->M / (mu * mu));
        }
        if (const auto* p = std::get_if<OddBoxProfile>(&profile.v)) {
            const Cplx kappa = 1.0 - std::cos(mu * p->rho);
            const Cplx sgn = j == 1 ? Cplx{1.0, 0.0} : Cplx{-1.0, 0.0};
            return std::exp(-I * mu * p->rho) * (1.0 - sgn * kappa * p->M / (mu * mu));
        }
        if (const auto* p = std::get_if<PolyExpProfile>(&profile.v); p && p->degree() == 0) {
            const Cplx M = p->coeffs[0];
            const Cplx d = mu - I;
            return (mu * mu + 1.0 - M) / (d * d);
        }
    }
    const InnerFn psi = profile.inner(j);
    const ExpImage img = psi_apply_exp(psi, mu);
    ProfileResolvent rq(profile, mu, path, cfg);
    PairFn q = q_pair(profile);
    double rate = rq.decay_rate() + detail::psi_image_decay(psi, mu);
    const double cut = halfline_cutoff(rate, cfg);
    std::vector<double> bp = q.breakpoints;
    if (img.shift > 0.0) bp.push_back(img.shift);
    const int idx = j - 1;
    const Cplx integral = integrate_finite(
        [&](double x) { return rq.eval(x)[idx] * std::conj(img(x)); }, 0.0, cut, cfg, bp);
    return psi_star_exp(psi, mu) + 2.0 * mu.imag() * integral;
}

// Krein-Naimark resolvent of H_{aq} applied to a fixed pair function;
// (H_aq - z^2)^{-1} f = (H_inf - z^2)^{-1} f + [(f, u_{-conj z}) / (a - W(z^2))] u_z.
class KreinResolvent {
public:
    KreinResolvent(const Model& model, PairFn f, Cplx z, Path path = Path::Auto,
                   QuadConfig cfg = {}, double pole_guard_scale = 1e-10)
        : z_(z), free_(f, z, cfg) {
        detail::require_nonzero_z(z);
        require_lower_half(z, "KreinResolvent: z");
        if (model.a.infinite) return;
        const Cplx w = weyl_titchmarsh(model.profile, z, path, cfg);
        const Cplx denom = model.a.value - w;
        if (std::abs(denom) < pole_guard_scale * (1.0 + std::abs(model.a.value)))
            throw AtPole("KreinResolvent: a - W(z^2) below pole guard");
        const PairFn u_minus = eigenfunction_u(model.profile, -std::conj(z), path, cfg);
        coeff_ = pair_inner(f, u_minus, cfg) / denom;
        u_z_.emplace(model.profile, z, path, cfg);
    }

    std::array<Cplx, 2> eval(double x) const {
        auto v = free_.eval(x);
        if (u_z_) {
            const Cplx e = std::exp(-I * z_ * x);
            const auto r = u_z_->eval(x);
            v[0] += coeff_ * (e - r[0]);
            v[1] += coeff_ * (e - r[1]);
        }
        return v;
    }

    Cplx correction_coeff() const { return coeff_; }

private:
    Cplx z_;
    FreeResolvent free_;
    Cplx coeff_{0.0, 0.0};
    std::optional<ProfileResolvent> u_z_;
};

inline std::array<Cplx, 2> krein_resolvent(const Model& model, const PairFn& f, const Cplx& z,
                                           double x, Path path = Path::Auto,
                                           const QuadConfig& cfg = {}) {
    return KreinResolvent(model, f, z, path, cfg).eval(x);
}

}  // namespace smx
