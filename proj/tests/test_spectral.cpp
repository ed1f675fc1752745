#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "smatrix/spectral.hpp"

using namespace smx;

namespace {

double cdist(const Cplx& a, const Cplx& b) { return std::abs(a - b); }
double rdist(const Cplx& a, const Cplx& b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

std::vector<Cplx> sample_lower(int n, unsigned seed, double im_max = -0.25) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> re(-2.5, 2.5), im(-2.0, im_max);
    std::vector<Cplx> out;
    for (int k = 0; k < n; ++k) out.emplace_back(re(rng), im(rng));
    return out;
}

const std::vector<Profile> kFamilies = {
    Profile::zero(),
    Profile::even_box({1.0, 1.0}, 1.0),
    Profile::odd_box({0.0, 2.0}, 1.0),
    Profile::poly_exp({Cplx{0.0, 8.0}}),
};

}  // namespace

TEST_CASE("free resolvent of the exponential pair has a closed form") {
    PairFn f = q_pair(Profile::poly_exp({Cplx{1.0, 0.0}}));  // e^{-x} both components
    for (const Cplx& z : sample_lower(6, 31)) {
        FreeResolvent r(f, z);
        for (double x : {0.3, 1.1, 2.7}) {
            const Cplx want = (std::exp(-I * z * x) - std::exp(-x)) / (1.0 + z * z);
            const auto got = r.eval(x);
            CHECK(rdist(got[0], want) < 1e-9);
            CHECK(rdist(got[1], want) < 1e-9);
        }
    }
}

TEST_CASE("free resolvent vanishes at the origin") {
    PairFn f = q_pair(Profile::even_box({2.0, -1.0}, 1.5));
    for (const Cplx& z : sample_lower(5, 37)) {
        const auto v = free_resolvent(f, z, 0.0);
        CHECK(std::abs(v[0]) < 1e-10);
        CHECK(std::abs(v[1]) < 1e-10);
    }
}

TEST_CASE("free resolvent of the box pair matches the min-formula") {
    const Cplx M{1.0, 1.0};
    const double rho = 1.0;
    PairFn f = q_pair(Profile::even_box(M, rho));
    for (const Cplx& mu : sample_lower(5, 41)) {
        FreeResolvent r(f, mu);
        for (double x : {0.2, 0.8, 1.0, 1.7, 3.0}) {
            const double m = std::min(x, rho);
            const Cplx want =
                -(M / (2.0 * mu * mu)) *
                ((std::exp(-I * mu * rho) + std::exp(I * mu * m) - 2.0) * std::exp(-I * mu * x) +
                 (std::exp(-I * mu * m) - std::exp(-I * mu * rho)) * std::exp(I * mu * x));
            CHECK(rdist(r.eval(x)[0], want) < 1e-9);
        }
    }
}

TEST_CASE("profile resolvent closed forms agree with quadrature") {
    for (const Profile& p : kFamilies) {
        if (p.is_zero()) continue;
        for (const Cplx& mu : sample_lower(3, 43)) {
            ProfileResolvent closed(p, mu, Path::Auto);
            ProfileResolvent numeric(p, mu, Path::Quadrature);
            for (double x : {0.4, 1.0, 2.3}) {
                const auto a = closed.eval(x);
                const auto b = numeric.eval(x);
                CHECK(rdist(a[0], b[0]) < 1e-8);
                CHECK(rdist(a[1], b[1]) < 1e-8);
            }
        }
    }
}

TEST_CASE("eigenfunction of the zero profile is the plain exponential") {
    const Cplx mu{0.7, -0.9};
    PairFn u = eigenfunction_u(Profile::zero(), mu);
    for (double x : {0.0, 0.5, 2.0}) {
        CHECK(cdist(u(x)[0], std::exp(-I * mu * x)) < 1e-12);
        CHECK(cdist(u(x)[1], std::exp(-I * mu * x)) < 1e-12);
    }
}

TEST_CASE("eigenfunction boundary mean is one for every family") {
    for (const Profile& p : kFamilies) {
        for (const Cplx& mu : sample_lower(5, 47)) {
            PairFn u = eigenfunction_u(p, mu);
            CHECK(cdist(boundary_mean(u), {1.0, 0.0}) < 1e-8);
        }
    }
}

TEST_CASE("silent configuration collapses the eigenfunction onto the box") {
    // pick z0, then M with z0^2 = (1 - cos(z0 rho)) M
    const double rho = 1.0;
    const Cplx z0{1.2, -0.8};
    const Cplx M = z0 * z0 / (1.0 - std::cos(z0 * rho));
    const Profile p = Profile::even_box(M, rho);
    PairFn u = eigenfunction_u(p, z0);
    PairFn q = q_pair(p);
    for (double x : {0.1, 0.4, 0.9}) {
        const Cplx want = (1.0 - std::cos(z0 * (rho - x))) / (z0 * z0) * q(x)[0];
        CHECK(rdist(u(x)[0], want) < 1e-9);
    }
    // outside the box the eigenfunction vanishes in this configuration
    CHECK(std::abs(u(1.8)[0]) < 1e-9);
}

TEST_CASE("Weyl-Titchmarsh closed values") {
    CHECK(cdist(weyl_titchmarsh(Profile::zero(), {0.0, -1.0}), {-2.0, 0.0}) < 1e-13);
    CHECK(cdist(weyl_titchmarsh(Profile::poly_exp({Cplx{0.0, 8.0}}), {0.0, -1.0}), {14.0, 0.0}) <
          1e-12);
}

TEST_CASE("Weyl-Titchmarsh closed form vs quadrature per family") {
    for (const Profile& p : kFamilies) {
        for (const Cplx& z : sample_lower(5, 53)) {
            const Cplx a = weyl_titchmarsh(p, z, Path::Auto);
            const Cplx b = weyl_titchmarsh(p, z, Path::Quadrature);
            CHECK(rdist(a, b) < 1e-8);
        }
    }
}

TEST_CASE("Weyl-Titchmarsh function for a sampled profile approximates its source") {
    // sample q(x) = (2+i) e^{-x} on a grid and compare with the poly_exp value
    const Cplx M{2.0, 1.0};
    std::vector<double> grid;
    std::vector<Cplx> q1, q2;
    for (double x = 0.0; x <= 14.0 + 1e-9; x += 0.02) {
        grid.push_back(x);
        q1.push_back(M * std::exp(-x));
        q2.push_back(M * std::exp(-x));
    }
    const Profile num =
        Profile::numeric(grid, q1, q2, InnerFn::blaschke_pow(1), InnerFn::blaschke_pow(1));
    const Profile exact = Profile::poly_exp({M});
    // sampled data is only accurate to the interpolation error, so run the
    // quadrature at matching tolerances
    QuadConfig cfg;
    cfg.abs_tol = 1e-6;
    cfg.rel_tol = 1e-5;
    cfg.tail_cutoff_tol = 1e-8;
    cfg.max_subdivisions = 20000;
    const Cplx z{0.8, -0.7};
    CHECK(rdist(weyl_titchmarsh(num, z, Path::Auto, cfg), weyl_titchmarsh(exact, z)) < 5e-3);
}

TEST_CASE("Herglotz sign and conjugation symmetry of W") {
    for (const Profile& p : kFamilies) {
        for (const Cplx& z : sample_lower(25, 59)) {
            const Cplx w = weyl_titchmarsh(p, z);
            const Cplx lam = z * z;
            if (std::abs(lam.imag()) > 1e-9) CHECK(w.imag() / lam.imag() > 0.0);
            CHECK(cdist(std::conj(w), weyl_titchmarsh(p, -std::conj(z))) < 1e-10);
        }
    }
}

TEST_CASE("derivative of W: closed values and finite-difference cross-check") {
    CHECK(cdist(weyl_titchmarsh_deriv(Profile::zero(), {0.0, -1.0}), {1.0, 0.0}) < 1e-12);
    for (const Profile& p : kFamilies) {
        for (const Cplx& z : sample_lower(5, 61)) {
            const Cplx closed = weyl_titchmarsh_deriv(p, z);
            const auto fd = complex_derivative([&](Cplx w) { return weyl_titchmarsh(p, w); }, z);
            CHECK(rdist(closed, fd.value / (2.0 * z)) < 1e-8);
        }
    }
}

TEST_CASE("derivative roots of the degree-zero family with |M|^2 > 8") {
    const Profile p = Profile::poly_exp({Cplx{0.0, 8.0}});
    const Cplx z1 = Cplx{-2.0 * std::sqrt(3.0), -1.0};
    const Cplx z2 = Cplx{2.0 * std::sqrt(3.0), -1.0};
    CHECK(std::abs(weyl_titchmarsh_deriv(p, z1)) < 1e-12);
    CHECK(std::abs(weyl_titchmarsh_deriv(p, z2)) < 1e-12);
}

TEST_CASE("c coefficients: closed values") {
    for (const Cplx& mu : sample_lower(4, 67))
        CHECK(cdist(c_coeff(Profile::zero(), mu, 1), {1.0, 0.0}) < 1e-14);
    {
        const Cplx mu{0.0, -1.0};
        const Cplx got = c_coeff(Profile::even_box({1.0, 0.0}, 1.0), mu, 1);
        const Cplx want = std::exp(-1.0) * (2.0 - std::cosh(1.0));
        CHECK(cdist(got, want) < 1e-12);
    }
    {
        const Cplx mu{0.0, -2.0};
        const Cplx M{1.5, -0.4};
        const Cplx got = c_coeff(Profile::poly_exp({M}), mu, 1);
        CHECK(cdist(got, (3.0 + M) / 9.0) < 1e-12);
    }
}

TEST_CASE("c coefficients: closed form vs quadrature per family") {
    for (const Profile& p : kFamilies) {
        for (const Cplx& mu : sample_lower(4, 71)) {
            for (int j : {1, 2}) {
                const Cplx a = c_coeff(p, mu, j, Path::Auto);
                const Cplx b = c_coeff(p, mu, j, Path::Quadrature);
                CHECK(rdist(a, b) < 1e-8);
            }
        }
    }
}

TEST_CASE("Krein resolvent reduces to the free resolvent at infinite coupling") {
    const Model m{Coupling::infinity(), Profile::even_box({1.0, 1.0}, 1.0)};
    PairFn f = q_pair(Profile::poly_exp({Cplx{1.0, 0.0}}));
    const Cplx z{0.9, -0.8};
    FreeResolvent fr(f, z);
    KreinResolvent kr(m, f, z);
    for (double x : {0.3, 1.2, 2.5}) {
        CHECK(cdist(kr.eval(x)[0], fr.eval(x)[0]) < 1e-12);
        CHECK(cdist(kr.eval(x)[1], fr.eval(x)[1]) < 1e-12);
    }
}

TEST_CASE("Krein correction scalar for the zero profile") {
    const Cplx a{1.3, 0.4};
    const Model m{Coupling::finite(a), Profile::zero()};
    PairFn f = q_pair(Profile::poly_exp({Cplx{1.0, 0.0}}));
    for (const Cplx& z : sample_lower(5, 73)) {
        KreinResolvent kr(m, f, z);
        const Cplx want = 2.0 / ((1.0 + I * z) * (a + 2.0 * I * z));
        CHECK(rdist(kr.correction_coeff(), want) < 1e-9);
    }
}

TEST_CASE("Krein resolvent refuses evaluation at a pole") {
    // a = W(z^2) exactly
    const Cplx z{0.0, -1.0};
    const Model m{Coupling::finite({-2.0, 0.0}), Profile::zero()};
    PairFn f = q_pair(Profile::poly_exp({Cplx{1.0, 0.0}}));
    CHECK_THROWS_AS(KreinResolvent(m, f, z), AtPole);
}

TEST_CASE("Krein resolvent satisfies the defining equation") {
    // -g'' + [g]_r q = z^2 g + f componentwise, finite differences
    const Cplx a{1.7, 0.3};
    const Cplx z{1.1, -0.9};
    PairFn f = q_pair(Profile::poly_exp({Cplx{1.0, 0.0}}));  // smooth forcing
    for (const Profile& p : {Profile::zero(), Profile::even_box({1.0, 1.0}, 1.0)}) {
        const Model m{Coupling::finite(a), p};
        KreinResolvent kr(m, f, z);
        PairFn g;
        g.eval = [&kr](double x) { return kr.eval(x); };
        const Cplx gr = boundary_mean(g);
        PairFn q = q_pair(p);
        const double h = 2e-3;
        double worst = 0.0;
        for (double x : {0.35, 0.62, 1.48, 2.21}) {
            for (int j : {0, 1}) {
                const Cplx gm = kr.eval(x - h)[j], g0 = kr.eval(x)[j], gp = kr.eval(x + h)[j];
                const Cplx lap = (gm - 2.0 * g0 + gp) / (h * h);
                const Cplx resid = -lap + gr * q(x)[j] - z * z * g0 - f(x)[j];
                worst = std::max(worst, std::abs(resid));
            }
        }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("spectral operations reject invalid z") {
    CHECK_THROWS_AS(weyl_titchmarsh(Profile::zero(), {1.0, 1.0}), NotLowerHalfPlane);
    CHECK_THROWS_AS(weyl_titchmarsh(Profile::zero(), {0.0, 0.0}), ZeroSpectralParameter);
    CHECK_THROWS_AS(c_coeff(Profile::zero(), {1.0, -1.0}, 3), ConfigError);
}
