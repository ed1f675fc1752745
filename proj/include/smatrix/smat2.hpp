#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "smatrix/types.hpp"

namespace smx {

// 2x2 complex matrix.
struct SMat2 {
    Cplx s11{0, 0}, s12{0, 0}, s21{0, 0}, s22{0, 0};

    static SMat2 identity() { return {{1, 0}, {0, 0}, {0, 0}, {1, 0}}; }
    static SMat2 ones() { return {{1, 0}, {1, 0}, {1, 0}, {1, 0}}; }
    static SMat2 diag(Cplx d1, Cplx d2) { return {d1, {0, 0}, {0, 0}, d2}; }

    SMat2 adjoint() const {
        return {std::conj(s11), std::conj(s21), std::conj(s12), std::conj(s22)};
    }

    Cplx det() const { return s11 * s22 - s12 * s21; }

    SMat2 operator+(const SMat2& o) const {
        return {s11 + o.s11, s12 + o.s12, s21 + o.s21, s22 + o.s22};
    }
    SMat2 operator-(const SMat2& o) const {
        return {s11 - o.s11, s12 - o.s12, s21 - o.s21, s22 - o.s22};
    }
    friend SMat2 operator*(Cplx c, const SMat2& m) {
        return {c * m.s11, c * m.s12, c * m.s21, c * m.s22};
    }

    double max_abs() const {
        return std::max(std::max(std::abs(s11), std::abs(s12)),
                        std::max(std::abs(s21), std::abs(s22)));
    }

    double frob_norm() const {
        return std::sqrt(std::norm(s11) + std::norm(s12) + std::norm(s21) + std::norm(s22));
    }
};

// Singular values sigma1 >= sigma2 >= 0 from the eigenvalues of m* m.
inline std::array<double, 2> singular_values(const SMat2& m) {
    const double t = std::norm(m.s11) + std::norm(m.s12) + std::norm(m.s21) + std::norm(m.s22);
    const double d = std::abs(m.det());
    const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * d * d));
    const double l1 = 0.5 * (t + disc);
    const double l2 = d * d > 0.0 && l1 > 0.0 ? d * d / l1 : 0.5 * (t - disc);
    return {std::sqrt(l1), std::sqrt(std::max(0.0, l2))};
}

inline double max_entry_diff(const SMat2& a, const SMat2& b) { return (a - b).max_abs(); }

}  // namespace smx
