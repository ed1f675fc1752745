#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace smx {

using Cplx = std::complex<double>;

inline constexpr Cplx I{0.0, 1.0};

inline bool is_finite(const Cplx& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

// Sign-of-real-part partition of the open lower half-plane.
enum class Region { MinusLeft, MinusAxis, MinusRight };

inline const char* region_name(Region r) {
    switch (r) {
        case Region::MinusLeft: return "minus_left";
        case Region::MinusAxis: return "minus_axis";
        case Region::MinusRight: return "minus_right";
    }
    return "?";
}

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergent : NumericError {
    using NumericError::NumericError;
};
struct ToleranceNotMet : NumericError {
    using NumericError::NumericError;
};
struct NonDecaying : NumericError {
    using NumericError::NumericError;
};
struct WrongHalfPlane : NumericError {
    using NumericError::NumericError;
};
struct NotLowerHalfPlane : NumericError {
    using NumericError::NumericError;
};
struct ZeroSpectralParameter : NumericError {
    using NumericError::NumericError;
};
struct AtPole : NumericError {
    using NumericError::NumericError;
};
struct UnsupportedVariant : NumericError {
    using NumericError::NumericError;
};
struct UnsupportedFamily : NumericError {
    using NumericError::NumericError;
};
struct AxisPoint : NumericError {
    using NumericError::NumericError;
};
struct ExtractionUnstable : NumericError {
    using NumericError::NumericError;
};
struct BoundaryZero : NumericError {
    using NumericError::NumericError;
};
struct NonIntegerWinding : NumericError {
    using NumericError::NumericError;
};
struct BudgetExceeded : NumericError {
    using NumericError::NumericError;
};
struct PoleOnContour : NumericError {
    using NumericError::NumericError;
};
struct NotAPole : NumericError {
    using NumericError::NumericError;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require_lower_half(const Cplx& z, const char* what = "argument") {
    if (!(z.imag() < 0.0))
        throw NotLowerHalfPlane(std::string(what) + " must lie in the open lower half-plane");
}

inline void require_upper_closed(const Cplx& w, const char* what = "argument") {
    if (w.imag() < 0.0)
        throw WrongHalfPlane(std::string(what) + " must satisfy im >= 0");
}

// region_of: exact-zero test on re(z) widened by an absolute band eps_axis.
inline Region region_of(const Cplx& z, double eps_axis = 0.0) {
    require_lower_half(z, "z");
    if (z.real() < -eps_axis) return Region::MinusLeft;
    if (z.real() > eps_axis) return Region::MinusRight;
    return Region::MinusAxis;
}

}  // namespace smx
