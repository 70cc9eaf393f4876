#pragma once

// Pointwise 2x2 matrix algebra for the deformation gradient F and the
// conformation tensor B = F F^T.

#include <cmath>

#include "tvs/errors.hpp"

namespace tvs {

struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 zero() { return {}; }

    constexpr double trace() const { return a11 + a22; }
    constexpr double det() const { return a11 * a22 - a12 * a21; }

    constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }

    constexpr Mat2 operator+(const Mat2& o) const {
        return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
    }
    constexpr Mat2 operator-(const Mat2& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
    constexpr Mat2 operator*(double s) const {
        return {a11 * s, a12 * s, a21 * s, a22 * s};
    }
    constexpr Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    constexpr Mat2& operator+=(const Mat2& o) {
        a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
        return *this;
    }
};

inline constexpr Mat2 operator*(double s, const Mat2& m) { return m * s; }

// Symmetric 2x2 matrix stored as three entries, so asymmetry is never
// representable.  Used for B = F F^T and for d(psi)/dB.
struct SymMat2 {
    double b11 = 0.0, b12 = 0.0, b22 = 0.0;

    static constexpr SymMat2 identity() { return {1.0, 0.0, 1.0}; }
    static constexpr SymMat2 diag(double a, double b) { return {a, 0.0, b}; }

    constexpr double trace() const { return b11 + b22; }
    constexpr double det() const { return b11 * b22 - b12 * b12; }

    constexpr Mat2 full() const { return {b11, b12, b12, b22}; }

    constexpr SymMat2 operator+(const SymMat2& o) const {
        return {b11 + o.b11, b12 + o.b12, b22 + o.b22};
    }
    constexpr SymMat2 operator-(const SymMat2& o) const {
        return {b11 - o.b11, b12 - o.b12, b22 - o.b22};
    }
    constexpr SymMat2 operator*(double s) const {
        return {b11 * s, b12 * s, b22 * s};
    }

    // Leading-minor test, strict: the paper's theory needs det B > 0 exactly.
    constexpr bool positive_definite() const {
        return b11 > 0.0 && det() > 0.0;
    }
};

inline constexpr Mat2 operator*(const SymMat2& s, const Mat2& m) {
    return s.full() * m;
}

inline constexpr SymMat2 bb_from_f(const Mat2& f) {
    return {f.a11 * f.a11 + f.a12 * f.a12,
            f.a11 * f.a21 + f.a12 * f.a22,
            f.a21 * f.a21 + f.a22 * f.a22};
}

inline SymMat2 invert_spd(const SymMat2& b) {
    const double d = b.det();
    if (!(b.b11 > 0.0) || !(d > 0.0))
        throw NotPositiveDefinite("invert_spd: matrix is not positive definite");
    return {b.b22 / d, -b.b12 / d, b.b11 / d};
}

inline constexpr double frob_inner(const Mat2& a, const Mat2& b) {
    return a.a11 * b.a11 + a.a12 * b.a12 + a.a21 * b.a21 + a.a22 * b.a22;
}

inline constexpr double frob_inner(const SymMat2& a, const SymMat2& b) {
    return a.b11 * b.b11 + 2.0 * a.b12 * b.b12 + a.b22 * b.b22;
}

inline double frob_norm(const Mat2& a) { return std::sqrt(frob_inner(a, a)); }
inline double frob_norm(const SymMat2& a) { return std::sqrt(frob_inner(a, a)); }

inline constexpr SymMat2 sym_part(const Mat2& a) {
    return {a.a11, 0.5 * (a.a12 + a.a21), a.a22};
}

} // namespace tvs
