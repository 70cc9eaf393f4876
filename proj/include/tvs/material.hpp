#pragma once

// Material functions (viscosity, heat conductivity, relaxation coefficient,
// shear modulus), the thermodynamic potentials derived from the Helmholtz
// free energy, and runtime validation of the admissibility bounds.

#include <cmath>
#include <string>
#include <vector>

#include "tvs/errors.hpp"
#include "tvs/tensor2.hpp"

namespace tvs {

enum class Regime { P1, P2, P3 };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::P1: return "P1";
        case Regime::P2: return "P2";
        default: return "P3";
    }
}

// Scalar material function with analytic first and second derivatives.
// Presets only, so validation and quadrature can rely on exact derivatives.
struct ScalarFn {
    enum class Kind { Constant, Linear, Affine, ConcaveRational, Exp } kind = Kind::Constant;
    // Constant: c0;  Linear: c1*s;  Affine: c0 + c1*s;
    // ConcaveRational: c0 - c1/(1+s);  Exp: exp(s).
    double c0 = 1.0, c1 = 0.0;

    static ScalarFn constant(double c) { return {Kind::Constant, c, 0.0}; }
    static ScalarFn linear(double slope) { return {Kind::Linear, 0.0, slope}; }
    static ScalarFn affine(double a, double b) { return {Kind::Affine, a, b}; }
    static ScalarFn concave_rational(double a, double b) {
        return {Kind::ConcaveRational, a, b};
    }
    static ScalarFn exponential() { return {Kind::Exp, 0.0, 0.0}; }

    double value(double s) const {
        switch (kind) {
            case Kind::Constant: return c0;
            case Kind::Linear: return c1 * s;
            case Kind::Affine: return c0 + c1 * s;
            case Kind::ConcaveRational: return c0 - c1 / (1.0 + s);
            case Kind::Exp: return std::exp(s);
        }
        return 0.0;
    }
    double d1(double s) const {
        switch (kind) {
            case Kind::Constant: return 0.0;
            case Kind::Linear: return c1;
            case Kind::Affine: return c1;
            case Kind::ConcaveRational: {
                const double t = 1.0 + s;
                return c1 / (t * t);
            }
            case Kind::Exp: return std::exp(s);
        }
        return 0.0;
    }
    double d2(double s) const {
        switch (kind) {
            case Kind::Constant:
            case Kind::Linear:
            case Kind::Affine: return 0.0;
            case Kind::ConcaveRational: {
                const double t = 1.0 + s;
                return -2.0 * c1 / (t * t * t);
            }
            case Kind::Exp: return std::exp(s);
        }
        return 0.0;
    }
};

struct MaterialModel {
    Regime regime = Regime::P1;
    ScalarFn nu = ScalarFn::constant(1.0);
    ScalarFn kappa = ScalarFn::constant(1.0);
    ScalarFn delta = ScalarFn::constant(1.0);
    ScalarFn g = ScalarFn::constant(1.0);
    double c_v = 1.0;
    double C1 = 1.0, C2 = 2.0; // declared bound constants

    static MaterialModel preset_p1() {
        MaterialModel m;
        m.regime = Regime::P1;
        m.g = ScalarFn::constant(1.0);
        m.delta = ScalarFn::constant(1.0);
        m.C1 = 1.0;
        m.C2 = 1.0;
        return m;
    }
    static MaterialModel preset_p2() {
        MaterialModel m;
        m.regime = Regime::P2;
        m.g = ScalarFn::linear(1.0);
        m.delta = ScalarFn::constant(1.0);
        m.C1 = 1.0;
        m.C2 = 1.0;
        return m;
    }
    static MaterialModel preset_p3() {
        MaterialModel m;
        m.regime = Regime::P3;
        m.g = ScalarFn::concave_rational(2.0, 1.0);
        m.delta = ScalarFn::affine(1.0, 1.0); // 1 + s
        m.C1 = 1.0;
        m.C2 = 2.0;
        return m;
    }

    // The internal energy in P2/P3 reduces to c_v*theta when g - theta*g'
    // vanishes identically; used to shortcut the inversion.
    bool g_is_linear() const { return g.kind == ScalarFn::Kind::Linear; }
};

struct Potentials {
    double psi = 0.0, eta = 0.0, e = 0.0;
};

inline double elastic_energy_f(const SymMat2& b) {
    const double d = b.det();
    if (!(b.b11 > 0.0) || !(d > 0.0))
        throw NotPositiveDefinite("elastic_energy_f: B is not positive definite");
    return b.trace() - 2.0 - std::log(d);
}

inline void require_positive_temperature(double theta, const char* where) {
    if (!(theta > 0.0))
        throw NonPositiveTemperature(std::string(where) + ": theta <= 0");
}

inline double helmholtz_psi(const MaterialModel& m, double theta, const SymMat2& b) {
    require_positive_temperature(theta, "helmholtz_psi");
    return -m.c_v * theta * (std::log(theta) - 1.0) + m.g.value(theta) * elastic_energy_f(b);
}

inline double entropy_eta(const MaterialModel& m, double theta, const SymMat2& b) {
    require_positive_temperature(theta, "entropy_eta");
    return m.c_v * std::log(theta) - m.g.d1(theta) * elastic_energy_f(b);
}

inline double internal_energy_e(const MaterialModel& m, double theta, const SymMat2& b) {
    require_positive_temperature(theta, "internal_energy_e");
    return m.c_v * theta +
           (m.g.value(theta) - theta * m.g.d1(theta)) * elastic_energy_f(b);
}

// d e / d theta = c_v - theta g''(theta) f(B); >= c_v for concave g, which is
// what makes the pointwise inversion e -> theta well posed.
inline double internal_energy_dtheta(const MaterialModel& m, double theta,
                                     double f_of_b) {
    return m.c_v - theta * m.g.d2(theta) * f_of_b;
}

inline Potentials potentials(const MaterialModel& m, double theta, const SymMat2& b) {
    Potentials p;
    p.psi = helmholtz_psi(m, theta, b);
    p.eta = entropy_eta(m, theta, b);
    p.e = p.psi + theta * p.eta;
    return p;
}

inline SymMat2 dpsi_dB(const MaterialModel& m, double theta, const SymMat2& b) {
    require_positive_temperature(theta, "dpsi_dB");
    const SymMat2 binv = invert_spd(b);
    return (SymMat2::identity() - binv) * m.g.value(theta);
}

namespace detail {

inline double simpson(const ScalarFn& g, double lambda, double a, double fa,
                      double b, double fb, double m, double fm) {
    (void)g; (void)lambda;
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

// Remainder integrand z^lambda (g''(z) - g''(0)).  Subtracting the z = 0
// value removes the dominant z^lambda endpoint singularity, whose integral is
// known in closed form; without this, small lambda needs recursion depth
// proportional to 1/lambda.
inline double hlam_integrand(const ScalarFn& g, double lambda, double z) {
    return std::pow(z, lambda) * (g.d2(z) - g.d2(0.0));
}

inline double adaptive_simpson(const ScalarFn& g, double lambda, double a,
                               double b, double fa, double fb, double fm,
                               double whole, double tol, int depth) {
    if (depth > 80)
        throw QuadratureFailure("h_lambda: adaptive Simpson exceeded refinement budget");
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = hlam_integrand(g, lambda, lm);
    const double frm = hlam_integrand(g, lambda, rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(g, lambda, a, m, fa, fm, flm, left, 0.5 * tol, depth + 1) +
           adaptive_simpson(g, lambda, m, b, fm, fb, frm, right, 0.5 * tol, depth + 1);
}

} // namespace detail

// h_lambda(s) = integral_0^s z^lambda g''(z) dz, adaptive Simpson to absolute
// tolerance 1e-10.  Nonpositive for concave g.
inline double h_lambda(const MaterialModel& m, double lambda, double s) {
    if (!(lambda > 0.0))
        throw OutOfRange("h_lambda: lambda must be positive");
    if (s == 0.0) return 0.0;
    if (m.g.d2(0.5 * s) == 0.0 && m.g.kind != ScalarFn::Kind::Exp)
        return 0.0; // g'' identically zero for constant/linear/affine presets
    const double closed_form =
        m.g.d2(0.0) * std::pow(s, lambda + 1.0) / (lambda + 1.0);
    const double fa = detail::hlam_integrand(m.g, lambda, 0.0);
    const double fb = detail::hlam_integrand(m.g, lambda, s);
    const double fm = detail::hlam_integrand(m.g, lambda, 0.5 * s);
    const double whole = s / 6.0 * (fa + 4.0 * fm + fb);
    return closed_form + detail::adaptive_simpson(m.g, lambda, 0.0, s, fa, fb,
                                                  fm, whole, 1e-10, 0);
}

struct BoundCheck {
    std::string name;
    bool passed = true;
    double first_violation_s = -1.0;
};

struct ValidationReport {
    std::vector<BoundCheck> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    const BoundCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

// Samples s log-uniformly on (0, sample_max] (plus s = 0) and checks each
// admissibility inequality appropriate to the regime.  Violations are report
// content, not faults.
inline ValidationReport validate_bounds(const MaterialModel& m, double sample_max,
                                        int n_samples) {
    std::vector<double> samples;
    samples.push_back(0.0);
    const double s_lo = 1e-6;
    for (int i = 0; i < n_samples; ++i) {
        const double t = (n_samples == 1) ? 1.0 : double(i) / double(n_samples - 1);
        samples.push_back(s_lo * std::pow(sample_max / s_lo, t));
    }

    ValidationReport rep;
    auto check = [&](const std::string& name, auto&& predicate) {
        BoundCheck c;
        c.name = name;
        for (double s : samples) {
            if (!predicate(s)) {
                c.passed = false;
                c.first_violation_s = s;
                break;
            }
        }
        rep.checks.push_back(c);
    };

    check("kappa_bounded", [&](double s) {
        const double k = m.kappa.value(s);
        return m.C1 <= k && k <= m.C2;
    });
    check("nu_bounded", [&](double s) {
        const double n = m.nu.value(s);
        return m.C1 <= n && n <= m.C2;
    });

    if (m.regime == Regime::P1) {
        check("delta_bounded", [&](double s) {
            const double d = m.delta.value(s);
            return m.C1 <= d && d <= m.C2;
        });
        check("g_constant", [&](double s) { return m.g.d1(s) == 0.0 && m.g.value(s) > 0.0; });
    } else if (m.regime == Regime::P2) {
        check("delta_bounded", [&](double s) {
            const double d = m.delta.value(s);
            return m.C1 <= d && d <= m.C2;
        });
        check("g_linear", [&](double s) {
            return m.g.d2(s) == 0.0 && m.g.value(0.0) == 0.0 && m.g.d1(s) > 0.0;
        });
    } else {
        check("delta_affine_bounds", [&](double s) {
            const double d = m.delta.value(s);
            return m.C1 * (1.0 + s) <= d && d <= m.C2 * (1.0 + s);
        });
        check("g_bounded", [&](double s) {
            const double v = m.g.value(s);
            return m.C1 <= v && v <= m.C2;
        });
        check("g_weighted_slope", [&](double s) {
            const double w = (1.0 + s) * m.g.d1(s);
            return 0.0 <= w && w <= m.C2;
        });
        check("g_concave", [&](double s) { return m.g.d2(s) <= 0.0; });
        check("g_increasing", [&](double s) { return m.g.d1(s) >= 0.0; });
    }
    return rep;
}

} // namespace tvs
