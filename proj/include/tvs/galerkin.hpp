#pragma once

// Low-mode spectral Galerkin reference on the periodic torus.  The coefficient
// ODE system is assembled by projecting the pointwise equation residuals onto
// an L2-orthonormal trigonometric basis; all trigonometric-polynomial
// integrands are integrated exactly by the uniform quadrature grid.  This
// module shares no spatial operators with the finite-difference solver, so it
// serves as an independent cross-check.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "tvs/errors.hpp"
#include "tvs/grid.hpp"
#include "tvs/material.hpp"
#include "tvs/solver.hpp"

namespace tvs {

namespace detail {
inline bool same_fn(const ScalarFn& a, const ScalarFn& b) {
    return a.kind == b.kind && a.c0 == b.c0 && a.c1 == b.c1;
}
inline bool same_material(const MaterialModel& a, const MaterialModel& b) {
    return a.regime == b.regime && same_fn(a.nu, b.nu) && same_fn(a.kappa, b.kappa) &&
           same_fn(a.delta, b.delta) && same_fn(a.g, b.g) && a.c_v == b.c_v;
}
} // namespace detail

// One real scalar basis function: 1 for k = 0, else sqrt(2)*cos/sin(2 pi k.x).
struct TrigMode {
    int k1 = 0, k2 = 0;
    bool is_sin = false;
    int partner = -1;   // index of the opposite-phase mode with the same k
    double k_sq = 0.0;  // |k|^2
};

struct CoeffState {
    std::vector<double> alpha; // velocity modes
    std::vector<double> beta;  // tensor modes, layout [4*s + c], c = (11,12,21,22)
    std::vector<double> gamma; // temperature modes
    double t = 0.0;
};

class GalerkinBasis {
public:
    int n_flow = 0, m_temp = 0;

    GalerkinBasis(int n_flow_, int m_temp_) : n_flow(n_flow_), m_temp(m_temp_) {
        if (n_flow < 1 || m_temp < 1)
            throw ConfigParse("galerkin basis: cutoffs must be >= 1");
        build_modes();
        build_quadrature();
    }

    int quad_points() const { return nq_; }
    std::size_t n_scalar() const { return modes_.size(); }
    std::size_t n_velocity() const { return vel_scalar_.size(); }
    std::size_t n_tensor() const { return 4 * flow_scalar_.size(); }
    std::size_t n_temperature() const { return temp_scalar_.size(); }
    const TrigMode& mode(std::size_t m) const { return modes_[m]; }
    const std::vector<std::size_t>& flow_modes() const { return flow_scalar_; }
    const std::vector<std::size_t>& temp_modes() const { return temp_scalar_; }
    const std::vector<std::size_t>& velocity_modes() const { return vel_scalar_; }

    // unit vector perpendicular to k for velocity mode j
    double perp_x(std::size_t j) const { return perp_[j][0]; }
    double perp_y(std::size_t j) const { return perp_[j][1]; }

    double mode_value(std::size_t m, double x, double y) const {
        const TrigMode& md = modes_[m];
        if (md.k1 == 0 && md.k2 == 0) return 1.0;
        const double ph = 2.0 * std::numbers::pi * (md.k1 * x + md.k2 * y);
        return std::numbers::sqrt2 * (md.is_sin ? std::sin(ph) : std::cos(ph));
    }

    const std::vector<double>& table(std::size_t m) const { return table_[m]; }
    double quad_weight() const { return 1.0 / double(std::size_t(nq_) * nq_); }

    // synthesis of a scalar trig polynomial on the quadrature grid
    void synth(const std::vector<std::size_t>& which, const double* coef,
               std::vector<double>& out) const {
        out.assign(std::size_t(nq_) * nq_, 0.0);
        for (std::size_t s = 0; s < which.size(); ++s) {
            const double c = coef[s];
            if (c == 0.0) continue;
            const std::vector<double>& t = table_[which[s]];
            for (std::size_t q = 0; q < out.size(); ++q) out[q] += c * t[q];
        }
    }

    // synthesis of the derivative along axis (0 = x, 1 = y)
    void synth_deriv(const std::vector<std::size_t>& which, const double* coef,
                     int axis, std::vector<double>& out) const {
        out.assign(std::size_t(nq_) * nq_, 0.0);
        const double twopi = 2.0 * std::numbers::pi;
        for (std::size_t s = 0; s < which.size(); ++s) {
            const TrigMode& md = modes_[which[s]];
            if (md.partner < 0) continue;
            const double ka = axis == 0 ? md.k1 : md.k2;
            // d cos = -2 pi k * sin ; d sin = +2 pi k * cos
            const double c = coef[s] * twopi * ka * (md.is_sin ? 1.0 : -1.0);
            if (c == 0.0) continue;
            const std::vector<double>& t = table_[std::size_t(md.partner)];
            for (std::size_t q = 0; q < out.size(); ++q) out[q] += c * t[q];
        }
    }

    // L2 projection of grid data onto the listed modes
    void project(const std::vector<double>& f, const std::vector<std::size_t>& which,
                 double* out) const {
        const double w = quad_weight();
        for (std::size_t s = 0; s < which.size(); ++s) {
            const std::vector<double>& t = table_[which[s]];
            double acc = 0.0;
            for (std::size_t q = 0; q < f.size(); ++q) acc += f[q] * t[q];
            out[s] = acc * w;
        }
    }

    // index of a scalar mode within a mode list; -1 if absent
    static long find_in(const std::vector<std::size_t>& which, std::size_t m) {
        for (std::size_t s = 0; s < which.size(); ++s)
            if (which[s] == m) return long(s);
        return -1;
    }

private:
    std::vector<TrigMode> modes_;
    std::vector<std::size_t> flow_scalar_, temp_scalar_, vel_scalar_;
    std::vector<std::array<double, 2>> perp_;
    std::vector<std::vector<double>> table_;
    int nq_ = 0;

    void build_modes() {
        modes_.push_back(TrigMode{}); // constant mode
        const int kmax = std::max(n_flow, m_temp);
        for (int k1 = 0; k1 <= kmax; ++k1)
            for (int k2 = -kmax; k2 <= kmax; ++k2) {
                if (k1 == 0 && k2 <= 0) continue; // half-space representatives
                TrigMode c{k1, k2, false, int(modes_.size()) + 1,
                           double(k1) * k1 + double(k2) * k2};
                TrigMode s{k1, k2, true, int(modes_.size()),
                           double(k1) * k1 + double(k2) * k2};
                modes_.push_back(c);
                modes_.push_back(s);
            }
        for (std::size_t m = 0; m < modes_.size(); ++m) {
            const TrigMode& md = modes_[m];
            const int kinf = std::max(std::abs(md.k1), std::abs(md.k2));
            if (kinf <= n_flow) flow_scalar_.push_back(m);
            if (kinf <= m_temp) temp_scalar_.push_back(m);
            if (kinf <= n_flow && kinf > 0) {
                vel_scalar_.push_back(m);
                const double kn = std::sqrt(md.k_sq);
                perp_.push_back({-md.k2 / kn, md.k1 / kn});
            }
        }
    }

    void build_quadrature() {
        // exact for products up to total per-axis frequency 4*n_flow + 2*m_temp
        nq_ = 4 * n_flow + 2 * m_temp + 2;
        if (nq_ < 8) nq_ = 8;
        table_.resize(modes_.size());
        for (std::size_t m = 0; m < modes_.size(); ++m) {
            table_[m].resize(std::size_t(nq_) * nq_);
            for (int jq = 0; jq < nq_; ++jq)
                for (int iq = 0; iq < nq_; ++iq)
                    table_[m][std::size_t(jq) * nq_ + iq] =
                        mode_value(m, (iq + 0.5) / nq_, (jq + 0.5) / nq_);
        }
    }
};

inline CoeffState zero_coeffs(const GalerkinBasis& b) {
    CoeffState c;
    c.alpha.assign(b.n_velocity(), 0.0);
    c.beta.assign(b.n_tensor(), 0.0);
    c.gamma.assign(b.n_temperature(), 0.0);
    return c;
}

// Coefficients of the rest state (v, F, theta) = (0, I, theta0).
inline CoeffState rest_coeffs(const GalerkinBasis& b, double theta0 = 1.0) {
    CoeffState c = zero_coeffs(b);
    const long s0 = GalerkinBasis::find_in(b.flow_modes(), 0);
    c.beta[std::size_t(4 * s0 + 0)] = 1.0;
    c.beta[std::size_t(4 * s0 + 3)] = 1.0;
    const long t0 = GalerkinBasis::find_in(b.temp_modes(), 0);
    c.gamma[std::size_t(t0)] = theta0;
    return c;
}

namespace detail {

struct GalerkinFields {
    // all arrays are quadrature-grid sized
    std::vector<double> v[2], gv[4];        // velocity and its gradient
    std::vector<double> F[4], gF[4][2], lF[4]; // F, grad F, Laplacian F
    std::vector<double> th, gth[2], lth;    // theta, grad theta, Laplacian theta
};

inline void synthesize_fields(const GalerkinBasis& b, const CoeffState& c,
                              GalerkinFields& f) {
    const std::size_t nm = b.n_scalar();
    // velocity: accumulate per-component scalar coefficients from alpha
    std::vector<double> cv[2];
    cv[0].assign(nm, 0.0);
    cv[1].assign(nm, 0.0);
    const auto& vm = b.velocity_modes();
    for (std::size_t j = 0; j < vm.size(); ++j) {
        cv[0][vm[j]] += c.alpha[j] * b.perp_x(j);
        cv[1][vm[j]] += c.alpha[j] * b.perp_y(j);
    }
    std::vector<std::size_t> all(nm);
    for (std::size_t m = 0; m < nm; ++m) all[m] = m;
    for (int a = 0; a < 2; ++a) {
        b.synth(all, cv[a].data(), f.v[a]);
        b.synth_deriv(all, cv[a].data(), 0, f.gv[2 * a + 0]);
        b.synth_deriv(all, cv[a].data(), 1, f.gv[2 * a + 1]);
    }

    const auto& fm = b.flow_modes();
    std::vector<double> lap_coef(fm.size());
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    for (int comp = 0; comp < 4; ++comp) {
        std::vector<double> coef(fm.size());
        for (std::size_t s = 0; s < fm.size(); ++s) {
            coef[s] = c.beta[4 * s + std::size_t(comp)];
            lap_coef[s] = -four_pi2 * b.mode(fm[s]).k_sq * coef[s];
        }
        b.synth(fm, coef.data(), f.F[comp]);
        b.synth_deriv(fm, coef.data(), 0, f.gF[comp][0]);
        b.synth_deriv(fm, coef.data(), 1, f.gF[comp][1]);
        b.synth(fm, lap_coef.data(), f.lF[comp]);
    }

    const auto& tm = b.temp_modes();
    std::vector<double> tlap(tm.size());
    for (std::size_t s = 0; s < tm.size(); ++s)
        tlap[s] = -four_pi2 * b.mode(tm[s]).k_sq * c.gamma[s];
    b.synth(tm, c.gamma.data(), f.th);
    b.synth_deriv(tm, c.gamma.data(), 0, f.gth[0]);
    b.synth_deriv(tm, c.gamma.data(), 1, f.gth[1]);
    b.synth(tm, tlap.data(), f.lth);
}

} // namespace detail

// Right side of the coefficient ODE system: each row is the L2 projection of
// the corresponding equation residual onto one basis function.  The pressure
// drops because the velocity modes are divergence-free.
inline CoeffState assemble_rhs(const MaterialModel& m, const GalerkinBasis& b,
                               const CoeffState& c, double epsilon) {
    detail::GalerkinFields f;
    detail::synthesize_fields(b, c, f);
    const std::size_t np = f.th.size();
    const double twopi = 2.0 * std::numbers::pi;

    CoeffState d = zero_coeffs(b);
    d.t = 1.0;

    // --- velocity rows: d alpha_j = int (v (x) v - S) : grad(omega_j) ---
    std::vector<double> G[4];
    for (auto& g : G) g.resize(np);
    for (std::size_t q = 0; q < np; ++q) {
        const double th = f.th[q];
        const double nu = m.nu.value(th), gq = m.g.value(th);
        const Mat2 gv{f.gv[0][q], f.gv[1][q], f.gv[2][q], f.gv[3][q]};
        const SymMat2 dv = sym_part(gv);
        const Mat2 F{f.F[0][q], f.F[1][q], f.F[2][q], f.F[3][q]};
        const SymMat2 B = bb_from_f(F);
        const Mat2 S = dv.full() * (2.0 * nu) + B.full() * (2.0 * gq);
        G[0][q] = f.v[0][q] * f.v[0][q] - S.a11;
        G[1][q] = f.v[0][q] * f.v[1][q] - S.a12;
        G[2][q] = f.v[1][q] * f.v[0][q] - S.a21;
        G[3][q] = f.v[1][q] * f.v[1][q] - S.a22;
    }
    std::vector<double> proj[4];
    for (int ab = 0; ab < 4; ++ab) {
        proj[ab].resize(b.n_scalar());
        std::vector<std::size_t> all(b.n_scalar());
        for (std::size_t mm = 0; mm < all.size(); ++mm) all[mm] = mm;
        b.project(G[ab], all, proj[ab].data());
    }
    const auto& vm = b.velocity_modes();
    for (std::size_t j = 0; j < vm.size(); ++j) {
        const TrigMode& md = b.mode(vm[j]);
        const double px = b.perp_x(j), py = b.perp_y(j);
        const std::size_t pr = std::size_t(md.partner);
        const double sgn = md.is_sin ? 1.0 : -1.0;
        double acc = 0.0;
        acc += px * md.k1 * proj[0][pr] + px * md.k2 * proj[1][pr];
        acc += py * md.k1 * proj[2][pr] + py * md.k2 * proj[3][pr];
        d.alpha[j] = sgn * twopi * acc;
    }

    // --- tensor rows: project the pointwise F-equation residual ---
    std::vector<double> R[4];
    for (auto& r : R) r.resize(np);
    for (std::size_t q = 0; q < np; ++q) {
        const double th = f.th[q];
        const double del = m.delta.value(th);
        const Mat2 F{f.F[0][q], f.F[1][q], f.F[2][q], f.F[3][q]};
        const Mat2 gv{f.gv[0][q], f.gv[1][q], f.gv[2][q], f.gv[3][q]};
        const SymMat2 B = bb_from_f(F);
        const Mat2 relax = (B * F - F) * (0.5 * del);
        const Mat2 gvF = gv * F;
        for (int comp = 0; comp < 4; ++comp) {
            const double adv = f.v[0][q] * f.gF[comp][0][q] +
                               f.v[1][q] * f.gF[comp][1][q];
            const double rel = comp == 0 ? relax.a11 : comp == 1 ? relax.a12
                             : comp == 2 ? relax.a21 : relax.a22;
            const double gvf = comp == 0 ? gvF.a11 : comp == 1 ? gvF.a12
                             : comp == 2 ? gvF.a21 : gvF.a22;
            R[comp][q] = -adv + gvf - rel + epsilon * f.lF[comp][q];
        }
    }
    const auto& fm = b.flow_modes();
    std::vector<double> prow(fm.size());
    for (int comp = 0; comp < 4; ++comp) {
        b.project(R[comp], fm, prow.data());
        for (std::size_t s = 0; s < fm.size(); ++s)
            d.beta[4 * s + std::size_t(comp)] = prow[s];
    }

    // --- temperature rows (direct form) ---
    std::vector<double> r(np);
    for (std::size_t q = 0; q < np; ++q) {
        const double th = f.th[q];
        const double kap = m.kappa.value(th), kapp = m.kappa.d1(th);
        const double nu = m.nu.value(th), del = m.delta.value(th);
        const Mat2 gv{f.gv[0][q], f.gv[1][q], f.gv[2][q], f.gv[3][q]};
        const SymMat2 dv = sym_part(gv);
        const Mat2 F{f.F[0][q], f.F[1][q], f.F[2][q], f.F[3][q]};
        const SymMat2 bmi = bb_from_f(F) - SymMat2::identity();
        const double gth2 = f.gth[0][q] * f.gth[0][q] + f.gth[1][q] * f.gth[1][q];
        const double adv = f.v[0][q] * f.gth[0][q] + f.v[1][q] * f.gth[1][q];
        r[q] = -adv + kapp * gth2 + kap * f.lth[q] +
               2.0 * nu * frob_inner(dv, dv) + del * frob_inner(bmi, bmi);
    }
    b.project(r, b.temp_modes(), d.gamma.data());
    return d;
}

// Dissipation functional whose negative should equal
// d/dt [ 1/2 sum alpha^2 + sum beta^2 ] along the coefficient flow.
inline double galerkin_energy_dissipation(const MaterialModel& m,
                                          const GalerkinBasis& b,
                                          const CoeffState& c, double epsilon) {
    detail::GalerkinFields f;
    detail::synthesize_fields(b, c, f);
    double acc = 0.0;
    for (std::size_t q = 0; q < f.th.size(); ++q) {
        const double th = f.th[q];
        const Mat2 gv{f.gv[0][q], f.gv[1][q], f.gv[2][q], f.gv[3][q]};
        const SymMat2 dv = sym_part(gv);
        const Mat2 F{f.F[0][q], f.F[1][q], f.F[2][q], f.F[3][q]};
        const SymMat2 B = bb_from_f(F);
        double gF2 = 0.0;
        for (int comp = 0; comp < 4; ++comp)
            gF2 += f.gF[comp][0][q] * f.gF[comp][0][q] +
                   f.gF[comp][1][q] * f.gF[comp][1][q];
        acc += 2.0 * m.nu.value(th) * frob_inner(dv, dv) +
               m.delta.value(th) * (frob_inner(B, B) - frob_inner(F, F)) +
               2.0 * epsilon * gF2;
    }
    return acc * b.quad_weight();
}

inline std::vector<CoeffState> integrate_rk4(const MaterialModel& m,
                                             const GalerkinBasis& b,
                                             const CoeffState& c0, double epsilon,
                                             double dt, double T, int stride = 1) {
    if (!(dt > 0.0)) throw ConfigParse("integrate_rk4: dt must be positive");
    auto check = [](const CoeffState& c) {
        auto bad = [](const std::vector<double>& v) {
            for (double x : v)
                if (!(std::abs(x) <= 1e12)) return true;
            return false;
        };
        if (bad(c.alpha) || bad(c.beta) || bad(c.gamma))
            throw BlowupDetected("galerkin coefficients exceeded 1e12");
    };
    auto axpy = [](CoeffState& y, double a, const CoeffState& x) {
        for (std::size_t i = 0; i < y.alpha.size(); ++i) y.alpha[i] += a * x.alpha[i];
        for (std::size_t i = 0; i < y.beta.size(); ++i) y.beta[i] += a * x.beta[i];
        for (std::size_t i = 0; i < y.gamma.size(); ++i) y.gamma[i] += a * x.gamma[i];
    };

    std::vector<CoeffState> out;
    CoeffState c = c0;
    out.push_back(c);
    const long nsteps = std::lround(T / dt);
    for (long step = 0; step < nsteps; ++step) {
        CoeffState k1 = assemble_rhs(m, b, c, epsilon);
        CoeffState s = c;
        axpy(s, 0.5 * dt, k1);
        CoeffState k2 = assemble_rhs(m, b, s, epsilon);
        s = c;
        axpy(s, 0.5 * dt, k2);
        CoeffState k3 = assemble_rhs(m, b, s, epsilon);
        s = c;
        axpy(s, dt, k3);
        CoeffState k4 = assemble_rhs(m, b, s, epsilon);
        axpy(c, dt / 6.0, k1);
        axpy(c, dt / 3.0, k2);
        axpy(c, dt / 3.0, k3);
        axpy(c, dt / 6.0, k4);
        c.t = (step + 1) * dt;
        check(c);
        if ((step + 1) % stride == 0 || step + 1 == nsteps) out.push_back(c);
    }
    return out;
}

// Evaluates the spectral solution at the cell centers of a finite-difference
// grid (used for initial data and cross-validation).
inline State synthesize_state(const GalerkinBasis& b, const CoeffState& c,
                              const Grid& g) {
    State s = State::stationary(g, 0.0);
    s.t = c.t;
    const auto& vm = b.velocity_modes();
    const auto& fm = b.flow_modes();
    const auto& tm = b.temp_modes();
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i), y = g.y(j);
            double vx = 0.0, vy = 0.0;
            for (std::size_t k = 0; k < vm.size(); ++k) {
                const double val = b.mode_value(vm[k], x, y);
                vx += c.alpha[k] * b.perp_x(k) * val;
                vy += c.alpha[k] * b.perp_y(k) * val;
            }
            s.v.x(i, j) = vx;
            s.v.y(i, j) = vy;
            Mat2 F = Mat2::zero();
            for (std::size_t k = 0; k < fm.size(); ++k) {
                const double val = b.mode_value(fm[k], x, y);
                F.a11 += c.beta[4 * k + 0] * val;
                F.a12 += c.beta[4 * k + 1] * val;
                F.a21 += c.beta[4 * k + 2] * val;
                F.a22 += c.beta[4 * k + 3] * val;
            }
            s.F.set(i, j, F);
            double th = 0.0;
            for (std::size_t k = 0; k < tm.size(); ++k)
                th += c.gamma[k] * b.mode_value(tm[k], x, y);
            s.theta(i, j) = th;
        }
    return s;
}

struct DiscrepancyRow {
    double t = 0.0;
    double d_v = 0.0, d_theta = 0.0, d_F = 0.0;
};

// L2 discrepancies between a spectral trajectory and a finite-difference
// trajectory at the overlapping output times.
inline std::vector<DiscrepancyRow> compare_to_fd(
    const GalerkinBasis& b, const std::vector<CoeffState>& gal,
    const MaterialModel& model_gal, const std::vector<State>& fd,
    const MaterialModel& model_fd) {
    if (!detail::same_material(model_gal, model_fd))
        throw IncompatibleScenario("galerkin-compare: material models differ");
    if (gal.empty() || fd.empty())
        throw IncompatibleScenario("galerkin-compare: empty trajectory");

    std::vector<DiscrepancyRow> rows;
    for (const State& s : fd) {
        const CoeffState* match = nullptr;
        for (const CoeffState& c : gal)
            if (std::abs(c.t - s.t) <= 1e-9) {
                match = &c;
                break;
            }
        if (!match) continue;
        const Grid& g = s.theta.grid;
        State ref = synthesize_state(b, *match, g);
        double dv = 0.0, dth = 0.0, dF = 0.0;
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                const double ex = s.v.x(i, j) - ref.v.x(i, j);
                const double ey = s.v.y(i, j) - ref.v.y(i, j);
                dv += ex * ex + ey * ey;
                const double et = s.theta(i, j) - ref.theta(i, j);
                dth += et * et;
                const Mat2 ef = s.F.at(i, j) - ref.F.at(i, j);
                dF += frob_inner(ef, ef);
            }
        const double w = g.h * g.h;
        rows.push_back({s.t, std::sqrt(dv * w), std::sqrt(dth * w), std::sqrt(dF * w)});
    }
    if (rows.empty())
        throw IncompatibleScenario("galerkin-compare: no overlapping output times");
    return rows;
}

} // namespace tvs
