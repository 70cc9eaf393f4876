#pragma once

// Budget and identity auditing.  Everything here is computed from states
// alone (time derivatives by differencing consecutive outputs), so the audits
// are independent of the time-stepping scheme and reusable against the
// spectral reference.

#include <cmath>
#include <string>

#include "tvs/grid.hpp"
#include "tvs/material.hpp"
#include "tvs/solver.hpp"

namespace tvs {

struct EnergySplit {
    double total = 0.0, kinetic = 0.0, internal = 0.0;
};

struct Norms {
    double L2_v = 0.0, L2_gradv = 0.0, L2_F = 0.0, L4_F = 0.0;
    double L1_theta = 0.0, L1_logtheta = 0.0, L1_fB = 0.0, L2_B = 0.0;
};

struct BudgetRecord {
    double t = 0.0;
    double E_total = 0.0, E_kin = 0.0, E_int = 0.0;
    double S_total = 0.0;
    double P_entropy = 0.0;
    double min_theta = 0.0, min_detF = 0.0;
    Norms norms;
};

inline EnergySplit total_energy(const MaterialModel& m, const State& s) {
    const Grid& g = s.v.grid;
    EnergySplit e;
    double kin = 0.0, internal = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            kin += 0.5 * (s.v.x(i, j) * s.v.x(i, j) + s.v.y(i, j) * s.v.y(i, j));
            internal += internal_energy_e(m, s.theta(i, j), bb_from_f(s.F.at(i, j)));
        }
    const double w = g.h * g.h;
    e.kinetic = kin * w;
    e.internal = internal * w;
    e.total = e.kinetic + e.internal;
    return e;
}

inline ScalarField entropy_production(const MaterialModel& m, const State& s) {
    const Grid& g = s.theta.grid;
    require_positive_temperature(min_value(s.theta), "entropy_production");
    VectorField gt = grad(s.theta, Ghost::Mirror);
    TensorField gv = grad_vec(s.v, Ghost::Flip);
    ScalarField out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double th = s.theta(i, j);
            const double gt2 = gt.x(i, j) * gt.x(i, j) + gt.y(i, j) * gt.y(i, j);
            const SymMat2 dv = sym_part(gv.at(i, j));
            const SymMat2 bmi = bb_from_f(s.F.at(i, j)) - SymMat2::identity();
            out(i, j) = m.kappa.value(th) * gt2 / (th * th) +
                        2.0 * m.nu.value(th) * frob_inner(dv, dv) / th +
                        m.delta.value(th) * frob_inner(bmi, bmi) / th;
        }
    return out;
}

inline double total_entropy(const MaterialModel& m, const State& s) {
    const Grid& g = s.theta.grid;
    double sum = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            sum += entropy_eta(m, s.theta(i, j), bb_from_f(s.F.at(i, j)));
    return sum * g.h * g.h;
}

// Rate at which the stress-diffusion term feeds the stored elastic energy:
// 2 eps * integral (g - theta g') (I - B^{-1}) F : Lap F.  The total-energy
// budget of a direct-temperature run is conserved only after subtracting its
// time integral; the energy path carries no such term.
inline double stress_diffusion_power(const MaterialModel& m, const State& s,
                                     double epsilon) {
    if (epsilon == 0.0) return 0.0;
    const Grid& g = s.F.grid;
    TensorField lap = laplacian_tensor(s.F, Ghost::Mirror);
    double sum = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const Mat2 f = s.F.at(i, j);
            const SymMat2 b = bb_from_f(f);
            const double th = s.theta(i, j);
            const double coeff = m.g.value(th) - th * m.g.d1(th);
            const Mat2 df = (SymMat2::identity() - invert_spd(b)) * f;
            sum += coeff * frob_inner(df, lap.at(i, j));
        }
    return 2.0 * epsilon * sum * g.h * g.h;
}

// Rate at which the discrete transport term of the F-equation moves stored
// elastic energy: sum of 2 (g - theta g') (I - B^{-1}) F : (-div(F (x) v)).
// The continuous counterpart is -int v . grad[(g - theta g') f(B)], which
// vanishes on periodic domains; the centered-difference value is an O(h^2)
// flux defect that the direct-temperature total-energy budget must carry.
inline double elastic_transport_defect(const MaterialModel& m, const State& s) {
    const Grid& g = s.F.grid;
    TensorField adv = detail::div_tensor_transport(s.F, s.v);
    double sum = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const Mat2 f = s.F.at(i, j);
            const SymMat2 b = bb_from_f(f);
            const double th = s.theta(i, j);
            const double coeff = m.g.value(th) - th * m.g.d1(th);
            const Mat2 df = (SymMat2::identity() - invert_spd(b)) * f;
            sum -= coeff * frob_inner(df, adv.at(i, j));
        }
    return 2.0 * sum * g.h * g.h;
}

// Discrete residual of the entropy balance over one output interval:
// [int eta]_{k+1} - [int eta]_k - dt * trapezoid(production).  Transport and
// entropy-flux divergences integrate to zero on periodic/no-flux domains.
inline double entropy_balance_residual(const MaterialModel& m, const State& a,
                                       const State& b, double dt) {
    const double ea = total_entropy(m, a), eb = total_entropy(m, b);
    const double pa = integrate(entropy_production(m, a));
    const double pb = integrate(entropy_production(m, b));
    return (eb - ea) - 0.5 * dt * (pa + pb);
}

namespace detail {

inline State midpoint_state(const State& a, const State& b) {
    State mid = a;
    mid.t = 0.5 * (a.t + b.t);
    for (std::size_t k = 0; k < mid.theta.values.size(); ++k) {
        mid.theta.values[k] = 0.5 * (a.theta.values[k] + b.theta.values[k]);
        mid.v.vx[k] = 0.5 * (a.v.vx[k] + b.v.vx[k]);
        mid.v.vy[k] = 0.5 * (a.v.vy[k] + b.v.vy[k]);
    }
    for (int p = 0; p < 4; ++p)
        for (std::size_t k = 0; k < mid.F.comp[p].size(); ++k)
            mid.F.comp[p][k] = 0.5 * (a.F.comp[p][k] + b.F.comp[p][k]);
    return mid;
}

} // namespace detail

// Pointwise residual of the log-determinant transport law
// d/dt ln det B + div(v ln det B) + delta(theta) tr(B - I) = 0,
// evaluated with centered time differencing around the interval midpoint.
inline ScalarField lndet_transport_residual(const MaterialModel& m,
                                            const State& a, const State& b,
                                            double dt) {
    const Grid& g = a.theta.grid;
    State mid = detail::midpoint_state(a, b);
    ScalarField lndet_mid(g), ddt(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double da = bb_from_f(a.F.at(i, j)).det();
            const double db = bb_from_f(b.F.at(i, j)).det();
            const double dm = bb_from_f(mid.F.at(i, j)).det();
            if (!(da > 0.0 && db > 0.0 && dm > 0.0))
                throw NotPositiveDefinite("lndet_transport_residual: det B <= 0");
            ddt(i, j) = (std::log(db) - std::log(da)) / dt;
            lndet_mid(i, j) = std::log(dm);
        }
    ScalarField transport = detail::div_scalar_transport(lndet_mid, mid.v);
    ScalarField out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const SymMat2 bmi = bb_from_f(mid.F.at(i, j)) - SymMat2::identity();
            out(i, j) = ddt(i, j) + transport(i, j) +
                        m.delta.value(mid.theta(i, j)) * bmi.trace();
        }
    return out;
}

// Residual of the f(B) transport law
// d/dt f(B) + div(f(B) v) + delta |B-I|^2 - 2 (B-I):Dv
//   - 2 epsilon (I - B^{-1}) F : lap F = 0 (pointwise).
// Pass the solver's epsilon to audit the full dynamics; with the default 0
// the residual carries an O(epsilon) floor from the F-diffusion term.
inline ScalarField f_transport_residual(const MaterialModel& m, const State& a,
                                        const State& b, double dt,
                                        double epsilon = 0.0) {
    const Grid& g = a.theta.grid;
    State mid = detail::midpoint_state(a, b);
    ScalarField fmid(g), ddt(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            ddt(i, j) = (elastic_energy_f(bb_from_f(b.F.at(i, j))) -
                         elastic_energy_f(bb_from_f(a.F.at(i, j)))) / dt;
            fmid(i, j) = elastic_energy_f(bb_from_f(mid.F.at(i, j)));
        }
    ScalarField transport = detail::div_scalar_transport(fmid, mid.v);
    TensorField gv = grad_vec(mid.v, Ghost::Flip);
    TensorField lap = laplacian_tensor(mid.F, Ghost::Mirror);
    ScalarField out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const Mat2 f = mid.F.at(i, j);
            const SymMat2 bmat = bb_from_f(f);
            const SymMat2 bmi = bmat - SymMat2::identity();
            const SymMat2 dv = sym_part(gv.at(i, j));
            const Mat2 df = (SymMat2::identity() - invert_spd(bmat)) * f;
            out(i, j) = ddt(i, j) + transport(i, j) +
                        m.delta.value(mid.theta(i, j)) * frob_inner(bmi, bmi) -
                        2.0 * frob_inner(bmi, dv) -
                        2.0 * epsilon * frob_inner(df, lap.at(i, j));
        }
    return out;
}

struct RenormalizedResidual {
    double statement = 0.0;  // delta-terms grouped as in the identity
    double regrouped = 0.0;  // delta-terms expanded; equal up to round-off
};

// Global (domain-integrated) residual of the renormalized temperature
// identity over one output interval; transport and flux terms telescope to
// zero on periodic domains and are omitted from the global balance.
inline RenormalizedResidual renormalized_identity_residual(
    const MaterialModel& m, double lambda, const State& a, const State& b,
    double dt) {
    const Grid& g = a.theta.grid;
    auto x_integral = [&](const State& s) {
        double sum = 0.0;
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                const double th = s.theta(i, j);
                const double f = elastic_energy_f(bb_from_f(s.F.at(i, j)));
                sum += std::pow(th, lambda) / lambda - h_lambda(m, lambda, th) * f;
            }
        return sum * g.h * g.h;
    };
    const double xa = x_integral(a), xb = x_integral(b);

    State mid = detail::midpoint_state(a, b);
    VectorField gt = grad(mid.theta, Ghost::Mirror);
    TensorField gv = grad_vec(mid.v, Ghost::Flip);
    double cross = 0.0, rhs_statement = 0.0, rhs_regrouped = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double th = mid.theta(i, j);
            const double thl = std::pow(th, lambda);
            const double hl = h_lambda(m, lambda, th);
            const double gp = m.g.d1(th);
            const SymMat2 bmi = bb_from_f(mid.F.at(i, j)) - SymMat2::identity();
            const SymMat2 dv = sym_part(gv.at(i, j));
            cross += 2.0 * frob_inner(bmi, dv) * (gp * thl - hl);

            const double gt2 = gt.x(i, j) * gt.x(i, j) + gt.y(i, j) * gt.y(i, j);
            const double bmi2 = frob_inner(bmi, bmi);
            const double kap = m.kappa.value(th), nuv = m.nu.value(th);
            const double del = m.delta.value(th);
            rhs_statement +=
                ((1.0 - lambda) * kap * gt2 / (th * th) +
                 2.0 * nuv * frob_inner(dv, dv) / th +
                 del * bmi2 / th * (hl * std::pow(th, 1.0 - lambda) + 1.0 - gp * th)) *
                thl;
            rhs_regrouped +=
                ((1.0 - lambda) * kap * gt2 / (th * th) +
                 2.0 * nuv * frob_inner(dv, dv) / th) * thl +
                del * (hl + std::pow(th, lambda - 1.0) - gp * thl) * bmi2;
        }
    const double w = g.h * g.h;
    cross *= w;
    rhs_statement *= w;
    rhs_regrouped *= w;

    RenormalizedResidual r;
    r.statement = (xb - xa) - dt * (cross + rhs_statement);
    r.regrouped = (xb - xa) - dt * (cross + rhs_regrouped);
    return r;
}

inline Norms apriori_norms(const MaterialModel& m, const State& s) {
    const Grid& g = s.theta.grid;
    TensorField gv = grad_vec(s.v, Ghost::Flip);
    Norms n;
    double v2 = 0.0, gv2 = 0.0, f2 = 0.0, f4 = 0.0;
    double th1 = 0.0, lth1 = 0.0, fb1 = 0.0, b2 = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            v2 += s.v.x(i, j) * s.v.x(i, j) + s.v.y(i, j) * s.v.y(i, j);
            const Mat2 gvm = gv.at(i, j);
            gv2 += frob_inner(gvm, gvm);
            const Mat2 f = s.F.at(i, j);
            const double fn2 = frob_inner(f, f);
            f2 += fn2;
            f4 += fn2 * fn2;
            const double th = s.theta(i, j);
            th1 += std::abs(th);
            lth1 += std::abs(std::log(th));
            const SymMat2 b = bb_from_f(f);
            fb1 += std::abs(elastic_energy_f(b));
            b2 += frob_inner(b, b);
        }
    (void)m;
    const double w = g.h * g.h;
    n.L2_v = std::sqrt(v2 * w);
    n.L2_gradv = std::sqrt(gv2 * w);
    n.L2_F = std::sqrt(f2 * w);
    n.L4_F = std::pow(f4 * w, 0.25);
    n.L1_theta = th1 * w;
    n.L1_logtheta = lth1 * w;
    n.L1_fB = fb1 * w;
    n.L2_B = std::sqrt(b2 * w);
    return n;
}

struct PositivityReport {
    double min_theta = 0.0;
    double min_detF = 0.0;
    bool pass = true;
    int cell_i = -1, cell_j = -1;
    std::string reason;
};

inline PositivityReport positivity_check(const State& s, double r,
                                         bool enforce_r = true) {
    const Grid& g = s.theta.grid;
    PositivityReport rep;
    rep.min_theta = s.theta(0, 0);
    rep.min_detF = s.F.at(0, 0).det();
    const double theta_floor = enforce_r ? r - 1e-10 : 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double th = s.theta(i, j);
            const double df = s.F.at(i, j).det();
            rep.min_theta = std::min(rep.min_theta, th);
            rep.min_detF = std::min(rep.min_detF, df);
            const bool theta_ok = enforce_r ? th >= theta_floor : th > 0.0;
            if (rep.pass && (!theta_ok || !(df > 0.0))) {
                rep.pass = false;
                rep.cell_i = i;
                rep.cell_j = j;
                rep.reason = !theta_ok ? "theta below floor" : "detF not positive";
            }
        }
    return rep;
}

inline BudgetRecord budget_record(const MaterialModel& m, const State& s) {
    BudgetRecord r;
    r.t = s.t;
    const EnergySplit e = total_energy(m, s);
    r.E_total = e.total;
    r.E_kin = e.kinetic;
    r.E_int = e.internal;
    r.S_total = total_entropy(m, s);
    r.P_entropy = integrate(entropy_production(m, s));
    const PositivityReport pr = positivity_check(s, 0.0, false);
    r.min_theta = pr.min_theta;
    r.min_detF = pr.min_detF;
    r.norms = apriori_norms(m, s);
    return r;
}

} // namespace tvs
