#pragma once

// Manufactured-solution verification.  A smooth exact solution is chosen, the
// corresponding source terms are computed as the continuous-equation residual
// evaluated with 4th-order finite differences (two orders more accurate than
// the solver's stencils, so the O(h^4) source error is negligible against the
// O(h^2) discretization error being measured), and convergence orders of the
// forced solver are measured against the exact fields.

#include <cmath>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "tvs/audit.hpp"
#include "tvs/errors.hpp"
#include "tvs/grid.hpp"
#include "tvs/material.hpp"
#include "tvs/solver.hpp"

namespace tvs {

struct ManufacturedCase {
    double a_v = 0.1;     // stream-function amplitude
    double a_theta = 0.2; // temperature amplitude, < 0.5 keeps theta > 0.5
    double a_F = 0.2;     // tensor amplitude, < 0.3 keeps det F > 0
    int k = 1;            // spatial frequency

    void validate() const {
        if (!(a_theta < 0.5) || !(a_F < 0.3) || k < 1)
            throw ConfigParse("manufactured case: need a_theta < 0.5, a_F < 0.3, k >= 1");
    }
};

namespace detail {

// fixed unit-Frobenius symmetric direction of the F perturbation
inline Mat2 mms_direction() {
    const double s = 1.0 / std::numbers::sqrt2;
    return {0.0, s, s, 0.0};
}

struct MmsPoint {
    double vx, vy, theta;
    Mat2 F;
    double vx_t, vy_t, theta_t;
    Mat2 F_t;
};

inline MmsPoint mms_eval(const ManufacturedCase& c, double x, double y, double t) {
    const double tp = 2.0 * std::numbers::pi * c.k;
    const double sx = std::sin(tp * x), cx = std::cos(tp * x);
    const double sy = std::sin(tp * y), cy = std::cos(tp * y);
    const double ct = std::cos(t), st = std::sin(t);
    MmsPoint p;
    // v = (d psi / dy, -d psi / dx), psi = a_v sin sin cos(t)
    const double vx_prof = c.a_v * tp * sx * cy;
    const double vy_prof = -c.a_v * tp * cx * sy;
    p.vx = vx_prof * ct;
    p.vy = vy_prof * ct;
    p.vx_t = -vx_prof * st;
    p.vy_t = -vy_prof * st;
    const double th_prof = c.a_theta * cx;
    p.theta = 1.0 + th_prof * ct;
    p.theta_t = -th_prof * st;
    const Mat2 dir = mms_direction();
    const double f_prof = c.a_F * sx * sy;
    p.F = Mat2::identity() + dir * (f_prof * ct);
    p.F_t = dir * (-f_prof * st);
    return p;
}

// periodic 4th-order centered first/second differences on a flat array
struct FineOps {
    int n;
    double h;
    std::size_t idx(int i, int j) const {
        return std::size_t(((j % n) + n) % n) * n + std::size_t(((i % n) + n) % n);
    }
    double dx(const std::vector<double>& f, int i, int j) const {
        return (-f[idx(i + 2, j)] + 8.0 * f[idx(i + 1, j)] -
                8.0 * f[idx(i - 1, j)] + f[idx(i - 2, j)]) / (12.0 * h);
    }
    double dy(const std::vector<double>& f, int i, int j) const {
        return (-f[idx(i, j + 2)] + 8.0 * f[idx(i, j + 1)] -
                8.0 * f[idx(i, j - 1)] + f[idx(i, j - 2)]) / (12.0 * h);
    }
    double lap(const std::vector<double>& f, int i, int j) const {
        auto d2 = [&](int a, int b, int c, int d) {
            return (-f[idx(a, b)] + 16.0 * f[idx(c, d)]);
        };
        const double xx = (d2(i + 2, j, i + 1, j) + d2(i - 2, j, i - 1, j) -
                           30.0 * f[idx(i, j)]) / (12.0 * h * h);
        const double yy = (d2(i, j + 2, i, j + 1) + d2(i, j - 2, i, j - 1) -
                           30.0 * f[idx(i, j)]) / (12.0 * h * h);
        return xx + yy;
    }
};

} // namespace detail

inline State exact_solution(const ManufacturedCase& c, const Grid& g, double t) {
    c.validate();
    State s = State::stationary(g);
    s.t = t;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const detail::MmsPoint p = detail::mms_eval(c, g.x(i), g.y(j), t);
            s.v.x(i, j) = p.vx;
            s.v.y(i, j) = p.vy;
            s.theta(i, j) = p.theta;
            s.F.set(i, j, p.F);
        }
    return s;
}

// Sources that make exact_solution solve the forced discrete system; the
// momentum source may carry a gradient component, which the projection
// absorbs into the pressure.
inline SourceFields manufactured_sources(const MaterialModel& m,
                                         const ManufacturedCase& c,
                                         const Grid& g, double epsilon, double t,
                                         ThetaPath path) {
    c.validate();
    const int nf = g.n;
    detail::FineOps ops{nf, 1.0 / nf};
    const std::size_t cells = std::size_t(nf) * nf;

    std::vector<double> vx(cells), vy(cells), th(cells);
    std::vector<double> F[4], Ft[4];
    for (auto& a : F) a.resize(cells);
    for (auto& a : Ft) a.resize(cells);
    std::vector<double> vxt(cells), vyt(cells), tht(cells);
    // 1D trig tables: the profiles are separable, so per-point work is
    // pure arithmetic
    const double tp = 2.0 * std::numbers::pi * c.k;
    std::vector<double> sx1(nf), cx1(nf), sy1(nf), cy1(nf);
    for (int i = 0; i < nf; ++i) {
        sx1[i] = std::sin(tp * (i + 0.5) * ops.h);
        cx1[i] = std::cos(tp * (i + 0.5) * ops.h);
        sy1[i] = sx1[i];
        cy1[i] = cx1[i];
    }
    const double ct = std::cos(t), st = std::sin(t);
    const Mat2 dir = detail::mms_direction();
    for (int j = 0; j < nf; ++j)
        for (int i = 0; i < nf; ++i) {
            const std::size_t q = ops.idx(i, j);
            const double vx_prof = c.a_v * tp * sx1[i] * cy1[j];
            const double vy_prof = -c.a_v * tp * cx1[i] * sy1[j];
            vx[q] = vx_prof * ct;
            vy[q] = vy_prof * ct;
            vxt[q] = -vx_prof * st;
            vyt[q] = -vy_prof * st;
            const double th_prof = c.a_theta * cx1[i];
            th[q] = 1.0 + th_prof * ct;
            tht[q] = -th_prof * st;
            const double f_prof = c.a_F * sx1[i] * sy1[j];
            F[0][q] = 1.0 + dir.a11 * f_prof * ct;
            F[1][q] = dir.a12 * f_prof * ct;
            F[2][q] = dir.a21 * f_prof * ct;
            F[3][q] = 1.0 + dir.a22 * f_prof * ct;
            Ft[0][q] = -dir.a11 * f_prof * st;
            Ft[1][q] = -dir.a12 * f_prof * st;
            Ft[2][q] = -dir.a21 * f_prof * st;
            Ft[3][q] = -dir.a22 * f_prof * st;
        }

    // pointwise composite fields
    std::vector<double> T[4], vv[4], kgx(cells), kgy(cells), e(cells), et(cells);
    std::vector<double> evx(cells), evy(cells), thvx(cells), thvy(cells);
    std::vector<double> prod(cells);
    for (auto& a : T) a.resize(cells);
    for (auto& a : vv) a.resize(cells);
    for (int j = 0; j < nf; ++j)
        for (int i = 0; i < nf; ++i) {
            const std::size_t q = ops.idx(i, j);
            const Mat2 gv{ops.dx(vx, i, j), ops.dy(vx, i, j),
                          ops.dx(vy, i, j), ops.dy(vy, i, j)};
            const SymMat2 dv = sym_part(gv);
            const Mat2 Fq{F[0][q], F[1][q], F[2][q], F[3][q]};
            const SymMat2 B = bb_from_f(Fq);
            const double thq = th[q];
            const Mat2 S = dv.full() * (2.0 * m.nu.value(thq)) +
                           B.full() * (2.0 * m.g.value(thq));
            T[0][q] = S.a11; T[1][q] = S.a12; T[2][q] = S.a21; T[3][q] = S.a22;
            vv[0][q] = vx[q] * vx[q]; vv[1][q] = vx[q] * vy[q];
            vv[2][q] = vy[q] * vx[q]; vv[3][q] = vy[q] * vy[q];
            const double kap = m.kappa.value(thq);
            kgx[q] = kap * ops.dx(th, i, j);
            kgy[q] = kap * ops.dy(th, i, j);
            thvx[q] = thq * vx[q];
            thvy[q] = thq * vy[q];
            if (path == ThetaPath::Energy) {
                const double fB = elastic_energy_f(B);
                e[q] = internal_energy_e(m, thq, B);
                const Mat2 Ftq{Ft[0][q], Ft[1][q], Ft[2][q], Ft[3][q]};
                const Mat2 Bt = Ftq * Fq.transpose() + Fq * Ftq.transpose();
                const SymMat2 dpsi = SymMat2::identity() - invert_spd(B);
                et[q] = internal_energy_dtheta(m, thq, fB) * tht[q] +
                        (m.g.value(thq) - thq * m.g.d1(thq)) *
                            frob_inner(dpsi.full(), Bt);
                evx[q] = e[q] * vx[q];
                evy[q] = e[q] * vy[q];
                prod[q] = frob_inner(S, dv.full());
            } else if (m.regime == Regime::P2) {
                prod[q] = frob_inner(S, dv.full());
            } else {
                const SymMat2 bmi = B - SymMat2::identity();
                prod[q] = 2.0 * m.nu.value(thq) * frob_inner(dv, dv) +
                          m.delta.value(thq) * frob_inner(bmi, bmi);
            }
        }

    SourceFields src;
    src.momentum = VectorField(g);
    src.F = TensorField(g);
    src.theta = ScalarField(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const int fi = i, fj = j; // sample grid coincides with the mesh
            const std::size_t q = ops.idx(fi, fj);

            src.momentum.x(i, j) =
                vxt[q] + ops.dx(vv[0], fi, fj) + ops.dy(vv[1], fi, fj) -
                ops.dx(T[0], fi, fj) - ops.dy(T[1], fi, fj);
            src.momentum.y(i, j) =
                vyt[q] + ops.dx(vv[2], fi, fj) + ops.dy(vv[3], fi, fj) -
                ops.dx(T[2], fi, fj) - ops.dy(T[3], fi, fj);

            const Mat2 gv{ops.dx(vx, fi, fj), ops.dy(vx, fi, fj),
                          ops.dx(vy, fi, fj), ops.dy(vy, fi, fj)};
            const Mat2 Fq{F[0][q], F[1][q], F[2][q], F[3][q]};
            const SymMat2 B = bb_from_f(Fq);
            const Mat2 gvF = gv * Fq;
            const Mat2 relax = (B * Fq - Fq) * (0.5 * m.delta.value(th[q]));
            Mat2 sF;
            double* out[4] = {&sF.a11, &sF.a12, &sF.a21, &sF.a22};
            const double gvF_c[4] = {gvF.a11, gvF.a12, gvF.a21, gvF.a22};
            const double rel_c[4] = {relax.a11, relax.a12, relax.a21, relax.a22};
            for (int comp = 0; comp < 4; ++comp) {
                // d_b (F_ab v_b) = v . grad F_ab since div v = 0 exactly
                const double adv = vx[q] * ops.dx(F[comp], fi, fj) +
                                   vy[q] * ops.dy(F[comp], fi, fj);
                *out[comp] = Ft[comp][q] + adv + rel_c[comp] - gvF_c[comp] -
                             epsilon * ops.lap(F[comp], fi, fj);
            }
            src.F.set(i, j, sF);

            const double diff = ops.dx(kgx, fi, fj) + ops.dy(kgy, fi, fj);
            if (path == ThetaPath::Energy) {
                src.theta(i, j) = et[q] + ops.dx(evx, fi, fj) +
                                  ops.dy(evy, fi, fj) - diff - prod[q];
            } else {
                src.theta(i, j) = tht[q] + ops.dx(thvx, fi, fj) +
                                  ops.dy(thvy, fi, fj) - (diff + prod[q]) / m.c_v;
            }
        }
    return src;
}

struct MmsRow {
    int n = 0;
    double err_v = 0.0, err_theta = 0.0, err_F = 0.0;
    double order_v = 0.0, order_theta = 0.0, order_F = 0.0;
};

inline std::vector<MmsRow> convergence_study(const MaterialModel& m,
                                             const ManufacturedCase& c,
                                             const std::vector<int>& grids,
                                             double T, double epsilon = 1e-3,
                                             double dt_factor = 0.1) {
    if (grids.size() < 2)
        throw ConfigParse("convergence_study: need at least two grids");
    c.validate();
    std::vector<MmsRow> rows;
    for (int n : grids) {
        Grid g(n, Bc::Periodic);
        SolverConfig cfg;
        cfg.epsilon = epsilon;
        cfg.policy = DtPolicy::Fixed;
        const double target = dt_factor * g.h * g.h;
        const long nsteps = std::max(1L, std::lround(std::ceil(T / target)));
        cfg.dt_fixed = T / double(nsteps);
        cfg.T = T;
        ThetaPath path = m.regime == Regime::P3 ? ThetaPath::Energy : ThetaPath::Direct;
        cfg.theta_path = path;
        // one-entry cache: the second Heun stage of step k and the first
        // stage of step k+1 evaluate the sources at the same time
        auto cache = std::make_shared<std::pair<double, SourceFields>>(
            -1.0, SourceFields{});
        cfg.sources = [&m, &c, g, epsilon, path, cache](double t) {
            if (cache->first != t)
                *cache = {t, manufactured_sources(m, c, g, epsilon, t, path)};
            return cache->second;
        };
        Solver solver(m, cfg);
        State s = exact_solution(c, g, 0.0);
        for (long step = 0; step < nsteps; ++step) s = solver.step(s, cfg.dt_fixed);

        State ex = exact_solution(c, g, T);
        double ev = 0.0, eth = 0.0, eF = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double dx = s.v.x(i, j) - ex.v.x(i, j);
                const double dy = s.v.y(i, j) - ex.v.y(i, j);
                ev += dx * dx + dy * dy;
                const double dt0 = s.theta(i, j) - ex.theta(i, j);
                eth += dt0 * dt0;
                const Mat2 df = s.F.at(i, j) - ex.F.at(i, j);
                eF += frob_inner(df, df);
            }
        const double w = g.h * g.h;
        MmsRow row;
        row.n = n;
        row.err_v = std::sqrt(ev * w);
        row.err_theta = std::sqrt(eth * w);
        row.err_F = std::sqrt(eF * w);
        rows.push_back(row);
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        auto order = [&](double a, double b) {
            if (a == 0.0 && b == 0.0) return 2.0; // zero-error case: exact
            return std::log2(a / b);
        };
        rows[r].order_v = order(rows[r - 1].err_v, rows[r].err_v);
        rows[r].order_theta = order(rows[r - 1].err_theta, rows[r].err_theta);
        rows[r].order_F = order(rows[r - 1].err_F, rows[r].err_F);
    }
    return rows;
}

} // namespace tvs
