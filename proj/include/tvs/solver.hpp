#pragma once

// Time integration of the stress-diffusion regularized system: explicit Heun
// steps with incompressibility enforced by projecting the momentum right side
// of every stage.

#include <cmath>
#include <functional>
#include <optional>

#include "tvs/grid.hpp"
#include "tvs/material.hpp"
#include "tvs/poisson.hpp"
#include "tvs/tensor2.hpp"

namespace tvs {

struct State {
    VectorField v;
    TensorField F;
    ScalarField theta;
    ScalarField p;
    double t = 0.0;

    static State stationary(const Grid& g, double theta0 = 1.0) {
        State s;
        s.v = VectorField(g);
        s.F = TensorField::identity(g);
        s.theta = ScalarField(g, theta0);
        s.p = ScalarField(g);
        return s;
    }
};

enum class DtPolicy { Fixed, Cfl };
enum class ThetaPath { Auto, Direct, Energy };

// Optional manufactured/source forcing added to the stage right sides.
// theta_src feeds the temperature equation on the direct path and the
// internal-energy equation on the energy path.
struct SourceFields {
    VectorField momentum;
    TensorField F;
    ScalarField theta;
};
using SourceProvider = std::function<SourceFields(double t)>;

struct SolverConfig {
    double epsilon = 1e-3;  // stress-diffusion coefficient
    double r = 0.1;         // initial-temperature cutoff parameter
    DtPolicy policy = DtPolicy::Cfl;
    double dt_fixed = 1e-4;
    double cfl_safety = 0.4;
    double projection_tol = 1e-10;
    double T = 0.1;
    ThetaPath theta_path = ThetaPath::Auto;
    SourceProvider sources; // empty: unforced
};

inline ScalarField init_theta_cutoff(const ScalarField& theta0, double r) {
    if (!(r > 0.0 && r < 1.0))
        throw ConfigParse("init_theta_cutoff: r must lie in (0,1)");
    ScalarField out = theta0;
    const double hi = 1.0 / r;
    for (double& v : out.values)
        if (!(v >= r && v <= hi)) v = 1.0;
    return out;
}

// Monotone in theta since d e/d theta >= c_v for concave g; safeguarded
// Newton with a bisection bracket, relative tolerance 1e-12.
inline double invert_internal_energy(const MaterialModel& m, double e_val,
                                     const SymMat2& b, double guess = 1.0) {
    if (m.g_is_linear()) return e_val / m.c_v;
    const double f = elastic_energy_f(b);
    if (m.g.kind == ScalarFn::Kind::Constant) {
        const double th = (e_val - m.g.c0 * f) / m.c_v;
        if (!(th > 0.0))
            throw OutOfRange("invert_internal_energy: energy below admissible range");
        return th;
    }
    // limit theta -> 0+ of e(theta, B) is g(0) f(B)
    const double floor = m.g.value(0.0) * f;
    if (!(e_val > floor))
        throw OutOfRange("invert_internal_energy: energy below admissible range");

    auto eval = [&](double th) {
        return m.c_v * th + (m.g.value(th) - th * m.g.d1(th)) * f - e_val;
    };
    double lo = 0.0, hi = std::max(guess, (e_val - floor) / m.c_v) * 2.0 + 1.0;
    while (eval(hi) < 0.0) hi *= 2.0;
    double th = std::min(std::max(guess, 1e-12), hi);
    for (int it = 0; it < 100; ++it) {
        const double r0 = eval(th);
        if (r0 == 0.0) return th; // exact hit (notably the rest state)
        if (r0 > 0.0) hi = th;
        else lo = th;
        const double dr = internal_energy_dtheta(m, th, f);
        double next = th - r0 / dr;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - th) <= 1e-12 * std::max(1.0, std::abs(th))) return next;
        th = next;
    }
    return th;
}

inline double cfl_dt(const MaterialModel& m, const SolverConfig& cfg,
                     const State& s) {
    const Grid& g = s.v.grid;
    double vmax = 0.0, nu_max = 0.0, kappa_max = 0.0;
    for (std::size_t k = 0; k < g.cells(); ++k) {
        vmax = std::max(vmax, std::max(std::abs(s.v.vx[k]), std::abs(s.v.vy[k])));
        const double th = s.theta.values[k];
        nu_max = std::max(nu_max, m.nu.value(th));
        kappa_max = std::max(kappa_max, m.kappa.value(th));
    }
    const double diff = std::max(std::max(nu_max, kappa_max), cfg.epsilon);
    const double adv_dt = g.h / (vmax + 1e-8);
    const double diff_dt = g.h * g.h / (4.0 * diff);
    return cfg.cfl_safety * std::min(adv_dt, diff_dt);
}

inline TensorField deviatoric_stress(const MaterialModel& m, const State& s) {
    const Grid& g = s.v.grid;
    TensorField gv = grad_vec(s.v, Ghost::Flip);
    TensorField out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double th = s.theta(i, j);
            const Mat2 dv = sym_part(gv.at(i, j)).full();
            const SymMat2 b = bb_from_f(s.F.at(i, j));
            out.set(i, j, dv * (2.0 * m.nu.value(th)) +
                          b.full() * (2.0 * m.g.value(th)));
        }
    return out;
}

namespace detail {

// div(F (x) v): componentwise conservative transport divergence
inline TensorField div_tensor_transport(const TensorField& f, const VectorField& v) {
    const Grid& g = f.grid;
    TensorField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    const double* vx = v.vx.data();
    const double* vy = v.vy.data();
    for (int c = 0; c < 4; ++c) {
        const double* fc = f.comp[c].data();
        double* oc = out.comp[c].data();
        for (int j = 0; j < g.n; ++j) {
            const int jm = g.nb(-1, j), jp = g.nb(1, j);
            const double sjm = g.fsgn(-1, j), sjp = g.fsgn(1, j);
            for (int i = 0; i < g.n; ++i) {
                const int im = g.nb(-1, i), ip = g.nb(1, i);
                // velocity carries the Flip sign; F mirrors without one
                const double fx = g.fsgn(1, i) * vx[g.idx(ip, j)] * fc[g.idx(ip, j)] -
                                  g.fsgn(-1, i) * vx[g.idx(im, j)] * fc[g.idx(im, j)];
                const double fy = sjp * vy[g.idx(i, jp)] * fc[g.idx(i, jp)] -
                                  sjm * vy[g.idx(i, jm)] * fc[g.idx(i, jm)];
                oc[g.idx(i, j)] = (fx + fy) * inv2h;
            }
        }
    }
    return out;
}

inline ScalarField div_scalar_transport(const ScalarField& s, const VectorField& v) {
    const Grid& g = s.grid;
    ScalarField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    const double* sv = s.values.data();
    const double* vx = v.vx.data();
    const double* vy = v.vy.data();
    for (int j = 0; j < g.n; ++j) {
        const int jm = g.nb(-1, j), jp = g.nb(1, j);
        const double sjm = g.fsgn(-1, j), sjp = g.fsgn(1, j);
        for (int i = 0; i < g.n; ++i) {
            const int im = g.nb(-1, i), ip = g.nb(1, i);
            const double fx = g.fsgn(1, i) * vx[g.idx(ip, j)] * sv[g.idx(ip, j)] -
                              g.fsgn(-1, i) * vx[g.idx(im, j)] * sv[g.idx(im, j)];
            const double fy = sjp * vy[g.idx(i, jp)] * sv[g.idx(i, jp)] -
                              sjm * vy[g.idx(i, jm)] * sv[g.idx(i, jm)];
            out(i, j) = (fx + fy) * inv2h;
        }
    }
    return out;
}

// Skew-symmetric advection 1/2 [div(v (x) v) + (v . grad) v]: its kinetic
// energy contribution vanishes identically under summation by parts, which
// the discrete total-energy budget relies on.
inline VectorField skew_advection(const VectorField& v, const TensorField& gv) {
    const Grid& g = v.grid;
    VectorField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    const double* vx = v.vx.data();
    const double* vy = v.vy.data();
    for (int j = 0; j < g.n; ++j) {
        const int jm = g.nb(-1, j), jp = g.nb(1, j);
        const double sjm = g.fsgn(-1, j), sjp = g.fsgn(1, j);
        for (int i = 0; i < g.n; ++i) {
            const int im = g.nb(-1, i), ip = g.nb(1, i);
            const double sim = g.fsgn(-1, i), sip = g.fsgn(1, i);
            // the Flip sign squares away in the products vx*vc
            const double vxp = sip * vx[g.idx(ip, j)], vxm = sim * vx[g.idx(im, j)];
            const double vyp = sjp * vy[g.idx(i, jp)], vym = sjm * vy[g.idx(i, jm)];
            const double cons0 = (vxp * sip * vx[g.idx(ip, j)] - vxm * sim * vx[g.idx(im, j)] +
                                  vyp * sjp * vx[g.idx(i, jp)] - vym * sjm * vx[g.idx(i, jm)]) * inv2h;
            const double cons1 = (vxp * sip * vy[g.idx(ip, j)] - vxm * sim * vy[g.idx(im, j)] +
                                  vyp * sjp * vy[g.idx(i, jp)] - vym * sjm * vy[g.idx(i, jm)]) * inv2h;
            const Mat2 gvm = gv.at(i, j);
            const double conv0 = vx[g.idx(i, j)] * gvm.a11 + vy[g.idx(i, j)] * gvm.a12;
            const double conv1 = vx[g.idx(i, j)] * gvm.a21 + vy[g.idx(i, j)] * gvm.a22;
            out.x(i, j) = 0.5 * (cons0 + conv0);
            out.y(i, j) = 0.5 * (cons1 + conv1);
        }
    }
    return out;
}

} // namespace detail

inline TensorField rhs_F(const MaterialModel& m, const State& s, double epsilon,
                         const TensorField* src = nullptr) {
    const Grid& g = s.F.grid;
    TensorField gv = grad_vec(s.v, Ghost::Flip);
    TensorField adv = detail::div_tensor_transport(s.F, s.v);
    TensorField lap = laplacian_tensor(s.F, Ghost::Mirror);
    TensorField out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const Mat2 f = s.F.at(i, j);
            const SymMat2 b = bb_from_f(f);
            const double d = m.delta.value(s.theta(i, j));
            Mat2 r = adv.at(i, j) * -1.0 + gv.at(i, j) * f -
                     (b * f - f) * (0.5 * d) + lap.at(i, j) * epsilon;
            if (src) r += src->at(i, j);
            out.set(i, j, r);
        }
    return out;
}

// Direct temperature right side (constant or linear shear modulus).
inline ScalarField rhs_theta(const MaterialModel& m, const State& s,
                             const ScalarField* src = nullptr) {
    const Grid& g = s.theta.grid;
    require_positive_temperature(min_value(s.theta), "rhs_theta");
    TensorField gv = grad_vec(s.v, Ghost::Flip);
    ScalarField kappa(g);
    for (std::size_t k = 0; k < g.cells(); ++k)
        kappa.values[k] = m.kappa.value(s.theta.values[k]);
    ScalarField diff = div_k_grad(s.theta, kappa);
    ScalarField adv = detail::div_scalar_transport(s.theta, s.v);
    ScalarField out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double th = s.theta(i, j);
            const SymMat2 dv = sym_part(gv.at(i, j));
            double prod;
            if (m.regime == Regime::P2) {
                // e = c_v theta: the internal-energy production divided by c_v
                const SymMat2 b = bb_from_f(s.F.at(i, j));
                const Mat2 stress = dv.full() * (2.0 * m.nu.value(th)) +
                                    b.full() * (2.0 * m.g.value(th));
                prod = frob_inner(stress, dv.full());
            } else {
                const SymMat2 bmi = bb_from_f(s.F.at(i, j)) - SymMat2::identity();
                prod = 2.0 * m.nu.value(th) * frob_inner(dv, dv) +
                       m.delta.value(th) * frob_inner(bmi, bmi);
            }
            out(i, j) = -adv(i, j) + (diff(i, j) + prod) / m.c_v;
            if (src) out(i, j) += (*src)(i, j);
        }
    return out;
}

// Internal-energy right side (energy path, used for P2/P3).
inline ScalarField rhs_internal_energy(const MaterialModel& m, const State& s,
                                       const ScalarField& e,
                                       const ScalarField* src = nullptr) {
    const Grid& g = s.theta.grid;
    require_positive_temperature(min_value(s.theta), "rhs_internal_energy");
    TensorField gv = grad_vec(s.v, Ghost::Flip);
    ScalarField kappa(g);
    for (std::size_t k = 0; k < g.cells(); ++k)
        kappa.values[k] = m.kappa.value(s.theta.values[k]);
    ScalarField diff = div_k_grad(s.theta, kappa);
    ScalarField adv = detail::div_scalar_transport(e, s.v);
    ScalarField out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double th = s.theta(i, j);
            const SymMat2 dv = sym_part(gv.at(i, j));
            const SymMat2 b = bb_from_f(s.F.at(i, j));
            const Mat2 stress = dv.full() * (2.0 * m.nu.value(th)) +
                                b.full() * (2.0 * m.g.value(th));
            out(i, j) = -adv(i, j) + diff(i, j) + frob_inner(stress, dv.full());
            if (src) out(i, j) += (*src)(i, j);
        }
    return out;
}

class Solver {
  public:
    Solver(MaterialModel model, SolverConfig cfg)
        : model_(std::move(model)), cfg_(std::move(cfg)) {
        path_ = cfg_.theta_path;
        if (path_ == ThetaPath::Auto)
            path_ = (model_.regime == Regime::P3) ? ThetaPath::Energy
                                                  : ThetaPath::Direct;
        if (model_.regime == Regime::P3 && path_ == ThetaPath::Direct)
            throw ConfigParse("solver: P3 requires the internal-energy path");
        if (model_.regime == Regime::P1 && path_ == ThetaPath::Energy)
            throw ConfigParse("solver: P1 uses the direct temperature path");
    }

    const MaterialModel& model() const { return model_; }
    const SolverConfig& config() const { return cfg_; }
    ThetaPath path() const { return path_; }

    double pick_dt(const State& s) const {
        const double bound = cfl_dt(model_, cfg_, s);
        if (cfg_.policy == DtPolicy::Cfl) return bound;
        if (cfg_.dt_fixed > 2.0 * bound / cfg_.cfl_safety)
            throw CflViolation("fixed dt exceeds the stability bound by more than 2x");
        return cfg_.dt_fixed;
    }

    State step(const State& s) { return step(s, pick_dt(s)); }

    State step(const State& s, double dt) {
        const Grid& g = s.v.grid;
        const bool energy = (path_ == ThetaPath::Energy);

        ScalarField e0;
        if (energy) e0 = energy_field(s);

        Stage k1 = eval(s, energy ? &e0 : nullptr, s.t, warm1_);

        State pred;
        pred.t = s.t + dt;
        pred.v = axpy(s.v, k1.dv, dt);
        pred.F = axpy(s.F, k1.dF, dt);
        pred.p = k1.p;
        ScalarField e1;
        if (energy) {
            e1 = axpy(e0, k1.ds, dt);
            pred.theta = invert_field(e1, pred.F, s.theta);
        } else {
            pred.theta = axpy(s.theta, k1.ds, dt);
        }
        check_positivity(pred);

        Stage k2 = eval(pred, energy ? &e1 : nullptr, pred.t, warm2_);

        State out;
        out.t = s.t + dt;
        out.v = axpy2(s.v, k1.dv, k2.dv, 0.5 * dt);
        out.F = axpy2(s.F, k1.dF, k2.dF, 0.5 * dt);
        out.p = ScalarField(g);
        for (std::size_t k = 0; k < g.cells(); ++k)
            out.p.values[k] = 0.5 * (k1.p.values[k] + k2.p.values[k]);
        if (energy) {
            ScalarField e2 = axpy2(e0, k1.ds, k2.ds, 0.5 * dt);
            out.theta = invert_field(e2, out.F, s.theta);
        } else {
            out.theta = axpy2(s.theta, k1.ds, k2.ds, 0.5 * dt);
        }
        check_positivity(out);
        return out;
    }

    ScalarField energy_field(const State& s) const {
        const Grid& g = s.theta.grid;
        ScalarField e(g);
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                e(i, j) = internal_energy_e(model_, s.theta(i, j),
                                            bb_from_f(s.F.at(i, j)));
        return e;
    }

  private:
    struct Stage {
        VectorField dv;
        TensorField dF;
        ScalarField ds; // d theta or d e
        ScalarField p;
    };

    Stage eval(const State& s, const ScalarField* e, double t, ScalarField& warm) {
        const Grid& g = s.v.grid;
        std::optional<SourceFields> src;
        if (cfg_.sources) src = cfg_.sources(t);

        TensorField gv = grad_vec(s.v, Ghost::Flip);
        TensorField stress = deviatoric_stress(model_, s);
        VectorField mom = div_tensor(stress, Ghost::Mirror);
        VectorField adv = detail::skew_advection(s.v, gv);
        for (std::size_t k = 0; k < g.cells(); ++k) {
            mom.vx[k] -= adv.vx[k];
            mom.vy[k] -= adv.vy[k];
            if (src) {
                mom.vx[k] += src->momentum.vx[k];
                mom.vy[k] += src->momentum.vy[k];
            }
        }
        auto [dv, p] = project_div_free(mom, cfg_.projection_tol, &warm);
        warm = p;

        Stage st;
        st.dv = std::move(dv);
        st.p = std::move(p);
        st.dF = rhs_F(model_, s, cfg_.epsilon, src ? &src->F : nullptr);
        st.ds = e ? rhs_internal_energy(model_, s, *e, src ? &src->theta : nullptr)
                  : rhs_theta(model_, s, src ? &src->theta : nullptr);
        return st;
    }

    ScalarField invert_field(const ScalarField& e, const TensorField& F,
                             const ScalarField& guess) const {
        const Grid& g = e.grid;
        ScalarField th(g);
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                const Mat2 f = F.at(i, j);
                if (!(f.det() > 0.0))
                    throw PositivityLost("detF", i, j);
                try {
                    th(i, j) = invert_internal_energy(model_, e(i, j),
                                                      bb_from_f(f), guess(i, j));
                } catch (const OutOfRange&) {
                    throw PositivityLost("theta", i, j);
                }
            }
        return th;
    }

    void check_positivity(const State& s) const {
        const Grid& g = s.theta.grid;
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                if (!(s.theta(i, j) > 0.0)) throw PositivityLost("theta", i, j);
                if (!(s.F.at(i, j).det() > 0.0)) throw PositivityLost("detF", i, j);
            }
    }

    static VectorField axpy(const VectorField& a, const VectorField& b, double c) {
        VectorField out = a;
        for (std::size_t k = 0; k < out.vx.size(); ++k) {
            out.vx[k] += c * b.vx[k];
            out.vy[k] += c * b.vy[k];
        }
        return out;
    }
    static VectorField axpy2(const VectorField& a, const VectorField& b,
                             const VectorField& c, double s) {
        VectorField out = a;
        for (std::size_t k = 0; k < out.vx.size(); ++k) {
            out.vx[k] += s * (b.vx[k] + c.vx[k]);
            out.vy[k] += s * (b.vy[k] + c.vy[k]);
        }
        return out;
    }
    static TensorField axpy(const TensorField& a, const TensorField& b, double c) {
        TensorField out = a;
        for (int p = 0; p < 4; ++p)
            for (std::size_t k = 0; k < out.comp[p].size(); ++k)
                out.comp[p][k] += c * b.comp[p][k];
        return out;
    }
    static TensorField axpy2(const TensorField& a, const TensorField& b,
                             const TensorField& c, double s) {
        TensorField out = a;
        for (int p = 0; p < 4; ++p)
            for (std::size_t k = 0; k < out.comp[p].size(); ++k)
                out.comp[p][k] += s * (b.comp[p][k] + c.comp[p][k]);
        return out;
    }
    static ScalarField axpy(const ScalarField& a, const ScalarField& b, double c) {
        ScalarField out = a;
        for (std::size_t k = 0; k < out.values.size(); ++k)
            out.values[k] += c * b.values[k];
        return out;
    }
    static ScalarField axpy2(const ScalarField& a, const ScalarField& b,
                             const ScalarField& c, double s) {
        ScalarField out = a;
        for (std::size_t k = 0; k < out.values.size(); ++k)
            out.values[k] += s * (b.values[k] + c.values[k]);
        return out;
    }

    MaterialModel model_;
    SolverConfig cfg_;
    ThetaPath path_ = ThetaPath::Direct;
    ScalarField warm1_, warm2_;
};

} // namespace tvs
