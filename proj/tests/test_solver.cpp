#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "tvs/mms.hpp"
#include "tvs/solver.hpp"

using namespace tvs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double state_distance(const State& a, const State& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.theta.values.size(); ++k) {
        d = std::max(d, std::abs(a.theta.values[k] - b.theta.values[k]));
        d = std::max(d, std::abs(a.v.vx[k] - b.v.vx[k]));
        d = std::max(d, std::abs(a.v.vy[k] - b.v.vy[k]));
    }
    for (int c = 0; c < 4; ++c)
        for (std::size_t k = 0; k < a.F.comp[c].size(); ++k)
            d = std::max(d, std::abs(a.F.comp[c][k] - b.F.comp[c][k]));
    return d;
}

} // namespace

TEST_CASE("initial temperature cutoff", "[solver]") {
    const Grid g(8, Bc::Periodic);
    ScalarField th(g, 1.0);
    th(0, 0) = 0.05;
    th(1, 0) = 30.0;
    th(2, 0) = 5.0;
    const ScalarField cut = init_theta_cutoff(th, 0.1);
    CHECK(cut(0, 0) == 1.0); // below r
    CHECK(cut(1, 0) == 1.0); // above 1/r
    CHECK(cut(2, 0) == 5.0); // inside [r, 1/r]
    CHECK(cut(3, 0) == 1.0);
    CHECK_THROWS_AS(init_theta_cutoff(th, 1.5), ConfigParse);
    CHECK_THROWS_AS(init_theta_cutoff(th, 0.0), ConfigParse);
}

TEST_CASE("internal-energy inversion", "[solver]") {
    const MaterialModel p1 = MaterialModel::preset_p1();
    const MaterialModel p2 = MaterialModel::preset_p2();
    const MaterialModel p3 = MaterialModel::preset_p3();
    const SymMat2 id = SymMat2::identity();
    const SymMat2 d41 = SymMat2::diag(4.0, 1.0);

    CHECK(invert_internal_energy(p1, 2.0, id) == Catch::Approx(2.0).epsilon(1e-12));
    // linear g: e = c_v theta regardless of B
    CHECK(invert_internal_energy(p2, 3.0, d41) == Catch::Approx(3.0).epsilon(1e-12));
    // round-trip through the P3 potentials
    const double e31 = internal_energy_e(p3, 1.0, d41);
    CHECK(e31 == Catch::Approx(3.01714).margin(5e-6));
    CHECK(invert_internal_energy(p3, e31, d41) == Catch::Approx(1.0).margin(1e-9));
    for (double th : {0.11, 0.7, 1.3, 6.0, 25.0}) {
        const double e = internal_energy_e(p3, th, d41);
        CHECK(invert_internal_energy(p3, e, d41, 2.0) ==
              Catch::Approx(th).epsilon(1e-9));
    }
    // energy below the theta -> 0 limit g(0) f(B) is inadmissible
    CHECK_THROWS_AS(invert_internal_energy(p3, 0.5 * p3.g.value(0.0) *
                                                    elastic_energy_f(d41), d41),
                    OutOfRange);
}

TEST_CASE("stability bound", "[solver]") {
    const Grid g(64, Bc::Periodic);
    const State s = State::stationary(g);
    MaterialModel m = MaterialModel::preset_p1();
    SolverConfig cfg;
    cfg.epsilon = 0.01;
    cfg.cfl_safety = 0.4;
    // v = 0, nu = kappa = 1: diffusion-limited, 0.4 h^2 / 4
    CHECK(cfl_dt(m, cfg, s) == Catch::Approx(0.4 * g.h * g.h / 4.0).epsilon(1e-12));
    // a fixed dt far above the bound is rejected
    cfg.policy = DtPolicy::Fixed;
    cfg.dt_fixed = 1.0;
    Solver solver(m, cfg);
    CHECK_THROWS_AS(solver.pick_dt(s), CflViolation);
}

TEST_CASE("deviatoric stress at reference states", "[solver]") {
    const Grid g(16, Bc::Periodic);
    State s = State::stationary(g);
    const MaterialModel p1 = MaterialModel::preset_p1();
    TensorField t = deviatoric_stress(p1, s);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const Mat2 m = t.at(i, j);
            CHECK(m.a11 == 2.0);
            CHECK(m.a12 == 0.0);
            CHECK(m.a22 == 2.0);
        }

    // linear g at theta = 2: 2 g(2) B = 4I
    const MaterialModel p2 = MaterialModel::preset_p2();
    s.theta = ScalarField(g, 2.0);
    t = deviatoric_stress(p2, s);
    CHECK(t.at(5, 5).a11 == Catch::Approx(4.0));
    CHECK(t.at(5, 5).a22 == Catch::Approx(4.0));

    // uniform shear v = (gamma*y, 0), F = 0: stress symmetrizes to [[0,g],[g,0]]
    const double gamma = 0.3;
    const Grid gw(16, Bc::Walls);
    State sw = State::stationary(gw);
    sw.F = TensorField(gw); // zero tensor
    for (int j = 0; j < gw.n; ++j)
        for (int i = 0; i < gw.n; ++i) sw.v.x(i, j) = gamma * gw.y(j);
    t = deviatoric_stress(p1, sw);
    for (int j = 1; j < gw.n - 1; ++j)
        for (int i = 1; i < gw.n - 1; ++i) {
            const Mat2 m = t.at(i, j);
            CHECK(m.a11 == Catch::Approx(0.0).margin(1e-12));
            CHECK(m.a12 == Catch::Approx(gamma).epsilon(1e-12));
            CHECK(m.a21 == Catch::Approx(gamma).epsilon(1e-12));
            CHECK(m.a22 == Catch::Approx(0.0).margin(1e-12));
        }
}

TEST_CASE("tensor right side at reference states", "[solver]") {
    const Grid g(16, Bc::Periodic);
    const MaterialModel p1 = MaterialModel::preset_p1();
    State s = State::stationary(g);
    TensorField r = rhs_F(p1, s, 1e-3);
    for (int c = 0; c < 4; ++c)
        for (double v : r.comp[c]) CHECK(v == 0.0);

    // uniform F = diag(2,1), v = 0, delta = 1: -1/2 (B F - F) = diag(-3, 0)
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) s.F.set(i, j, Mat2{2.0, 0.0, 0.0, 1.0});
    r = rhs_F(p1, s, 1e-3);
    CHECK(r.at(3, 7).a11 == Catch::Approx(-3.0).epsilon(1e-13));
    CHECK(r.at(3, 7).a12 == Catch::Approx(0.0).margin(1e-13));
    CHECK(r.at(3, 7).a22 == Catch::Approx(0.0).margin(1e-13));
}

TEST_CASE("temperature right side: heat-equation oracle", "[solver]") {
    const MaterialModel p1 = MaterialModel::preset_p1();
    auto max_err = [&](int n) {
        const Grid g(n, Bc::Periodic);
        State s = State::stationary(g);
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                s.theta(i, j) = 1.0 + 0.1 * std::sin(kTwoPi * g.x(i));
        const ScalarField r = rhs_theta(p1, s);
        double err = 0.0;
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                err = std::max(err, std::abs(r(i, j) + 0.1 * kTwoPi * kTwoPi *
                                                           std::sin(kTwoPi * g.x(i))));
        return err;
    };
    const double e32 = max_err(32), e64 = max_err(64);
    CHECK(e64 < 0.01);
    CHECK(e32 / e64 == Catch::Approx(4.0).margin(0.3));

    // stationary state: identically zero
    const Grid g(16, Bc::Periodic);
    const State s = State::stationary(g);
    CHECK(max_abs(rhs_theta(p1, s)) == 0.0);
}

TEST_CASE("temperature right side: shear production", "[solver]") {
    // uniform shear grad v = [[0,gamma],[0,0]], theta = 1, F = I, nu = 1:
    // production 2 nu |Dv|^2 = gamma^2 uniformly in the interior
    const double gamma = 0.4;
    const Grid g(16, Bc::Walls);
    const MaterialModel p1 = MaterialModel::preset_p1();
    State s = State::stationary(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) s.v.x(i, j) = gamma * g.y(j);
    const ScalarField r = rhs_theta(p1, s);
    for (int j = 1; j < g.n - 1; ++j)
        for (int i = 1; i < g.n - 1; ++i)
            CHECK(r(i, j) == Catch::Approx(gamma * gamma).epsilon(1e-11));
}

TEST_CASE("path selection rules", "[solver]") {
    SolverConfig cfg;
    cfg.theta_path = ThetaPath::Direct;
    CHECK_THROWS_AS(Solver(MaterialModel::preset_p3(), cfg), ConfigParse);
    cfg.theta_path = ThetaPath::Energy;
    CHECK_THROWS_AS(Solver(MaterialModel::preset_p1(), cfg), ConfigParse);
    cfg.theta_path = ThetaPath::Auto;
    CHECK(Solver(MaterialModel::preset_p1(), cfg).path() == ThetaPath::Direct);
    CHECK(Solver(MaterialModel::preset_p2(), cfg).path() == ThetaPath::Direct);
    CHECK(Solver(MaterialModel::preset_p3(), cfg).path() == ThetaPath::Energy);
}

TEST_CASE("stationary state is a fixed point of the step", "[solver]") {
    for (const MaterialModel& m : {MaterialModel::preset_p1(),
                                   MaterialModel::preset_p2(),
                                   MaterialModel::preset_p3()}) {
        const Grid g(16, Bc::Periodic);
        SolverConfig cfg;
        Solver solver(m, cfg);
        State s = State::stationary(g);
        const State next = solver.step(s, 1e-3);
        INFO("regime " << regime_name(m.regime));
        CHECK(state_distance(s, next) <= 1e-13);
    }
}

TEST_CASE("pure diffusion conserves heat content and keeps v at rest", "[solver]") {
    const Grid g(32, Bc::Periodic);
    const MaterialModel p1 = MaterialModel::preset_p1();
    SolverConfig cfg;
    Solver solver(p1, cfg);
    State s = State::stationary(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            s.theta(i, j) = 1.0 + 0.1 * std::sin(kTwoPi * g.x(i));
    const double heat0 = integrate(s.theta);
    for (int step = 0; step < 20; ++step) {
        s = solver.step(s);
        CHECK(integrate(s.theta) == Catch::Approx(heat0).margin(1e-12));
        double vmax = 0.0;
        for (std::size_t k = 0; k < g.cells(); ++k)
            vmax = std::max(vmax, std::max(std::abs(s.v.vx[k]), std::abs(s.v.vy[k])));
        CHECK(vmax <= 1e-9);
    }
    CHECK(min_value(s.theta) > 0.9);
}

TEST_CASE("one step is second-order accurate in dt", "[solver]") {
    const Grid g(16, Bc::Periodic);
    const MaterialModel p1 = MaterialModel::preset_p1();
    SolverConfig cfg;
    Solver solver(p1, cfg);
    ManufacturedCase mc; // smooth nontrivial initial data, unforced evolution
    State s0 = exact_solution(mc, g, 0.0);
    auto advance = [&](double dt, int steps) {
        State s = s0;
        for (int k = 0; k < steps; ++k) s = solver.step(s, dt);
        return s;
    };
    const double dt = 4e-4;
    const double d1 = state_distance(advance(dt, 1), advance(dt / 4.0, 4));
    const double d2 = state_distance(advance(dt / 2.0, 2), advance(dt / 8.0, 8));
    CHECK(d1 / d2 == Catch::Approx(4.0).margin(1.0));
}

TEST_CASE("direct and energy paths agree for linear g", "[solver]") {
    const Grid g(16, Bc::Periodic);
    const MaterialModel p2 = MaterialModel::preset_p2();
    SolverConfig direct, energy;
    direct.theta_path = ThetaPath::Direct;
    energy.theta_path = ThetaPath::Energy;
    Solver sd(p2, direct), se(p2, energy);
    ManufacturedCase mc;
    State a = exact_solution(mc, g, 0.0);
    State b = a;
    const double dt = 2e-4;
    for (int step = 0; step < 20; ++step) {
        a = sd.step(a, dt);
        b = se.step(b, dt);
    }
    CHECK(state_distance(a, b) <= 1e-12);
}

TEST_CASE("temperature stays above the initial floor", "[solver]") {
    const Grid g(32, Bc::Periodic);
    const MaterialModel p1 = MaterialModel::preset_p1();
    SolverConfig cfg;
    Solver solver(p1, cfg);
    State s = State::stationary(g);
    const double lo = 0.4, hi = 2.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            s.theta(i, j) = 0.5 * (lo + hi) + 0.5 * (hi - lo) *
                                                  std::sin(kTwoPi * g.x(i)) *
                                                  std::sin(kTwoPi * g.y(j));
    for (int step = 0; step < 30; ++step) {
        s = solver.step(s);
        CHECK(min_value(s.theta) >= lo - 1e-10);
    }
}
