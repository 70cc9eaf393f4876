#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "tvs/audit.hpp"
#include "tvs/mms.hpp"

using namespace tvs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

State diffusion_state(const Grid& g) {
    State s = State::stationary(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            s.theta(i, j) = 1.0 + 0.1 * std::sin(kTwoPi * g.x(i));
    return s;
}

} // namespace

TEST_CASE("total energy at uniform states", "[audit]") {
    const Grid g(16, Bc::Periodic);
    const MaterialModel p1 = MaterialModel::preset_p1();
    State s = State::stationary(g);
    EnergySplit e = total_energy(p1, s);
    CHECK(e.kinetic == 0.0);
    CHECK(e.internal == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(e.total == Catch::Approx(1.0).epsilon(1e-13));

    s.theta = ScalarField(g, 2.0);
    e = total_energy(p1, s);
    CHECK(e.internal == Catch::Approx(2.0).epsilon(1e-13));

    // uniform F = diag(2,1): e = c_v + f(diag(4,1)) = 1 + 3 - ln 4
    s.theta = ScalarField(g, 1.0);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) s.F.set(i, j, Mat2{2.0, 0.0, 0.0, 1.0});
    e = total_energy(p1, s);
    CHECK(e.internal == Catch::Approx(1.0 + 3.0 - std::log(4.0)).epsilon(1e-12));
    CHECK(e.internal == Catch::Approx(1.0 + 1.61371).margin(5e-6));
}

TEST_CASE("entropy production at reference states", "[audit]") {
    const Grid g(16, Bc::Periodic);
    const MaterialModel p1 = MaterialModel::preset_p1();
    CHECK(max_abs(entropy_production(p1, State::stationary(g))) == 0.0);

    // uniform shear: 2 nu |Dv|^2 / theta = gamma^2 at theta = 1
    const double gamma = 0.25;
    const Grid gw(16, Bc::Walls);
    State sw = State::stationary(gw);
    for (int j = 0; j < gw.n; ++j)
        for (int i = 0; i < gw.n; ++i) sw.v.x(i, j) = gamma * gw.y(j);
    const ScalarField prod = entropy_production(p1, sw);
    for (int j = 1; j < gw.n - 1; ++j)
        for (int i = 1; i < gw.n - 1; ++i)
            CHECK(prod(i, j) == Catch::Approx(gamma * gamma).epsilon(1e-11));

    // heat-gradient contribution against the analytic plug-in oracle
    auto max_err = [&](int n) {
        const Grid gg(n, Bc::Periodic);
        const State s = diffusion_state(gg);
        const ScalarField pr = entropy_production(p1, s);
        double err = 0.0;
        for (int j = 0; j < gg.n; ++j)
            for (int i = 0; i < gg.n; ++i) {
                const double th = s.theta(i, j);
                const double gt = 0.1 * kTwoPi * std::cos(kTwoPi * gg.x(i));
                err = std::max(err, std::abs(pr(i, j) - gt * gt / (th * th)));
            }
        return err;
    };
    const double e32 = max_err(32), e64 = max_err(64);
    CHECK(e64 < 5e-3);
    CHECK(e32 / e64 > 3.0);
}

TEST_CASE("entropy balance residual converges under joint refinement", "[audit]") {
    const MaterialModel p1 = MaterialModel::preset_p1();
    auto residual_sum = [&](int n) {
        const Grid g(n, Bc::Periodic);
        SolverConfig cfg;
        cfg.policy = DtPolicy::Fixed;
        cfg.dt_fixed = 0.1 * g.h * g.h;
        Solver solver(p1, cfg);
        State s = diffusion_state(g);
        const double T = 0.01;
        const long steps = std::lround(T / cfg.dt_fixed);
        double acc = 0.0;
        for (long k = 0; k < steps; ++k) {
            const State next = solver.step(s, cfg.dt_fixed);
            acc += std::abs(entropy_balance_residual(p1, s, next, cfg.dt_fixed));
            s = next;
        }
        return acc;
    };
    // stationary pair: identically balanced
    {
        const Grid g(16, Bc::Periodic);
        const State s = State::stationary(g);
        CHECK(std::abs(entropy_balance_residual(p1, s, s, 1e-3)) <= 1e-14);
    }
    const double r16 = residual_sum(16), r32 = residual_sum(32);
    CHECK(r16 / r32 > 2.0);
}

TEST_CASE("log-determinant relaxation follows the scalar ODE", "[audit]") {
    // F = diag(sqrt(2), 1) uniform, v = 0, delta = 1: b = B11 obeys
    // b' = -b(b-1) with solution b(t) = 1/(1 - 0.5 exp(-t))
    const Grid g(16, Bc::Periodic);
    const MaterialModel p1 = MaterialModel::preset_p1();
    SolverConfig cfg;
    cfg.epsilon = 1e-3;
    Solver solver(p1, cfg);
    State s = State::stationary(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            s.F.set(i, j, Mat2{std::numbers::sqrt2, 0.0, 0.0, 1.0});

    const double dt = 1e-3;
    double maxres = 0.0;
    for (int step = 0; step < 10; ++step) {
        const State next = solver.step(s, dt);
        maxres = std::max(maxres, max_abs(lndet_transport_residual(p1, s, next, dt)));
        s = next;
    }
    CHECK(maxres <= 1e-5);
    const double t = 10 * dt;
    const double b_exact = 1.0 / (1.0 - 0.5 * std::exp(-t));
    CHECK(bb_from_f(s.F.at(4, 9)).b11 == Catch::Approx(b_exact).margin(1e-6));

    // stationary pair: residual identically zero
    const State st = State::stationary(g);
    CHECK(max_abs(lndet_transport_residual(p1, st, st, 1e-3)) <= 1e-13);
}

TEST_CASE("elastic-energy transport residual shrinks under joint refinement",
          "[audit]") {
    const MaterialModel p1 = MaterialModel::preset_p1();
    ManufacturedCase mc;
    auto residual = [&](int n) {
        const Grid g(n, Bc::Periodic);
        SolverConfig cfg;
        Solver solver(p1, cfg);
        State s = exact_solution(mc, g, 0.0);
        const double dt = 0.1 * g.h * g.h;
        const State next = solver.step(s, dt);
        return max_abs(f_transport_residual(p1, s, next, dt, cfg.epsilon));
    };
    const double r16 = residual(16), r32 = residual(32);
    CHECK(r16 / r32 >= 1.8);
}

TEST_CASE("renormalized identity residual", "[audit]") {
    const MaterialModel p3 = MaterialModel::preset_p3();
    const Grid g(16, Bc::Periodic);

    // stationary pair: identically zero in both groupings
    const State st = State::stationary(g);
    RenormalizedResidual r0 = renormalized_identity_residual(p3, 0.7, st, st, 1e-3);
    CHECK(std::abs(r0.statement) <= 1e-13);
    CHECK(std::abs(r0.regrouped) <= 1e-13);

    // generic pair: the two groupings are algebraically identical
    SolverConfig cfg;
    Solver solver(p3, cfg);
    ManufacturedCase mc;
    State a = exact_solution(mc, g, 0.0);
    const double dt = 2e-4;
    const State b = solver.step(a, dt);
    for (double lam : {0.5, 1.0, 1.5}) {
        const RenormalizedResidual r = renormalized_identity_residual(p3, lam, a, b, dt);
        CHECK(r.statement == Catch::Approx(r.regrouped).margin(1e-12));
    }

    // residual depends continuously on lambda near 1
    const RenormalizedResidual rm =
        renormalized_identity_residual(p3, 0.999, a, b, dt);
    const RenormalizedResidual rp =
        renormalized_identity_residual(p3, 1.001, a, b, dt);
    const double scale = std::max({std::abs(rm.statement), std::abs(rp.statement), 1e-14});
    CHECK(std::abs(rm.statement - rp.statement) <= 0.05 * scale);
}

TEST_CASE("a priori norms at uniform states", "[audit]") {
    const Grid g(16, Bc::Periodic);
    const MaterialModel p1 = MaterialModel::preset_p1();
    State s = State::stationary(g);
    Norms n = apriori_norms(p1, s);
    CHECK(n.L2_v == 0.0);
    CHECK(n.L2_gradv == 0.0);
    CHECK(n.L1_theta == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(n.L1_logtheta == Catch::Approx(0.0).margin(1e-13));
    CHECK(n.L1_fB == Catch::Approx(0.0).margin(1e-13));
    CHECK(n.L2_F == Catch::Approx(std::numbers::sqrt2).epsilon(1e-13));
    CHECK(n.L2_B == Catch::Approx(std::numbers::sqrt2).epsilon(1e-13));

    s.theta = ScalarField(g, std::numbers::e);
    n = apriori_norms(p1, s);
    CHECK(n.L1_logtheta == Catch::Approx(1.0).epsilon(1e-13));

    s.theta = ScalarField(g, 1.0);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) s.F.set(i, j, Mat2{2.0, 0.0, 0.0, 1.0});
    n = apriori_norms(p1, s);
    CHECK(std::pow(n.L4_F, 4.0) == Catch::Approx(25.0).epsilon(1e-12));
    CHECK(n.L2_B * n.L2_B == Catch::Approx(17.0).epsilon(1e-12));
}

TEST_CASE("positivity check reports the offending cell", "[audit]") {
    const Grid g(16, Bc::Periodic);
    State s = State::stationary(g);
    PositivityReport rep = positivity_check(s, 0.1);
    CHECK(rep.pass);
    CHECK(rep.min_theta == 1.0);
    CHECK(rep.min_detF == 1.0);

    s.theta(2, 3) = 0.04;
    rep = positivity_check(s, 0.1);
    CHECK_FALSE(rep.pass);
    CHECK(rep.cell_i == 2);
    CHECK(rep.cell_j == 3);
    CHECK(rep.min_theta == 0.04);

    s = State::stationary(g);
    s.F.set(5, 6, Mat2{1.0, 0.0, 0.0, 0.0});
    rep = positivity_check(s, 0.1);
    CHECK_FALSE(rep.pass);
    CHECK(rep.cell_i == 5);
    CHECK(rep.cell_j == 6);
}

TEST_CASE("stress-diffusion power vanishes when it must", "[audit]") {
    const Grid g(16, Bc::Periodic);
    const MaterialModel p3 = MaterialModel::preset_p3();
    State s = State::stationary(g);
    CHECK(stress_diffusion_power(p3, s, 0.0) == 0.0);
    // uniform F: the Laplacian term is identically zero
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) s.F.set(i, j, Mat2{1.2, 0.1, 0.1, 0.9});
    CHECK(stress_diffusion_power(p3, s, 1e-3) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("budget record is internally consistent", "[audit]") {
    const Grid g(16, Bc::Periodic);
    const MaterialModel p1 = MaterialModel::preset_p1();
    ManufacturedCase mc;
    State s = exact_solution(mc, g, 0.0);
    s.t = 0.25;
    const BudgetRecord r = budget_record(p1, s);
    CHECK(r.t == 0.25);
    CHECK(r.E_total == Catch::Approx(r.E_kin + r.E_int).epsilon(1e-14));
    CHECK(r.P_entropy >= 0.0);
    CHECK(r.min_theta > 0.0);
    CHECK(r.min_detF > 0.0);
}
