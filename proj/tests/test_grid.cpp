#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "tvs/grid.hpp"
#include "tvs/poisson.hpp"

using namespace tvs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ScalarField sample_scalar(const Grid& g, auto&& fn) {
    ScalarField s(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) s(i, j) = fn(g.x(i), g.y(j));
    return s;
}

} // namespace

TEST_CASE("grid construction validates the resolution", "[grid]") {
    CHECK_THROWS_AS(Grid(7, Bc::Periodic), ConfigParse);
    CHECK_THROWS_AS(Grid(6, Bc::Periodic), ConfigParse);
    CHECK_NOTHROW(Grid(8, Bc::Walls));
    const Grid g(16, Bc::Periodic);
    CHECK(g.h == Catch::Approx(1.0 / 16.0));
    CHECK(g.x(0) == Catch::Approx(0.5 / 16.0));
    CHECK(g.y(15) == Catch::Approx(15.5 / 16.0));
}

TEST_CASE("gradient of a constant field is zero", "[grid]") {
    for (Bc bc : {Bc::Periodic, Bc::Walls}) {
        const Grid g(16, bc);
        const VectorField gr = grad(ScalarField(g, 3.7), Ghost::Mirror);
        for (std::size_t k = 0; k < g.cells(); ++k) {
            CHECK(gr.vx[k] == 0.0);
            CHECK(gr.vy[k] == 0.0);
        }
    }
}

TEST_CASE("centered gradient is second-order accurate", "[grid]") {
    auto max_err = [](int n) {
        const Grid g(n, Bc::Periodic);
        const ScalarField s =
            sample_scalar(g, [](double x, double) { return std::sin(kTwoPi * x); });
        const VectorField gr = grad(s, Ghost::Mirror);
        double err = 0.0;
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                err = std::max(err, std::abs(gr.x(i, j) -
                                             kTwoPi * std::cos(kTwoPi * g.x(i))));
        return err;
    };
    const double e32 = max_err(32), e64 = max_err(64);
    CHECK(e32 / e64 == Catch::Approx(4.0).margin(0.2));
}

TEST_CASE("compact Laplacian is exact on quadratics in walls interior", "[grid]") {
    const Grid g(16, Bc::Walls);
    const ScalarField s =
        sample_scalar(g, [](double x, double y) { return x * x + y * y; });
    const ScalarField lap = laplacian(s, Ghost::Mirror);
    for (int j = 2; j < g.n - 2; ++j)
        for (int i = 2; i < g.n - 2; ++i)
            CHECK(lap(i, j) == Catch::Approx(4.0).epsilon(1e-11));
}

TEST_CASE("quadrature integrates exactly representable fields", "[grid]") {
    const Grid g(32, Bc::Periodic);
    CHECK(integrate(ScalarField(g, 1.0)) == Catch::Approx(1.0).epsilon(1e-14));
    const ScalarField s =
        sample_scalar(g, [](double x, double) { return std::sin(kTwoPi * x); });
    CHECK(integrate(s) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("summation-by-parts duality of grad and div", "[grid]") {
    const Grid g(24, Bc::Periodic);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField s(g);
    VectorField v(g);
    for (std::size_t k = 0; k < g.cells(); ++k) {
        s.values[k] = u(rng);
        v.vx[k] = u(rng);
        v.vy[k] = u(rng);
    }
    // integral(s div v) + integral(grad s . v) = 0 for the paired operators
    const ScalarField dv = div(v, Ghost::Flip);
    const VectorField gs = grad(s, Ghost::Mirror);
    double sum = 0.0;
    for (std::size_t k = 0; k < g.cells(); ++k)
        sum += s.values[k] * dv.values[k] + gs.vx[k] * v.vx[k] + gs.vy[k] * v.vy[k];
    CHECK(sum * g.h * g.h == Catch::Approx(0.0).margin(1e-12));

    // same pairing for tensor fields: integral(T : grad v) + integral(div T . v) = 0
    TensorField t(g);
    for (int c = 0; c < 4; ++c)
        for (std::size_t k = 0; k < g.cells(); ++k) t.comp[c][k] = u(rng);
    const VectorField dt = div_tensor(t, Ghost::Mirror);
    const TensorField gv = grad_vec(v, Ghost::Flip);
    sum = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            sum += frob_inner(t.at(i, j), gv.at(i, j)) + dt.x(i, j) * v.x(i, j) +
                   dt.y(i, j) * v.y(i, j);
    CHECK(sum * g.h * g.h == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("conservative diffusion telescopes and respects monotonicity", "[grid]") {
    for (Bc bc : {Bc::Periodic, Bc::Walls}) {
        const Grid g(16, bc);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(0.5, 2.0);
        ScalarField s(g), k(g);
        for (std::size_t q = 0; q < g.cells(); ++q) {
            s.values[q] = u(rng);
            k.values[q] = u(rng);
        }
        const ScalarField d = div_k_grad(s, k);
        CHECK(integrate(d) == Catch::Approx(0.0).margin(1e-12));
    }
    // at an interior minimum the diffusion term is nonnegative
    const Grid g(16, Bc::Periodic);
    ScalarField s(g, 1.0), k(g, 1.0);
    s(8, 8) = 0.2;
    const ScalarField d = div_k_grad(s, k);
    CHECK(d(8, 8) > 0.0);
}

TEST_CASE("ghost handling in walls mode", "[grid]") {
    const Grid g(8, Bc::Walls);
    ScalarField s(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) s(i, j) = 10.0 * i + j;
    // Mirror reflects the first interior cell
    CHECK(s.at(-1, 3, Ghost::Mirror) == s(0, 3));
    CHECK(s.at(8, 3, Ghost::Mirror) == s(7, 3));
    // Flip reflects with a sign change
    CHECK(s.at(-1, 3, Ghost::Flip) == -s(0, 3));
    CHECK(s.at(3, 8, Ghost::Flip) == -s(3, 7));
    // periodic wraps
    const Grid gp(8, Bc::Periodic);
    ScalarField sp(gp);
    sp(0, 0) = 42.0;
    CHECK(sp.at(8, 0, Ghost::Mirror) == 42.0);
    CHECK(sp.at(-8, 0, Ghost::Flip) == 42.0);
}

TEST_CASE("projection removes the gradient part", "[grid][poisson]") {
    for (Bc bc : {Bc::Periodic, Bc::Walls}) {
        const Grid g(32, bc);
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        VectorField v(g);
        for (std::size_t k = 0; k < g.cells(); ++k) {
            v.vx[k] = u(rng);
            v.vy[k] = u(rng);
        }
        const double tol = 1e-10;
        auto [w, p] = project_div_free(v, tol);
        ScalarField dw = div(w, Ghost::Flip);
        if (bc == Bc::Walls) {
            double mean = integrate(dw);
            for (double& x : dw.values) x -= mean;
        }
        CHECK(max_abs(dw) <= 10.0 * tol);

        // idempotence: projecting again changes (almost) nothing
        auto [w2, p2] = project_div_free(w, tol);
        double diff = 0.0;
        for (std::size_t k = 0; k < g.cells(); ++k)
            diff = std::max(diff, std::max(std::abs(w2.vx[k] - w.vx[k]),
                                           std::abs(w2.vy[k] - w.vy[k])));
        CHECK(diff <= 100.0 * tol);

        // zero-mean pressure
        CHECK(integrate(p) == Catch::Approx(0.0).margin(1e-10));
    }
}

TEST_CASE("projection leaves a discretely divergence-free field unchanged",
          "[grid][poisson]") {
    const Grid g(32, Bc::Periodic);
    // v = discrete curl of a stream function: div v = 0 to round-off
    const ScalarField psi = sample_scalar(g, [](double x, double y) {
        return std::sin(kTwoPi * x) * std::sin(kTwoPi * y);
    });
    VectorField v(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            v.x(i, j) = (psi.at(i, j + 1, Ghost::Mirror) -
                         psi.at(i, j - 1, Ghost::Mirror)) * inv2h;
            v.y(i, j) = -(psi.at(i + 1, j, Ghost::Mirror) -
                          psi.at(i - 1, j, Ghost::Mirror)) * inv2h;
        }
    CHECK(max_abs(div(v, Ghost::Flip)) <= 1e-12);
    auto [w, p] = project_div_free(v, 1e-12);
    double diff = 0.0;
    for (std::size_t k = 0; k < g.cells(); ++k)
        diff = std::max(diff, std::max(std::abs(w.vx[k] - v.vx[k]),
                                       std::abs(w.vy[k] - v.vy[k])));
    CHECK(diff <= 1e-10);
}

TEST_CASE("projection annihilates pure discrete gradients", "[grid][poisson]") {
    const Grid g(32, Bc::Periodic);
    const ScalarField q = sample_scalar(g, [](double x, double y) {
        return std::cos(kTwoPi * x) + 0.5 * std::sin(kTwoPi * y);
    });
    const VectorField v = grad(q, Ghost::Mirror);
    auto [w, p] = project_div_free(v, 1e-12);
    double wmax = 0.0;
    for (std::size_t k = 0; k < g.cells(); ++k)
        wmax = std::max(wmax, std::max(std::abs(w.vx[k]), std::abs(w.vy[k])));
    CHECK(wmax <= 1e-8);
}

TEST_CASE("poisson_apply composes div and grad", "[grid][poisson]") {
    const Grid g(16, Bc::Periodic);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField p(g);
    for (double& x : p.values) x = u(rng);
    const ScalarField a = poisson_apply(p);
    const ScalarField b = div(grad(p, Ghost::Mirror), Ghost::Flip);
    for (std::size_t k = 0; k < g.cells(); ++k)
        CHECK(a.values[k] == Catch::Approx(b.values[k]).margin(1e-11));
}
