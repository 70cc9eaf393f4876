#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tvs/tensor2.hpp"

using namespace tvs;

TEST_CASE("bb_from_f basic products", "[tensor2]") {
    const SymMat2 id = bb_from_f(Mat2::identity());
    CHECK(id.b11 == 1.0);
    CHECK(id.b12 == 0.0);
    CHECK(id.b22 == 1.0);

    const SymMat2 d = bb_from_f({2.0, 0.0, 0.0, 1.0});
    CHECK(d.b11 == 4.0);
    CHECK(d.b12 == 0.0);
    CHECK(d.b22 == 1.0);

    const SymMat2 s = bb_from_f({1.0, 1.0, 0.0, 1.0});
    CHECK(s.b11 == 2.0);
    CHECK(s.b12 == 1.0);
    CHECK(s.b22 == 1.0);
}

TEST_CASE("invert_spd on known matrices", "[tensor2]") {
    const SymMat2 id = invert_spd(SymMat2::identity());
    CHECK(id.b11 == 1.0);
    CHECK(id.b12 == 0.0);
    CHECK(id.b22 == 1.0);

    const SymMat2 d = invert_spd(SymMat2::diag(4.0, 1.0));
    CHECK(d.b11 == Catch::Approx(0.25).margin(1e-15));
    CHECK(d.b22 == Catch::Approx(1.0).margin(1e-15));

    const SymMat2 m = invert_spd({2.0, 1.0, 1.0});
    CHECK(m.b11 == Catch::Approx(1.0).margin(1e-15));
    CHECK(m.b12 == Catch::Approx(-1.0).margin(1e-15));
    CHECK(m.b22 == Catch::Approx(2.0).margin(1e-15));

    CHECK_THROWS_AS(invert_spd(SymMat2::diag(-1.0, 1.0)), NotPositiveDefinite);
    CHECK_THROWS_AS(invert_spd(SymMat2::diag(1.0, 0.0)), NotPositiveDefinite);
    CHECK_THROWS_AS(invert_spd({1.0, 2.0, 1.0}), NotPositiveDefinite);
}

TEST_CASE("frobenius inner product", "[tensor2]") {
    CHECK(frob_inner(Mat2::identity(), Mat2::identity()) == 2.0);
    const Mat2 traceless{3.0, 5.0, -7.0, -3.0};
    CHECK(frob_inner(Mat2::identity(), traceless) == 0.0);
    CHECK(frob_inner(Mat2{1.0, 2.0, 3.0, 4.0}, Mat2::identity()) == 5.0);

    // symmetric storage agrees with the full-matrix inner product
    const SymMat2 a{1.5, -0.7, 2.2}, b{0.3, 0.9, -1.1};
    CHECK(frob_inner(a, b) == Catch::Approx(frob_inner(a.full(), b.full())).epsilon(1e-15));
}

TEST_CASE("matrix inequalities on random samples", "[tensor2]") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int it = 0; it < 2000; ++it) {
        const Mat2 f{u(rng), u(rng), u(rng), u(rng)};
        const double nf = frob_norm(f);
        CHECK(std::abs(f.trace()) <= std::sqrt(2.0) * nf + 1e-14);
        const SymMat2 b = bb_from_f(f);
        CHECK(nf * nf * nf * nf <= 2.0 * frob_inner(b, b) + 1e-12);
        CHECK(b.det() == Catch::Approx(f.det() * f.det()).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("inverse identity for random well-conditioned F", "[tensor2]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int accepted = 0;
    while (accepted < 500) {
        Mat2 f{1.0 + 0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng), 1.0 + 0.5 * u(rng)};
        if (std::abs(f.det()) < 0.3) continue;
        ++accepted;
        const SymMat2 b = bb_from_f(f);
        const Mat2 prod = invert_spd(b) * b.full();
        CHECK(prod.a11 == Catch::Approx(1.0).margin(1e-12));
        CHECK(prod.a12 == Catch::Approx(0.0).margin(1e-12));
        CHECK(prod.a21 == Catch::Approx(0.0).margin(1e-12));
        CHECK(prod.a22 == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("sym_part and algebra helpers", "[tensor2]") {
    const Mat2 a{1.0, 2.0, 4.0, -1.0};
    const SymMat2 s = sym_part(a);
    CHECK(s.b11 == 1.0);
    CHECK(s.b12 == 3.0);
    CHECK(s.b22 == -1.0);
    const Mat2 at = a.transpose();
    CHECK(at.a12 == 4.0);
    CHECK(at.a21 == 2.0);
    CHECK(a.det() == Catch::Approx(-9.0));
    CHECK((a * Mat2::identity()).a21 == 4.0);
}
