#pragma once

// Uniform cell-centered mesh on the unit square, discrete differential
// operators (second-order centered), boundary handling and quadrature.

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "tvs/errors.hpp"
#include "tvs/tensor2.hpp"

namespace tvs {

enum class Bc { Periodic, Walls };

// Ghost-cell rule used when an index leaves the mesh in walls mode.
// Mirror reflects about the boundary face (homogeneous Neumann), Flip
// reflects with a sign change (homogeneous Dirichlet at the face).
enum class Ghost { Mirror, Flip };

struct Grid {
    int n = 8;
    double h = 1.0 / 8.0;
    Bc bc = Bc::Periodic;

    // Pre-resolved neighbor cells for offsets -2..+2 (the widest stencil in
    // use), shared between grid copies.  Mirror signs are always +1; only the
    // Flip rule carries boundary sign changes.
    struct Neighbors {
        std::array<std::vector<int>, 5> cell;
        std::array<std::vector<double>, 5> flip_sign;
    };
    std::shared_ptr<const Neighbors> nbr;

    Grid() { build_neighbors(); }
    Grid(int n_, Bc bc_) : n(n_), h(1.0 / n_), bc(bc_) {
        if (n_ < 8 || n_ % 2 != 0)
            throw ConfigParse("grid: n must be even and >= 8");
        build_neighbors();
    }

    // resolved cell / Flip sign of index i + off, off in [-2, 2]
    int nb(int off, int i) const { return nbr->cell[off + 2][i]; }
    double fsgn(int off, int i) const { return nbr->flip_sign[off + 2][i]; }

    std::size_t cells() const { return std::size_t(n) * n; }
    std::size_t idx(int i, int j) const { return std::size_t(j) * n + i; }
    double x(int i) const { return (i + 0.5) * h; }
    double y(int j) const { return (j + 0.5) * h; }

    bool operator==(const Grid& o) const {
        return n == o.n && bc == o.bc;
    }

    // Resolves an out-of-range index to (cell, sign) under the given rule.
    void resolve(int k, Ghost rule, int& cell, double& sign) const {
        sign = 1.0;
        if (bc == Bc::Periodic) {
            cell = ((k % n) + n) % n;
            return;
        }
        cell = k;
        while (cell < 0 || cell >= n) {
            if (cell < 0) cell = -cell - 1;
            else cell = 2 * n - 1 - cell;
            if (rule == Ghost::Flip) sign = -sign;
        }
    }

  private:
    void build_neighbors() {
        auto t = std::make_shared<Neighbors>();
        for (int off = -2; off <= 2; ++off) {
            auto& cells = t->cell[off + 2];
            auto& signs = t->flip_sign[off + 2];
            cells.resize(n);
            signs.resize(n);
            for (int i = 0; i < n; ++i) {
                double s;
                resolve(i + off, Ghost::Flip, cells[i], s);
                signs[i] = s;
            }
        }
        nbr = std::move(t);
    }
};

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(g.cells(), fill) {}

    double& operator()(int i, int j) { return values[grid.idx(i, j)]; }
    double operator()(int i, int j) const { return values[grid.idx(i, j)]; }

    double at(int i, int j, Ghost rule) const {
        int ci, cj;
        double si, sj;
        grid.resolve(i, rule, ci, si);
        grid.resolve(j, rule, cj, sj);
        return si * sj * values[grid.idx(ci, cj)];
    }
};

struct VectorField {
    Grid grid;
    std::vector<double> vx, vy;

    VectorField() = default;
    explicit VectorField(const Grid& g, double fx = 0.0, double fy = 0.0)
        : grid(g), vx(g.cells(), fx), vy(g.cells(), fy) {}

    double& x(int i, int j) { return vx[grid.idx(i, j)]; }
    double x(int i, int j) const { return vx[grid.idx(i, j)]; }
    double& y(int i, int j) { return vy[grid.idx(i, j)]; }
    double y(int i, int j) const { return vy[grid.idx(i, j)]; }

    double comp(int c, int i, int j) const {
        return c == 0 ? vx[grid.idx(i, j)] : vy[grid.idx(i, j)];
    }
    double at(int c, int i, int j, Ghost rule) const {
        int ci, cj;
        double si, sj;
        grid.resolve(i, rule, ci, si);
        grid.resolve(j, rule, cj, sj);
        return si * sj * (c == 0 ? vx[grid.idx(ci, cj)] : vy[grid.idx(ci, cj)]);
    }
};

struct TensorField {
    Grid grid;
    // component planes: c = 0..3 maps to (11, 12, 21, 22)
    std::vector<double> comp[4];

    TensorField() = default;
    explicit TensorField(const Grid& g) : grid(g) {
        for (auto& c : comp) c.assign(g.cells(), 0.0);
    }
    static TensorField identity(const Grid& g) {
        TensorField t(g);
        for (auto& v : t.comp[0]) v = 1.0;
        for (auto& v : t.comp[3]) v = 1.0;
        return t;
    }

    Mat2 at(int i, int j) const {
        const std::size_t k = grid.idx(i, j);
        return {comp[0][k], comp[1][k], comp[2][k], comp[3][k]};
    }
    void set(int i, int j, const Mat2& m) {
        const std::size_t k = grid.idx(i, j);
        comp[0][k] = m.a11;
        comp[1][k] = m.a12;
        comp[2][k] = m.a21;
        comp[3][k] = m.a22;
    }
    Mat2 at(int i, int j, Ghost rule) const {
        int ci, cj;
        double si, sj;
        grid.resolve(i, rule, ci, si);
        grid.resolve(j, rule, cj, sj);
        const std::size_t k = grid.idx(ci, cj);
        const double s = si * sj;
        return {s * comp[0][k], s * comp[1][k], s * comp[2][k], s * comp[3][k]};
    }
};

// ---- centered differences ----
// The hot loops read neighbors through the pre-resolved tables; `fsgn` only
// differs from +1 for the Flip rule at wall boundaries.

namespace detail {
inline double ghost_sign(const Grid& g, Ghost rule, int off, int i) {
    return rule == Ghost::Flip ? g.fsgn(off, i) : 1.0;
}
} // namespace detail

inline VectorField grad(const ScalarField& s, Ghost rule = Ghost::Mirror) {
    const Grid& g = s.grid;
    VectorField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    const double* sv = s.values.data();
    for (int j = 0; j < g.n; ++j) {
        const int jm = g.nb(-1, j), jp = g.nb(1, j);
        const double sjm = detail::ghost_sign(g, rule, -1, j);
        const double sjp = detail::ghost_sign(g, rule, 1, j);
        for (int i = 0; i < g.n; ++i) {
            const int im = g.nb(-1, i), ip = g.nb(1, i);
            out.x(i, j) = (detail::ghost_sign(g, rule, 1, i) * sv[g.idx(ip, j)] -
                           detail::ghost_sign(g, rule, -1, i) * sv[g.idx(im, j)]) * inv2h;
            out.y(i, j) = (sjp * sv[g.idx(i, jp)] - sjm * sv[g.idx(i, jm)]) * inv2h;
        }
    }
    return out;
}

inline ScalarField div(const VectorField& v, Ghost rule = Ghost::Flip) {
    const Grid& g = v.grid;
    ScalarField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    const double* vx = v.vx.data();
    const double* vy = v.vy.data();
    for (int j = 0; j < g.n; ++j) {
        const int jm = g.nb(-1, j), jp = g.nb(1, j);
        const double sjm = detail::ghost_sign(g, rule, -1, j);
        const double sjp = detail::ghost_sign(g, rule, 1, j);
        for (int i = 0; i < g.n; ++i) {
            const int im = g.nb(-1, i), ip = g.nb(1, i);
            out(i, j) = (detail::ghost_sign(g, rule, 1, i) * vx[g.idx(ip, j)] -
                         detail::ghost_sign(g, rule, -1, i) * vx[g.idx(im, j)] +
                         sjp * vy[g.idx(i, jp)] - sjm * vy[g.idx(i, jm)]) * inv2h;
        }
    }
    return out;
}

// velocity gradient (grad v)_{ab} = d v_a / d x_b
inline TensorField grad_vec(const VectorField& v, Ghost rule = Ghost::Flip) {
    const Grid& g = v.grid;
    TensorField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    const double* vx = v.vx.data();
    const double* vy = v.vy.data();
    for (int j = 0; j < g.n; ++j) {
        const int jm = g.nb(-1, j), jp = g.nb(1, j);
        const double sjm = detail::ghost_sign(g, rule, -1, j);
        const double sjp = detail::ghost_sign(g, rule, 1, j);
        for (int i = 0; i < g.n; ++i) {
            const int im = g.nb(-1, i), ip = g.nb(1, i);
            const double sim = detail::ghost_sign(g, rule, -1, i);
            const double sip = detail::ghost_sign(g, rule, 1, i);
            Mat2 m;
            m.a11 = (sip * vx[g.idx(ip, j)] - sim * vx[g.idx(im, j)]) * inv2h;
            m.a12 = (sjp * vx[g.idx(i, jp)] - sjm * vx[g.idx(i, jm)]) * inv2h;
            m.a21 = (sip * vy[g.idx(ip, j)] - sim * vy[g.idx(im, j)]) * inv2h;
            m.a22 = (sjp * vy[g.idx(i, jp)] - sjm * vy[g.idx(i, jm)]) * inv2h;
            out.set(i, j, m);
        }
    }
    return out;
}

// (div T)_a = d T_{ab} / d x_b
inline VectorField div_tensor(const TensorField& t, Ghost rule = Ghost::Mirror) {
    const Grid& g = t.grid;
    VectorField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    for (int j = 0; j < g.n; ++j) {
        const int jm = g.nb(-1, j), jp = g.nb(1, j);
        const double sjm = detail::ghost_sign(g, rule, -1, j);
        const double sjp = detail::ghost_sign(g, rule, 1, j);
        for (int i = 0; i < g.n; ++i) {
            const int im = g.nb(-1, i), ip = g.nb(1, i);
            const double sim = detail::ghost_sign(g, rule, -1, i);
            const double sip = detail::ghost_sign(g, rule, 1, i);
            out.x(i, j) = ((sip * t.comp[0][g.idx(ip, j)] - sim * t.comp[0][g.idx(im, j)]) +
                           (sjp * t.comp[1][g.idx(i, jp)] - sjm * t.comp[1][g.idx(i, jm)])) * inv2h;
            out.y(i, j) = ((sip * t.comp[2][g.idx(ip, j)] - sim * t.comp[2][g.idx(im, j)]) +
                           (sjp * t.comp[3][g.idx(i, jp)] - sjm * t.comp[3][g.idx(i, jm)])) * inv2h;
        }
    }
    return out;
}

// compact 5-point Laplacian, exact on quadratics
inline ScalarField laplacian(const ScalarField& s, Ghost rule = Ghost::Mirror) {
    const Grid& g = s.grid;
    ScalarField out(g);
    const double invh2 = 1.0 / (g.h * g.h);
    const double* sv = s.values.data();
    for (int j = 0; j < g.n; ++j) {
        const int jm = g.nb(-1, j), jp = g.nb(1, j);
        const double sjm = detail::ghost_sign(g, rule, -1, j);
        const double sjp = detail::ghost_sign(g, rule, 1, j);
        for (int i = 0; i < g.n; ++i) {
            const int im = g.nb(-1, i), ip = g.nb(1, i);
            out(i, j) = (detail::ghost_sign(g, rule, 1, i) * sv[g.idx(ip, j)] +
                         detail::ghost_sign(g, rule, -1, i) * sv[g.idx(im, j)] +
                         sjp * sv[g.idx(i, jp)] + sjm * sv[g.idx(i, jm)] -
                         4.0 * sv[g.idx(i, j)]) * invh2;
        }
    }
    return out;
}

inline TensorField laplacian_tensor(const TensorField& t, Ghost rule = Ghost::Mirror) {
    const Grid& g = t.grid;
    TensorField out(g);
    const double invh2 = 1.0 / (g.h * g.h);
    for (int c = 0; c < 4; ++c) {
        const double* tc = t.comp[c].data();
        double* oc = out.comp[c].data();
        for (int j = 0; j < g.n; ++j) {
            const int jm = g.nb(-1, j), jp = g.nb(1, j);
            const double sjm = detail::ghost_sign(g, rule, -1, j);
            const double sjp = detail::ghost_sign(g, rule, 1, j);
            for (int i = 0; i < g.n; ++i) {
                const int im = g.nb(-1, i), ip = g.nb(1, i);
                oc[g.idx(i, j)] =
                    (detail::ghost_sign(g, rule, 1, i) * tc[g.idx(ip, j)] +
                     detail::ghost_sign(g, rule, -1, i) * tc[g.idx(im, j)] +
                     sjp * tc[g.idx(i, jp)] + sjm * tc[g.idx(i, jm)] +
                     tc[g.idx(i, j)] * -4.0) * invh2;
            }
        }
    }
    return out;
}

// div(k grad s) in conservative face-flux form: compact, monotone, and its
// grid sum telescopes to the boundary flux (zero under periodic/Neumann).
inline ScalarField div_k_grad(const ScalarField& s, const ScalarField& k) {
    const Grid& g = s.grid;
    ScalarField out(g);
    const double invh2 = 1.0 / (g.h * g.h);
    const double* sv = s.values.data();
    const double* kv = k.values.data();
    const bool walls = g.bc == Bc::Walls;
    // flux through the face between cells q0 and q1 (Mirror signs are +1)
    auto face_flux = [&](std::size_t q0, std::size_t q1, bool open) {
        if (!open) return 0.0; // no-flux boundary face
        const double kf = 0.5 * (kv[q0] + kv[q1]);
        return kf * (sv[q1] - sv[q0]);
    };
    for (int j = 0; j < g.n; ++j) {
        const int jm = g.nb(-1, j), jp = g.nb(1, j);
        const bool open_jm = !(walls && j == 0), open_jp = !(walls && j == g.n - 1);
        for (int i = 0; i < g.n; ++i) {
            const int im = g.nb(-1, i), ip = g.nb(1, i);
            const bool open_im = !(walls && i == 0), open_ip = !(walls && i == g.n - 1);
            const std::size_t q = g.idx(i, j);
            out(i, j) = (face_flux(q, g.idx(ip, j), open_ip) -
                         face_flux(g.idx(im, j), q, open_im) +
                         face_flux(q, g.idx(i, jp), open_jp) -
                         face_flux(g.idx(i, jm), q, open_jm)) * invh2;
        }
    }
    return out;
}

inline double integrate(const ScalarField& s) {
    double sum = 0.0;
    for (double v : s.values) sum += v;
    return sum * s.grid.h * s.grid.h;
}

inline double min_value(const ScalarField& s) {
    double m = s.values.empty() ? 0.0 : s.values[0];
    for (double v : s.values) m = std::min(m, v);
    return m;
}

inline double max_abs(const ScalarField& s) {
    double m = 0.0;
    for (double v : s.values) m = std::max(m, std::abs(v));
    return m;
}

} // namespace tvs
