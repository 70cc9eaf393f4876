#pragma once

// Binary field snapshots.  Format: one ASCII header line
//   TVS1 <kind> <n> <time>\n
// with kind in {scalar, vector, tensor}, followed by row-major little-endian
// doubles (1, 2, or 4 planes).  An optional 8-bit PGM preview of a scalar
// field (min-max normalized) is provided for eyeballing.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tvs/errors.hpp"
#include "tvs/grid.hpp"
#include "tvs/solver.hpp"

namespace tvs {

namespace detail {

inline void write_doubles_le(std::ostream& out, const std::vector<double>& v) {
    static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  std::streamsize(v.size() * sizeof(double)));
    } else {
        for (double d : v) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, 8);
            char buf[8];
            for (int b = 0; b < 8; ++b) buf[b] = char((bits >> (8 * b)) & 0xff);
            out.write(buf, 8);
        }
    }
}

inline void read_doubles_le(std::istream& in, std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(v.data()),
                std::streamsize(v.size() * sizeof(double)));
    } else {
        for (double& d : v) {
            char buf[8];
            in.read(buf, 8);
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b)
                bits |= std::uint64_t(std::uint8_t(buf[b])) << (8 * b);
            std::memcpy(&d, &bits, 8);
        }
    }
    if (!in) throw ConfigParse("snapshot: truncated payload");
}

inline void write_header(std::ostream& out, const char* kind, int n, double t) {
    out << "TVS1 " << kind << ' ' << n << ' ';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    out << buf << '\n';
}

} // namespace detail

inline void write_snapshot(const std::string& path, const ScalarField& f, double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigParse("cannot open snapshot file for writing: " + path);
    detail::write_header(out, "scalar", f.grid.n, t);
    detail::write_doubles_le(out, f.values);
}

inline void write_snapshot(const std::string& path, const VectorField& f, double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigParse("cannot open snapshot file for writing: " + path);
    detail::write_header(out, "vector", f.grid.n, t);
    detail::write_doubles_le(out, f.vx);
    detail::write_doubles_le(out, f.vy);
}

inline void write_snapshot(const std::string& path, const TensorField& f, double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigParse("cannot open snapshot file for writing: " + path);
    detail::write_header(out, "tensor", f.grid.n, t);
    for (int c = 0; c < 4; ++c) detail::write_doubles_le(out, f.comp[c]);
}

struct SnapshotHeader {
    std::string kind;
    int n = 0;
    double t = 0.0;
};

inline SnapshotHeader read_snapshot_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line))
        throw ConfigParse("snapshot: cannot read header: " + path);
    std::istringstream hs(line);
    std::string magic;
    SnapshotHeader h;
    if (!(hs >> magic >> h.kind >> h.n >> h.t) || magic != "TVS1")
        throw ConfigParse("snapshot: bad header in " + path);
    if (h.n < 1) throw ConfigParse("snapshot: bad grid size in " + path);
    return h;
}

inline ScalarField read_scalar_snapshot(const std::string& path, Bc bc, double* t = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigParse("cannot open snapshot file: " + path);
    const SnapshotHeader h = read_snapshot_header(in, path);
    if (h.kind != "scalar")
        throw ConfigParse("snapshot: expected scalar, got " + h.kind + " in " + path);
    ScalarField f(Grid(h.n, bc));
    detail::read_doubles_le(in, f.values);
    if (t) *t = h.t;
    return f;
}

inline VectorField read_vector_snapshot(const std::string& path, Bc bc, double* t = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigParse("cannot open snapshot file: " + path);
    const SnapshotHeader h = read_snapshot_header(in, path);
    if (h.kind != "vector")
        throw ConfigParse("snapshot: expected vector, got " + h.kind + " in " + path);
    VectorField f(Grid(h.n, bc));
    detail::read_doubles_le(in, f.vx);
    detail::read_doubles_le(in, f.vy);
    if (t) *t = h.t;
    return f;
}

inline TensorField read_tensor_snapshot(const std::string& path, Bc bc, double* t = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigParse("cannot open snapshot file: " + path);
    const SnapshotHeader h = read_snapshot_header(in, path);
    if (h.kind != "tensor")
        throw ConfigParse("snapshot: expected tensor, got " + h.kind + " in " + path);
    TensorField f(Grid(h.n, bc));
    for (int c = 0; c < 4; ++c) detail::read_doubles_le(in, f.comp[c]);
    if (t) *t = h.t;
    return f;
}

// 8-bit min-max normalized preview, for quick visual inspection only.
inline void write_pgm_preview(const std::string& path, const ScalarField& f) {
    const Grid& g = f.grid;
    double lo = f.values[0], hi = f.values[0];
    for (double v : f.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigParse("cannot open preview file for writing: " + path);
    out << "P5\n" << g.n << ' ' << g.n << "\n255\n";
    std::vector<unsigned char> row(std::size_t(g.n));
    for (int j = g.n - 1; j >= 0; --j) { // top row first
        for (int i = 0; i < g.n; ++i)
            row[std::size_t(i)] =
                (unsigned char)std::lround(255.0 * (f(i, j) - lo) / span);
        out.write(reinterpret_cast<const char*>(row.data()), g.n);
    }
}

} // namespace tvs
