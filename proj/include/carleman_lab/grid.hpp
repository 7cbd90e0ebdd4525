#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace carleman_lab {

enum class Coord { Cartesian, Radial };

// Uniform tensor grid in (t, x) or (t, r). Index i runs over time, j over space.
struct GridSpec {
    double t_min = -0.5, t_max = 0.5;
    double x_min = -1.0, x_max = 1.0;
    int nt = 129, nx = 129;
    Coord coord = Coord::Cartesian;
    int n = 1;

    double dt() const { return (t_max - t_min) / (nt - 1); }
    double dx() const { return (x_max - x_min) / (nx - 1); }
    double t(int i) const { return t_min + i * dt(); }
    double x(int j) const { return x_min + j * dx(); }
    std::size_t size() const { return std::size_t(nt) * std::size_t(nx); }
    bool radial() const { return coord == Coord::Radial; }

    // radius of a spatial node (|x| in cartesian mode)
    double r(int j) const { return std::abs(x(j)); }

    void validate(int min_points = 5) const {
        if (!(t_max > t_min) || !(x_max > x_min))
            throw ConfigError("grid extents must be increasing");
        if (nt < min_points || nx < min_points)
            throw GridTooSmall("grid needs at least " + std::to_string(min_points) +
                               " points per axis, got " + std::to_string(nt) + "x" +
                               std::to_string(nx));
        if (radial() && !(x_min > 0.0))
            throw ConfigError("radial grids need r_min > 0");
        if (n < 1) throw ConfigError("spatial dimension must be >= 1");
    }

    // same extents, point counts 2(n-1)+1
    GridSpec refined() const {
        GridSpec g = *this;
        g.nt = 2 * (nt - 1) + 1;
        g.nx = 2 * (nx - 1) + 1;
        return g;
    }

    bool same_as(const GridSpec& o) const {
        return t_min == o.t_min && t_max == o.t_max && x_min == o.x_min &&
               x_max == o.x_max && nt == o.nt && nx == o.nx && coord == o.coord &&
               n == o.n;
    }
};

template <typename T>
struct Field {
    GridSpec grid;
    std::vector<T> v;

    Field() = default;
    explicit Field(const GridSpec& g, T fill = T(0)) : grid(g), v(g.size(), fill) {}

    T& operator()(int i, int j) { return v[std::size_t(i) * grid.nx + j]; }
    const T& operator()(int i, int j) const { return v[std::size_t(i) * grid.nx + j]; }
    std::size_t size() const { return v.size(); }

    template <typename F>
    static Field sample(const GridSpec& g, F&& f) {
        Field out(g);
        for (int i = 0; i < g.nt; ++i)
            for (int j = 0; j < g.nx; ++j) out(i, j) = T(f(g.t(i), g.x(j)));
        return out;
    }

    Field& operator+=(const Field& o) {
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += o.v[k];
        return *this;
    }
    Field& operator-=(const Field& o) {
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= o.v[k];
        return *this;
    }
    Field& operator*=(T s) {
        for (auto& a : v) a *= s;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(T s, Field a) { return a *= s; }

    bool all_finite() const {
        for (const auto& a : v)
            if (!std::isfinite(std::abs(a))) return false;
        return true;
    }
};

using ScalarField = Field<double>;
using ComplexField = Field<std::complex<double>>;

template <typename T>
struct VectorField {
    Field<T> t, x;
};

template <typename T>
Field<T> pointwise(const Field<T>& a, const Field<T>& b) {
    Field<T> out(a.grid);
    for (std::size_t k = 0; k < a.v.size(); ++k) out.v[k] = a.v[k] * b.v[k];
    return out;
}

inline double abs2(double a) { return a * a; }
inline double abs2(const std::complex<double>& a) { return std::norm(a); }

inline ScalarField real_part(const ComplexField& f) {
    ScalarField out(f.grid);
    for (std::size_t k = 0; k < f.v.size(); ++k) out.v[k] = f.v[k].real();
    return out;
}

inline ComplexField to_complex(const ScalarField& f) {
    ComplexField out(f.grid);
    for (std::size_t k = 0; k < f.v.size(); ++k) out.v[k] = f.v[k];
    return out;
}

// Flat binary dump: 8-byte magic, int64 nt, int64 nx, float64 t_min, t_max,
// x_min, x_max, then nt*nx float64 values in row-major (time-major) order.
inline constexpr char kFieldMagic[8] = {'C', 'L', 'F', 'I', 'E', 'L', 'D', '1'};

inline void write_field(const std::string& path, const ScalarField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os.write(kFieldMagic, 8);
    std::int64_t dims[2] = {f.grid.nt, f.grid.nx};
    double ext[4] = {f.grid.t_min, f.grid.t_max, f.grid.x_min, f.grid.x_max};
    os.write(reinterpret_cast<const char*>(dims), sizeof dims);
    os.write(reinterpret_cast<const char*>(ext), sizeof ext);
    os.write(reinterpret_cast<const char*>(f.v.data()),
             std::streamsize(f.v.size() * sizeof(double)));
}

inline ScalarField read_field(const std::string& path, Coord coord = Coord::Cartesian,
                              int n = 1) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kFieldMagic, 8) != 0)
        throw ConfigError(path + " is not a field dump");
    std::int64_t dims[2];
    double ext[4];
    is.read(reinterpret_cast<char*>(dims), sizeof dims);
    is.read(reinterpret_cast<char*>(ext), sizeof ext);
    GridSpec g;
    g.nt = int(dims[0]);
    g.nx = int(dims[1]);
    g.t_min = ext[0];
    g.t_max = ext[1];
    g.x_min = ext[2];
    g.x_max = ext[3];
    g.coord = coord;
    g.n = n;
    ScalarField f(g);
    is.read(reinterpret_cast<char*>(f.v.data()), std::streamsize(f.v.size() * sizeof(double)));
    if (!is) throw ConfigError(path + " is truncated");
    return f;
}

} // namespace carleman_lab
