#pragma once

#include <cmath>
#include <optional>

#include "geometry.hpp"
#include "grid.hpp"

namespace carleman_lab {

namespace detail {

inline void require_stencil(const GridSpec& g) {
    if (g.nt < 5 || g.nx < 5)
        throw GridTooSmall("finite differences need at least 5x5 points, got " +
                           std::to_string(g.nt) + "x" + std::to_string(g.nx));
}

// first derivative along one axis with second-order one-sided edges
template <typename T, typename At>
T d1(At&& at, int k, int n, double h) {
    if (k == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    if (k == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
    return (at(k + 1) - at(k - 1)) / (2.0 * h);
}

template <typename T, typename At>
T d2(At&& at, int k, int n, double h) {
    if (k == 0) return (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (h * h);
    if (k == n - 1)
        return (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) / (h * h);
    return (at(k + 1) - 2.0 * at(k) + at(k - 1)) / (h * h);
}

} // namespace detail

template <typename T>
Field<T> d_t(const Field<T>& u) {
    const auto& g = u.grid;
    detail::require_stencil(g);
    Field<T> out(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            out(i, j) = detail::d1<T>([&](int k) { return u(k, j); }, i, g.nt, g.dt());
    return out;
}

template <typename T>
Field<T> d_x(const Field<T>& u) {
    const auto& g = u.grid;
    detail::require_stencil(g);
    Field<T> out(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            out(i, j) = detail::d1<T>([&](int k) { return u(i, k); }, j, g.nx, g.dx());
    return out;
}

template <typename T>
Field<T> d_tt(const Field<T>& u) {
    const auto& g = u.grid;
    detail::require_stencil(g);
    Field<T> out(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            out(i, j) = detail::d2<T>([&](int k) { return u(k, j); }, i, g.nt, g.dt());
    return out;
}

template <typename T>
Field<T> d_xx(const Field<T>& u) {
    const auto& g = u.grid;
    detail::require_stencil(g);
    Field<T> out(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            out(i, j) = detail::d2<T>([&](int k) { return u(i, k); }, j, g.nx, g.dx());
    return out;
}

template <typename T>
VectorField<T> gradient(const Field<T>& u) {
    return {d_t(u), d_x(u)};
}

// spatial Laplacian: ∂_x² in cartesian mode, ∂_r² + (n-1)/r ∂_r in radial mode
template <typename T>
Field<T> spatial_laplacian(const Field<T>& u) {
    Field<T> out = d_xx(u);
    const auto& g = u.grid;
    if (g.radial() && g.n > 1) {
        const Field<T> ur = d_x(u);
        for (int i = 0; i < g.nt; ++i)
            for (int j = 0; j < g.nx; ++j) out(i, j) += double(g.n - 1) / g.x(j) * ur(i, j);
    }
    return out;
}

// Lorentzian Laplacian -∂_t² + Δ_x, evaluated at every node
template <typename T>
Field<T> lorentz_laplacian(const Field<T>& u) {
    Field<T> out = spatial_laplacian(u);
    out -= d_tt(u);
    return out;
}

// (∂_t² - Δ_x + q)u by central differences on interior nodes; zero on the
// boundary ring.
template <typename T>
Field<T> apply_box(const Field<T>& u, const ScalarField* q = nullptr) {
    const auto& g = u.grid;
    detail::require_stencil(g);
    if (q && !q->grid.same_as(g)) throw ConfigError("apply_box: potential lives on another grid");
    Field<T> out(g);
    const double it2 = 1.0 / (g.dt() * g.dt()), ix2 = 1.0 / (g.dx() * g.dx());
    const double ix = 0.5 / g.dx();
    const bool rad = g.radial() && g.n > 1;
    for (int i = 1; i < g.nt - 1; ++i) {
        for (int j = 1; j < g.nx - 1; ++j) {
            T val = (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) * it2 -
                    (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) * ix2;
            if (rad) val -= double(g.n - 1) / g.x(j) * (u(i, j + 1) - u(i, j - 1)) * ix;
            if (q) val += (*q)(i, j) * u(i, j);
            out(i, j) = val;
        }
    }
    return out;
}

template <typename T>
Field<T> apply_box(const Field<T>& u, const ScalarField& q) {
    return apply_box(u, &q);
}

enum class NormKind { L2, H1, H1x };

// Σ w·f over the mask, with w the node quadrature weights
inline double integrate(const ScalarField& f, const ScalarField* mask = nullptr) {
    const ScalarField w = cell_volumes(f.grid);
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += (mask ? mask->v[k] : 1.0) * w.v[k] * f.v[k];
    return s;
}

template <typename T>
double norm_sq(const Field<T>& u, const ScalarField& mask, NormKind kind) {
    const ScalarField w = cell_volumes(u.grid);
    std::optional<Field<T>> ut, ux;
    if (kind == NormKind::H1) ut = d_t(u);
    if (kind != NormKind::L2) ux = d_x(u);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (mask.v[k] == 0.0) continue;
        double e = abs2(u.v[k]);
        if (ut) e += abs2(ut->v[k]);
        if (ux) e += abs2(ux->v[k]);
        s += mask.v[k] * w.v[k] * e;
    }
    return s;
}

template <typename T>
double norm(const Field<T>& u, const ScalarField& mask, NormKind kind = NormKind::L2) {
    return std::sqrt(norm_sq(u, mask, kind));
}

template <typename T>
double norm(const Field<T>& u, const Region& region, const GeometryConfig& cfg,
            NormKind kind = NormKind::L2) {
    return norm(u, region_mask(u.grid, region, cfg), kind);
}

// norm over the whole grid
template <typename T>
double norm(const Field<T>& u, NormKind kind = NormKind::L2) {
    return norm(u, ScalarField(u.grid, 1.0), kind);
}

} // namespace carleman_lab
