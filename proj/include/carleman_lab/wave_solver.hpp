#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "grid_ops.hpp"

namespace carleman_lab {

// Cauchy data at grid time index i0 (default the first row). The solution is
// produced on every row of grid; rows before i0 are reached by reversing time.
struct CauchyProblem {
    GridSpec grid;
    std::vector<double> q;          // spatial potential, empty for q = 0
    std::optional<ScalarField> f;   // source on the space-time grid
    std::vector<double> u0, u1;
    int i0 = 0;
    double cfl = 0.9;
    int substeps = 0;               // 0: smallest count with dt_sub <= cfl·dx
};

namespace detail {

class SpatialOperator {
public:
    SpatialOperator(const GridSpec& g, const std::vector<double>& q) : g_(g), q_(q) {
        const int nx = g.nx;
        const double dx = g.dx();
        rad_ = g.radial() && g.n > 1;
        if (rad_) {
            wl_.resize(nx);
            wr_.resize(nx);
            for (int j = 0; j < nx; ++j) {
                const double r = g.x(j), p = g.n - 1;
                wl_[j] = std::pow((r - 0.5 * dx) / r, p);
                wr_[j] = std::pow((r + 0.5 * dx) / r, p);
            }
        }
    }

    // out = (Δ_h - q)u with Dirichlet zero at the outer end(s); in radial mode
    // the inner end r_min reflects evenly
    void apply(const std::vector<double>& u, std::vector<double>& out) const {
        const int nx = g_.nx;
        const double ih2 = 1.0 / (g_.dx() * g_.dx());
        out.assign(nx, 0.0);
        const bool reflect = g_.radial();
        const int jlo = reflect ? 0 : 1;
        for (int j = jlo; j < nx - 1; ++j) {
            const double ul = j == 0 ? u[1] : u[j - 1];
            double v;
            if (rad_)
                v = (wr_[j] * (u[j + 1] - u[j]) - wl_[j] * (u[j] - ul)) * ih2;
            else
                v = (u[j + 1] - 2.0 * u[j] + ul) * ih2;
            if (!q_.empty()) v -= q_[j] * u[j];
            out[j] = v;
        }
    }

    // weights of the inner product in which Δ_h is symmetric
    double weight(int j) const {
        const double w = g_.radial() && g_.n > 1 ? std::pow(g_.x(j), g_.n - 1) : 1.0;
        return j == 0 && g_.radial() ? 0.5 * w : w;
    }

private:
    GridSpec g_;
    std::vector<double> q_;
    bool rad_ = false;
    std::vector<double> wl_, wr_;
};

inline double source_at(const std::optional<ScalarField>& f, double t, int j) {
    if (!f) return 0.0;
    const auto& g = f->grid;
    const double s = (t - g.t_min) / g.dt();
    int i = int(std::floor(s));
    i = std::clamp(i, 0, g.nt - 2);
    const double w = s - i;
    return (1.0 - w) * (*f)(i, j) + w * (*f)(i + 1, j);
}

} // namespace detail

inline int resolve_substeps(const CauchyProblem& p) {
    const auto& g = p.grid;
    if (!(p.cfl > 0.0 && p.cfl <= 0.9))
        throw CflViolation("Courant number must lie in (0, 0.9], got " + std::to_string(p.cfl));
    const double limit = p.cfl * g.dx();
    int m = p.substeps > 0 ? p.substeps : int(std::ceil(g.dt() / limit * (1 - 1e-12)));
    m = std::max(m, 1);
    if (g.dt() / m > limit * (1 + 1e-12))
        throw CflViolation("time step " + std::to_string(g.dt() / m) + " exceeds cfl·dx = " +
                           std::to_string(limit));
    return m;
}

inline ScalarField solve(const CauchyProblem& p) {
    const auto& g = p.grid;
    g.validate(5);
    if (int(p.u0.size()) != g.nx || int(p.u1.size()) != g.nx)
        throw ConfigError("Cauchy data must have nx samples");
    if (!p.q.empty() && int(p.q.size()) != g.nx) throw ConfigError("potential must have nx samples");
    if (p.f && !p.f->grid.same_as(g)) throw ConfigError("source lives on another grid");
    if (p.i0 < 0 || p.i0 >= g.nt) throw ConfigError("initial time index outside the grid");
    const int m = resolve_substeps(p);
    const double h = g.dt() / m;
    const detail::SpatialOperator op(g, p.q);
    ScalarField out(g);
    const int nx = g.nx;
    for (int j = 0; j < nx; ++j) out(p.i0, j) = p.u0[j];

    // dir = +1 forward, -1 backward; the backward problem is the forward one
    // with reversed velocity and reflected source
    for (int dir : {+1, -1}) {
        const int last = dir > 0 ? g.nt - 1 : 0;
        if (p.i0 == last) continue;
        const double t0 = g.t(p.i0);
        std::vector<double> prev = p.u0, cur(nx), next(nx), lap(nx);
        op.apply(prev, lap);
        for (int j = 0; j < nx; ++j)
            cur[j] = prev[j] + dir * h * p.u1[j] +
                     0.5 * h * h * (lap[j] + detail::source_at(p.f, t0, j));
        cur[nx - 1] = 0.0;
        if (!g.radial()) cur[0] = 0.0;
        int step = 1;
        int row = p.i0;
        auto emit = [&](const std::vector<double>& u) {
            row += dir;
            for (int j = 0; j < nx; ++j) {
                if (!std::isfinite(u[j]))
                    throw NonFiniteDetected("non-finite value at t = " + std::to_string(g.t(row)));
                out(row, j) = u[j];
            }
        };
        if (m == 1) emit(cur);
        while (row != last) {
            op.apply(cur, lap);
            const double t = t0 + dir * step * h;
            for (int j = 0; j < nx; ++j) {
                const double fs = 0.5 * (detail::source_at(p.f, t - 0.5 * dir * h, j) +
                                         detail::source_at(p.f, t + 0.5 * dir * h, j));
                next[j] = 2.0 * cur[j] - prev[j] + h * h * (lap[j] + fs);
            }
            next[nx - 1] = 0.0;
            if (!g.radial()) next[0] = 0.0;
            std::swap(prev, cur);
            std::swap(cur, next);
            ++step;
            if (step % m == 0) emit(cur);
        }
    }
    return out;
}

// Discrete energy ½‖(u^{k+1} - u^k)/dt‖² + ½⟨-(Δ_h - q)u^{k+1}, u^k⟩ between
// consecutive rows of the solution; conserved by the leapfrog scheme when
// f = 0 and one substep is used per row.
inline std::vector<double> discrete_energy(const ScalarField& u, const std::vector<double>& q = {}) {
    const auto& g = u.grid;
    const detail::SpatialOperator op(g, q);
    std::vector<double> E;
    std::vector<double> a(g.nx), b(g.nx), lb(g.nx);
    const double dt = g.dt(), dx = g.dx();
    for (int i = 0; i + 1 < g.nt; ++i) {
        for (int j = 0; j < g.nx; ++j) {
            a[j] = u(i, j);
            b[j] = u(i + 1, j);
        }
        op.apply(b, lb);
        double e = 0.0;
        for (int j = 0; j < g.nx; ++j) {
            const double v = (b[j] - a[j]) / dt;
            e += op.weight(j) * dx * 0.5 * (v * v - lb[j] * a[j]);
        }
        E.push_back(e);
    }
    return E;
}

// Energy density ½(u_t² + u_x²) (times the radial weight) summed outside and
// inside {|x| <= radius + |t - t0|}; returns the largest outside fraction
// over the time rows.
inline double finite_speed_leakage(const ScalarField& u, double initial_support_radius, double t0 = 0.0) {
    const auto& g = u.grid;
    const ScalarField ut = d_t(u), ux = d_x(u);
    const ScalarField w = cell_volumes(g);
    double total = 0.0;
    std::vector<double> inside(g.nt, 0.0), outside(g.nt, 0.0);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const double e = 0.5 * w(i, j) * (ut(i, j) * ut(i, j) + ux(i, j) * ux(i, j));
            if (g.r(j) <= initial_support_radius + std::abs(g.t(i) - t0))
                inside[i] += e;
            else
                outside[i] += e;
        }
    double worst = 0.0;
    for (int i = 0; i < g.nt; ++i) {
        total = inside[i] + outside[i];
        if (total > 0.0) worst = std::max(worst, outside[i] / total);
    }
    return worst;
}

struct EnsembleSpec {
    enum class Recipe { PlaneWave, GaussianBeam, RandomBandLimited, VanishingOnBall };
    Recipe recipe = Recipe::PlaneWave;
    int members = 10;
    std::uint64_t seed = 12345;
    GridSpec grid;
    double q_amplitude = 0.0;   // ‖q‖∞ of a smooth spatial potential
    double support_radius = 0.0;  // VanishingOnBall: data vanish on |x| <= support_radius
    double cfl = 0.9;

    static Recipe parse(const std::string& s) {
        if (s == "plane-wave") return Recipe::PlaneWave;
        if (s == "gaussian-beam") return Recipe::GaussianBeam;
        if (s == "random-band-limited") return Recipe::RandomBandLimited;
        if (s == "vanishing-on-ball") return Recipe::VanishingOnBall;
        throw ConfigError("unknown ensemble recipe '" + s + "'");
    }
    static std::string name(Recipe r) {
        switch (r) {
        case Recipe::PlaneWave: return "plane-wave";
        case Recipe::GaussianBeam: return "gaussian-beam";
        case Recipe::RandomBandLimited: return "random-band-limited";
        case Recipe::VanishingOnBall: return "vanishing-on-ball";
        }
        return "?";
    }
};

struct Member {
    ScalarField u, f;
    std::string recipe;
};

// Bounding grid of the diamond for radius R: t ∈ [-R/2, R/2], x ∈ [-3R, 3R].
inline GridSpec diamond_grid(const GeometryConfig& cfg, int nt = 129, int nx = 385) {
    GridSpec g;
    g.t_min = -0.5 * cfg.R();
    g.t_max = 0.5 * cfg.R();
    g.x_min = -3.0 * cfg.R();
    g.x_max = 3.0 * cfg.R();
    g.nt = nt;
    g.nx = nx;
    return g;
}

inline std::vector<double> potential_profile(const GridSpec& g, double amplitude) {
    if (amplitude == 0.0) return {};
    std::vector<double> q(g.nx);
    const double L = 0.5 * (g.x_max - g.x_min), c = 0.5 * (g.x_max + g.x_min);
    for (int j = 0; j < g.nx; ++j) {
        const double s = (g.x(j) - c) / L;
        q[j] = amplitude * std::exp(-4.0 * s * s) * std::cos(3.0 * s);
    }
    return q;
}

namespace detail {

// smooth compactly supported bump exp(1 - 1/(1 - s²)) on |s| < 1
inline double compact_bump(double s) {
    return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
}

} // namespace detail

inline std::vector<Member> manufacture_solutions(const EnsembleSpec& spec) {
    if (spec.members < 0) throw ConfigError("ensemble size must be non-negative");
    const auto& g = spec.grid;
    g.validate(5);
    const std::vector<double> q = potential_profile(g, spec.q_amplitude);
    ScalarField qfield(g);
    if (!q.empty())
        for (int i = 0; i < g.nt; ++i)
            for (int j = 0; j < g.nx; ++j) qfield(i, j) = q[j];
    std::vector<Member> out(spec.members);
    const double xspan = g.x_max - g.x_min;
    for (int m = 0; m < spec.members; ++m) {
        std::mt19937_64 rng(spec.seed + 0x9E3779B97F4A7C15ULL * std::uint64_t(m + 1));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        Member mem;
        mem.recipe = EnsembleSpec::name(spec.recipe);
        if (spec.recipe == EnsembleSpec::Recipe::PlaneWave && q.empty()) {
            const double k = 1.0 + 3.0 * U(rng), ph = 6.283185307179586 * U(rng);
            const double dir = U(rng) < 0.5 ? -1.0 : 1.0, amp = 0.5 + U(rng);
            mem.u = ScalarField::sample(g, [&](double t, double x) { return amp * std::sin(k * (x - dir * t) + ph); });
        } else {
            CauchyProblem p;
            p.grid = g;
            p.q = q;
            p.cfl = spec.cfl;
            p.u0.assign(g.nx, 0.0);
            p.u1.assign(g.nx, 0.0);
            switch (spec.recipe) {
            case EnsembleSpec::Recipe::PlaneWave: {
                // exact plane-wave data; the walls are too far to reach the diamond
                const double k = 1.0 + 3.0 * U(rng), ph = 6.283185307179586 * U(rng);
                const double dir = U(rng) < 0.5 ? -1.0 : 1.0, amp = 0.5 + U(rng);
                for (int j = 0; j < g.nx; ++j) {
                    p.u0[j] = amp * std::sin(k * (g.x(j) - dir * g.t_min) + ph);
                    p.u1[j] = -dir * k * amp * std::cos(k * (g.x(j) - dir * g.t_min) + ph);
                }
                p.i0 = 0;
                break;
            }
            case EnsembleSpec::Recipe::GaussianBeam: {
                // packet aimed at the centre of the diamond
                const double side = U(rng) < 0.5 ? -1.0 : 1.0;
                const double xc = side * (0.5 + 0.8 * U(rng)), w = 0.15 + 0.2 * U(rng);
                const double k = 2.0 + 6.0 * U(rng), amp = 0.5 + U(rng);
                for (int j = 0; j < g.nx; ++j) {
                    const double s = (g.x(j) - xc) / w;
                    const double env = amp * std::exp(-s * s), denv = -2.0 * s / w * env;
                    p.u0[j] = env * std::cos(k * (g.x(j) - xc));
                    const double du = denv * std::cos(k * (g.x(j) - xc)) - env * k * std::sin(k * (g.x(j) - xc));
                    p.u1[j] = side * du;  // moves toward x = 0
                }
                p.i0 = 0;
                break;
            }
            case EnsembleSpec::Recipe::RandomBandLimited: {
                const double c = g.x_min + xspan * (0.35 + 0.3 * U(rng)), half = 0.25 * xspan;
                for (int mode = 1; mode <= 6; ++mode) {
                    const double a = (U(rng) - 0.5) / mode, b = (U(rng) - 0.5) / mode;
                    for (int j = 0; j < g.nx; ++j) {
                        const double env = detail::compact_bump((g.x(j) - c) / half);
                        const double arg = mode * 3.141592653589793 * (g.x(j) - c) / half;
                        p.u0[j] += env * a * std::sin(arg);
                        p.u1[j] += env * b * std::cos(arg);
                    }
                }
                p.i0 = g.nt / 2;
                break;
            }
            case EnsembleSpec::Recipe::VanishingOnBall: {
                const double rho = spec.support_radius;
                const double room = std::min(-g.x_min, g.x_max) - rho;
                if (room <= 0.0) throw ConfigError("vanishing-on-ball: support radius leaves no room on the grid");
                const double w = 0.35 * room * (0.5 + 0.5 * U(rng));
                const double amp_l = 0.5 + U(rng), amp_r = 0.5 + U(rng), k = 1.0 + 4.0 * U(rng);
                for (int j = 0; j < g.nx; ++j) {
                    const double x = g.x(j);
                    const double cl = -(rho + w), cr = rho + w;
                    const double bl = detail::compact_bump((x - cl) / w), br = detail::compact_bump((x - cr) / w);
                    p.u0[j] = amp_l * bl * std::cos(k * x) + amp_r * br;
                    p.u1[j] = amp_r * br * std::sin(k * x);
                }
                p.i0 = g.nt / 2;
                break;
            }
            }
            mem.u = solve(p);
        }
        mem.f = apply_box(mem.u, q.empty() ? nullptr : &qfield);
        out[m] = std::move(mem);
    }
    return out;
}

} // namespace carleman_lab
