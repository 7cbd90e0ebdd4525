#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"
#include "grid.hpp"

namespace carleman_lab {

struct GeometryConfig {
    double r0 = 2.0;
    double r_tilde = 1.0;  // the radius R of the diamond and cylinder
    int n = 1;
    Coord mode = Coord::Cartesian;

    double r1() const { return 1.5 * r_tilde; }
    double r0_inner() const { return r_tilde * 13.0 / 14.0; }
    double R() const { return r_tilde; }

    void validate() const {
        if (!(r0 > 1.0)) throw ConfigError("geometry.r0 must exceed 1");
        if (!(r_tilde >= 1.0 / r0 && r_tilde <= r0))
            throw ConfigError("geometry.r_tilde must lie in [1/r0, r0]");
        if (n < 1) throw ConfigError("geometry.n must be >= 1");
        if (mode == Coord::Cartesian && n != 1)
            throw ConfigError("cartesian-1d mode requires n = 1");
    }
};

inline double foliation_phi(double t, double r, const GeometryConfig& cfg) {
    const double d = r - cfg.r1();
    return 0.5 * (-t * t + d * d);
}

// metric gradient (∇φ)^t = -∂_tφ, (∇φ)^r = ∂_rφ for g = diag(-1, 1)
inline std::pair<double, double> grad_phi(double t, double r, const GeometryConfig& cfg) {
    return {t, r - cfg.r1()};
}

inline double minkowski_form(double ct, double cr) { return -ct * ct + cr * cr; }

// surface area of the unit sphere in R^n (2 for n = 1)
inline double sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

struct Region {
    enum class Kind { Diamond, Cylinder, PhiSuperlevel, DiamondDelta, OmegaDelta, AnnulusShell };
    Kind kind = Kind::Diamond;
    double a = 0.0, b = 0.0;

    static Region diamond() { return {Kind::Diamond}; }
    static Region cylinder() { return {Kind::Cylinder}; }
    static Region phi_superlevel(double gamma) { return {Kind::PhiSuperlevel, gamma}; }
    static Region diamond_delta(double delta) { return {Kind::DiamondDelta, delta}; }
    static Region omega_delta(double delta) { return {Kind::OmegaDelta, delta}; }
    static Region annulus(double r_lo, double r_hi) { return {Kind::AnnulusShell, r_lo, r_hi}; }

    std::string name() const {
        switch (kind) {
        case Kind::Diamond: return "diamond";
        case Kind::Cylinder: return "cylinder";
        case Kind::PhiSuperlevel: return "phi-superlevel";
        case Kind::DiamondDelta: return "diamond-delta";
        case Kind::OmegaDelta: return "omega-delta";
        case Kind::AnnulusShell: return "annulus";
        }
        return "?";
    }

    static Region parse(const std::string& kind, double p1 = 0.0, double p2 = 0.0) {
        if (kind == "diamond") return diamond();
        if (kind == "cylinder") return cylinder();
        if (kind == "phi-superlevel") return phi_superlevel(p1);
        if (kind == "diamond-delta") return diamond_delta(p1);
        if (kind == "omega-delta") return omega_delta(p1);
        if (kind == "annulus") return annulus(p1, p2);
        throw ConfigError("unknown region kind '" + kind + "'");
    }

    bool contains(double t, double r, const GeometryConfig& cfg) const {
        const double R = cfg.R();
        switch (kind) {
        case Kind::Diamond: return std::abs(t) < 1.5 * R - r && std::abs(t) < 0.5 * R;
        case Kind::Cylinder: return r < R && std::abs(t) < 0.5 * R;
        case Kind::PhiSuperlevel: return foliation_phi(t, r, cfg) > a;
        case Kind::DiamondDelta:
            return std::abs(t) < 1.5 * R - r && std::abs(t) < 0.5 * R &&
                   foliation_phi(t, r, cfg) > a * a;
        case Kind::OmegaDelta: return foliation_phi(t, r, cfg) > a;
        case Kind::AnnulusShell: return r >= a && r < b;
        }
        return false;
    }

    // The r-section of the region at time t as a union of half-open intervals.
    std::vector<std::pair<double, double>> r_section(double t, const GeometryConfig& cfg) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        const double R = cfg.R(), r1 = cfg.r1(), at = std::abs(t);
        std::vector<std::pair<double, double>> out;
        auto superlevel = [&](double level) {
            const double s2 = t * t + 2.0 * level;
            if (s2 < 0.0) {
                out.push_back({0.0, inf});
                return;
            }
            const double s = std::sqrt(s2);
            if (r1 - s > 0.0) out.push_back({0.0, r1 - s});
            out.push_back({std::max(0.0, r1 + s), inf});
        };
        switch (kind) {
        case Kind::Diamond:
            if (at < 0.5 * R && 1.5 * R - at > 0.0) out.push_back({0.0, 1.5 * R - at});
            break;
        case Kind::Cylinder:
            if (at < 0.5 * R) out.push_back({0.0, R});
            break;
        case Kind::PhiSuperlevel: superlevel(a); break;
        case Kind::OmegaDelta: superlevel(a); break;
        case Kind::DiamondDelta: {
            if (at >= 0.5 * R) break;
            const double hi = std::min(1.5 * R - at, r1 - std::sqrt(t * t + 2.0 * a * a));
            if (hi > 0.0) out.push_back({0.0, hi});
            break;
        }
        case Kind::AnnulusShell:
            if (b > a) out.push_back({a, b});
            break;
        }
        return out;
    }
};

// Fraction of 4x4 sub-samples of each node's cell (clipped to the grid) that
// fall inside the region.
inline ScalarField region_mask(const GridSpec& g, const Region& region, const GeometryConfig& cfg) {
    constexpr int S = 4;
    ScalarField m(g);
    const double dt = g.dt(), dx = g.dx();
    bool any = false;
    for (int i = 0; i < g.nt; ++i) {
        const double ta = std::max(g.t_min, g.t(i) - 0.5 * dt);
        const double tb = std::min(g.t_max, g.t(i) + 0.5 * dt);
        for (int j = 0; j < g.nx; ++j) {
            const double xa = std::max(g.x_min, g.x(j) - 0.5 * dx);
            const double xb = std::min(g.x_max, g.x(j) + 0.5 * dx);
            int inside = 0;
            for (int a = 0; a < S; ++a) {
                const double ts = ta + (a + 0.5) * (tb - ta) / S;
                for (int b = 0; b < S; ++b) {
                    const double xs = xa + (b + 0.5) * (xb - xa) / S;
                    if (region.contains(ts, std::abs(xs), cfg)) ++inside;
                }
            }
            m(i, j) = double(inside) / (S * S);
            any = any || inside > 0;
        }
    }
    if (!any) throw EmptyRegion("region " + region.name() + " does not meet the grid");
    return m;
}

// Quadrature weight of each node: clipped cell area times the radial volume
// element c_n r^{n-1} in radial mode.
inline ScalarField cell_volumes(const GridSpec& g) {
    ScalarField w(g);
    const double dt = g.dt(), dx = g.dx();
    const double cn = g.radial() ? sphere_area(g.n) : 1.0;
    for (int i = 0; i < g.nt; ++i) {
        const double wt = (i == 0 || i == g.nt - 1) ? 0.5 * dt : dt;
        for (int j = 0; j < g.nx; ++j) {
            double wx = (j == 0 || j == g.nx - 1) ? 0.5 * dx : dx;
            if (g.radial()) wx *= cn * std::pow(g.x(j), g.n - 1);
            w(i, j) = wt * wx;
        }
    }
    return w;
}

inline double mask_measure(const ScalarField& mask) {
    const ScalarField w = cell_volumes(mask.grid);
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += mask.v[k] * w.v[k];
    return s;
}

namespace detail {

// measure of {x in [xa, xb] : |x| in [lo, hi)} (cartesian) or the radial
// volume of [lo, hi) ∩ [xa, xb] (radial)
inline double section_measure(const std::vector<std::pair<double, double>>& sec,
                              const GridSpec& clip) {
    double s = 0.0;
    auto overlap = [](double a, double b, double c, double d) {
        return std::max(0.0, std::min(b, d) - std::max(a, c));
    };
    for (auto [lo, hi] : sec) {
        if (clip.radial()) {
            const double a = std::max(lo, clip.x_min), b = std::min(hi, clip.x_max);
            if (b > a)
                s += sphere_area(clip.n) * (std::pow(b, clip.n) - std::pow(a, clip.n)) / clip.n;
        } else {
            s += overlap(lo, hi, clip.x_min, clip.x_max) + overlap(-hi, -lo, clip.x_min, clip.x_max);
        }
    }
    return s;
}

template <typename F>
double integrate_t(F&& f, std::vector<double> breaks) {
    std::sort(breaks.begin(), breaks.end());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        if (breaks[k + 1] <= breaks[k]) continue;
        s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            f, breaks[k], breaks[k + 1], 20, 1e-14);
    }
    return s;
}

inline std::vector<double> time_breaks(const GridSpec& clip, const GeometryConfig& cfg) {
    std::vector<double> br{clip.t_min, clip.t_max};
    for (double b : {0.0, -0.5 * cfg.R(), 0.5 * cfg.R()})
        if (b > clip.t_min && b < clip.t_max) br.push_back(b);
    return br;
}

} // namespace detail

// Semi-analytic measure of region ∩ (grid box): exact r-sections integrated in t
// by adaptive Gauss-Kronrod.
inline double region_measure(const Region& region, const GeometryConfig& cfg, const GridSpec& clip) {
    auto f = [&](double t) { return detail::section_measure(region.r_section(t, cfg), clip); };
    return detail::integrate_t(f, detail::time_breaks(clip, cfg));
}

// |Diamond \ DiamondDelta(δ)| computed directly from the section difference
// r ∈ [r1 - sqrt(t² + 2δ²), r1 - |t|), which avoids cancellation for small δ.
inline double strip_measure(double delta, const GeometryConfig& cfg, const GridSpec& clip) {
    const double R = cfg.R(), r1 = cfg.r1();
    auto f = [&](double t) {
        if (std::abs(t) >= 0.5 * R) return 0.0;
        const double hi = 1.5 * R - std::abs(t);
        const double lo = std::max(0.0, r1 - std::sqrt(t * t + 2.0 * delta * delta));
        if (hi <= lo) return 0.0;
        return detail::section_measure({{lo, hi}}, clip);
    };
    return detail::integrate_t(f, detail::time_breaks(clip, cfg));
}

// C-infinity transition built from the bump exp(-1/s - 1/(1-s)) on (0, 1),
// integrated and normalized. Tabulated once; evaluated by cubic Hermite
// interpolation with the exact derivative.
class Smoothstep {
public:
    static const Smoothstep& instance() {
        static const Smoothstep s;
        return s;
    }

    static double bump(double s) {
        if (s <= 0.0 || s >= 1.0) return 0.0;
        return std::exp(-1.0 / s - 1.0 / (1.0 - s));
    }

    double value(double s) const {
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return 1.0;
        const double u = s * kN;
        const int k = std::min(kN - 1, int(u));
        const double h = 1.0 / kN, w = u - k;
        const double p0 = table_[k], p1 = table_[k + 1];
        const double m0 = bump(k * h) / norm_ * h, m1 = bump((k + 1) * h) / norm_ * h;
        const double w2 = w * w, w3 = w2 * w;
        return (2 * w3 - 3 * w2 + 1) * p0 + (w3 - 2 * w2 + w) * m0 + (-2 * w3 + 3 * w2) * p1 +
               (w3 - w2) * m1;
    }

    double derivative(double s) const { return bump(s) / norm_; }

    // sup of the derivative on (0, 1)
    double slope_constant() const { return bump(0.5) / norm_; }
    double normalization() const { return norm_; }

private:
    static constexpr int kN = 4096;

    Smoothstep() : table_(kN + 1, 0.0) {
        const double h = 1.0 / kN;
        double acc = 0.0;
        for (int k = 0; k < kN; ++k) {
            acc += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                bump, k * h, (k + 1) * h, 0, 0.0);
            table_[k + 1] = acc;
        }
        norm_ = acc;
        for (auto& x : table_) x /= norm_;
        table_[kN] = 1.0;
    }

    std::vector<double> table_;
    double norm_ = 1.0;
};

// Support (lo, hi), plateau [plateau_lo, plateau_hi]. Infinite ends give
// one-sided cutoffs.
struct CutoffSpec {
    double lo = -1.0, plateau_lo = -0.5, plateau_hi = 0.5, hi = 1.0;
};

class SmoothCutoff {
public:
    explicit SmoothCutoff(const CutoffSpec& s) : s_(s) {
        if (!(s.plateau_lo <= s.plateau_hi))
            throw PreconditionViolated("cutoff plateau is empty");
        if (!(s.lo <= s.plateau_lo && s.plateau_hi <= s.hi))
            throw PreconditionViolated("cutoff plateau must lie inside its support");
        if ((std::isfinite(s.lo) && !(s.plateau_lo > s.lo)) ||
            (std::isfinite(s.hi) && !(s.hi > s.plateau_hi)))
            throw DegenerateBand("cutoff transition band has zero width");
    }

    const CutoffSpec& spec() const { return s_; }

    double operator()(double x) const {
        const auto& st = Smoothstep::instance();
        if (x <= s_.lo || x >= s_.hi) return 0.0;
        if (x < s_.plateau_lo) return st.value((x - s_.lo) / (s_.plateau_lo - s_.lo));
        if (x > s_.plateau_hi) return st.value((s_.hi - x) / (s_.hi - s_.plateau_hi));
        return 1.0;
    }

    double derivative(double x) const {
        const auto& st = Smoothstep::instance();
        if (x <= s_.lo || x >= s_.hi) return 0.0;
        if (x < s_.plateau_lo) {
            const double w = s_.plateau_lo - s_.lo;
            return st.derivative((x - s_.lo) / w) / w;
        }
        if (x > s_.plateau_hi) {
            const double w = s_.hi - s_.plateau_hi;
            return -st.derivative((s_.hi - x) / w) / w;
        }
        return 0.0;
    }

    // sample the cutoff applied to a scalar function g(t, r) on a grid
    template <typename G>
    ScalarField field(const GridSpec& grid, G&& g) const {
        ScalarField out(grid);
        for (int i = 0; i < grid.nt; ++i)
            for (int j = 0; j < grid.nx; ++j) out(i, j) = (*this)(g(grid.t(i), grid.r(j)));
        return out;
    }

private:
    CutoffSpec s_;
};

inline SmoothCutoff smooth_cutoff(const CutoffSpec& s) { return SmoothCutoff(s); }

inline ScalarField phi_field(const GridSpec& g, const GeometryConfig& cfg) {
    ScalarField out(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) out(i, j) = foliation_phi(g.t(i), g.r(j), cfg);
    return out;
}

} // namespace carleman_lab
