#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid_ops.hpp"
#include "multipliers.hpp"

namespace carleman_lab {

// Weight ℓ = τ(φ - γ·[psi] - shift); a = 3τ/2 (+ sigma_offset, which moves σ
// and a together so that a = σ - Δℓ still holds).
struct CarlemanParams {
    double tau = 1.0;
    double epsilon = 0.0;
    double gamma = 1.0;
    bool use_psi = false;
    double shift = 0.0;
    double sigma_offset = 0.0;

    double a_choice() const { return 1.5 * tau + sigma_offset; }
};

// Closed forms of the weight quantities at one node. The Lorentzian metric is
// diag(-1, 1) in (t, x); in cartesian mode r = |x| and sgn carries the sign of x.
struct WeightPoint {
    double ell, ell_t, ell_x;     // partial derivatives
    double lap_ell;               // Δ_g ℓ = τ(n + 1 - (n-1) r1/r)
    double G_grad_ell;            // g(∇ℓ, ∇ℓ) = 2τ²φ
    double q;                     // G(∇ℓ) - Δℓ
    double sigma, sigma_x, lap_sigma;
    double hess_grad_ell;         // D²ℓ(∇ℓ, ∇ℓ)
};

inline WeightPoint weight_point(double t, double x, const CarlemanParams& p, const GeometryConfig& cfg,
                                int n) {
    const double r = std::abs(x), sgn = x < 0 ? -1.0 : 1.0, r1 = cfg.r1(), tau = p.tau;
    const double phi = foliation_phi(t, r, cfg);
    WeightPoint w;
    w.ell = tau * (phi - (p.use_psi ? p.gamma : 0.0) - p.shift);
    w.ell_t = -tau * t;
    w.ell_x = sgn * tau * (r - r1);
    w.lap_ell = n == 1 ? 2.0 * tau : tau * (n + 1 - (n - 1) * r1 / r);
    w.G_grad_ell = 2.0 * tau * tau * phi;
    w.q = w.G_grad_ell - w.lap_ell;
    w.sigma = p.a_choice() + w.lap_ell;
    w.sigma_x = n == 1 ? 0.0 : sgn * tau * (n - 1) * r1 / (r * r);
    w.lap_sigma = n == 1 ? 0.0 : tau * (n - 1) * (n - 3) * r1 / (r * r * r);
    // D²ℓ = τ g on radial vectors
    w.hess_grad_ell = tau * w.G_grad_ell;
    return w;
}

namespace detail {

inline int dim_of(const GridSpec& g) { return g.radial() ? g.n : 1; }

inline void require_interior_support(const ScalarField& v, int cells = 3) {
    const auto& g = v.grid;
    double peak = 0.0;
    for (double a : v.v) peak = std::max(peak, std::abs(a));
    if (peak == 0.0) return;
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            if ((i < cells || j < cells || i >= g.nt - cells || j >= g.nx - cells) && v(i, j) != 0.0)
                throw SupportViolation("field is nonzero within " + std::to_string(cells) +
                                       " cells of the grid boundary");
}

} // namespace detail

// Q₊(X) = (a + 2τ)(-|X^t|² + |X^x|²) for radial X
inline ScalarField q_plus(const VectorField<double>& X, const CarlemanParams& p) {
    ScalarField out(X.t.grid);
    const double c = p.a_choice() + 2.0 * p.tau;
    for (std::size_t k = 0; k < out.size(); ++k)
        out.v[k] = c * (-X.t.v[k] * X.t.v[k] + X.x.v[k] * X.x.v[k]);
    return out;
}

struct QMinusAssemblies {
    ScalarField phi_tau3;       // φτ³
    ScalarField assembled;      // -a G(∇ℓ) + 2 D²ℓ(∇ℓ, ∇ℓ) from components
    ScalarField scale;          // τ³(t² + (r - r1)²)/2, magnitude of the summands
};

inline QMinusAssemblies q_minus_on_grad_ell(const GridSpec& g, const CarlemanParams& p,
                                            const GeometryConfig& cfg) {
    QMinusAssemblies out{ScalarField(g), ScalarField(g), ScalarField(g)};
    const double tau = p.tau, a = 1.5 * tau;
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const double t = g.t(i), r = g.r(j);
            out.phi_tau3(i, j) = foliation_phi(t, r, cfg) * tau * tau * tau;
            auto [gt, gr] = grad_phi(t, r, cfg);
            const double Lt = tau * gt, Lr = tau * gr;    // ∇ℓ components
            const double G = -Lt * Lt + Lr * Lr;
            const double H = -tau * Lt * Lt + tau * Lr * Lr;  // Hessian τ·diag(-1, 1)
            out.assembled(i, j) = -a * G + 2.0 * H;
            out.scale(i, j) = 0.5 * tau * tau * tau * (gt * gt + gr * gr);
        }
    return out;
}

struct IdentityBreakdown {
    ScalarField lhs, q_plus_term, q_minus_term, div_B_term, R_term, square1, square2;
    double residual_pointwise = 0.0;
    double residual_integrated = 0.0;
    double lhs_integral = 0.0;
    double relative_residual() const {
        return lhs_integral == 0.0 ? 0.0 : residual_integrated / std::abs(lhs_integral);
    }
};

// Every term of the pointwise Carleman identity
//   |e^ℓ Δ_g(e^{-ℓ}v)|²/2 = Q₊(∇v) + Q₋ v² + div B + R + |(Δ+q+σ)v|²/2 + |(L+σ)v|²/2
// by central differences.
inline IdentityBreakdown identity_residual(const ScalarField& v, const CarlemanParams& p,
                                           const GeometryConfig& cfg) {
    const auto& g = v.grid;
    detail::require_stencil(g);
    detail::require_interior_support(v);
    const int n = detail::dim_of(g);
    const double a = p.a_choice(), tau = p.tau;

    std::vector<WeightPoint> W(g.size());
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) W[std::size_t(i) * g.nx + j] = weight_point(g.t(i), g.x(j), p, cfg, n);

    // LHS through the conjugation e^ℓ Δ_g e^{-ℓ}, with the shift keeping e^{-ℓ} bounded
    ScalarField em(g);
    for (std::size_t k = 0; k < g.size(); ++k) em.v[k] = std::exp(-W[k].ell) * v.v[k];
    const ScalarField lap_em = lorentz_laplacian(em);
    const ScalarField vt = d_t(v), vx = d_x(v), lap_v = lorentz_laplacian(v);

    IdentityBreakdown b;
    for (auto* f : {&b.lhs, &b.q_plus_term, &b.q_minus_term, &b.div_B_term, &b.R_term, &b.square1, &b.square2})
        *f = ScalarField(g);
    ScalarField Bt(g), Bx(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto& w = W[k];
        const double pv = std::exp(w.ell) * lap_em.v[k];
        b.lhs.v[k] = 0.5 * pv * pv;
        const double Lv = 2.0 * (-w.ell_t * vt.v[k] + w.ell_x * vx.v[k]);
        const double Av = lap_v.v[k] + (w.q + w.sigma) * v.v[k];
        const double Sv = Lv + w.sigma * v.v[k];
        b.square1.v[k] = 0.5 * Av * Av;
        b.square2.v[k] = 0.5 * Sv * Sv;
        b.q_plus_term.v[k] = (a + 2.0 * tau) * (-vt.v[k] * vt.v[k] + vx.v[k] * vx.v[k]);
        b.q_minus_term.v[k] = (-a * w.G_grad_ell + 2.0 * w.hess_grad_ell) * v.v[k] * v.v[k];
        b.R_term.v[k] = (a * w.lap_ell - a * w.sigma - 0.5 * w.lap_sigma) * v.v[k] * v.v[k];
        // B with upper-index components: (∇v)^t = -v_t, (∇ℓ)^t = -ℓ_t
        const double Gv = -vt.v[k] * vt.v[k] + vx.v[k] * vx.v[k];
        const double coef = Gv - (w.q + w.sigma) * v.v[k] * v.v[k];
        Bt.v[k] = -Sv * (-vt.v[k]) + coef * (-w.ell_t);
        Bx.v[k] = -Sv * vx.v[k] + coef * w.ell_x + 0.5 * v.v[k] * v.v[k] * w.sigma_x;
    }
    const ScalarField dBt = d_t(Bt), dBx = d_x(Bx);
    double sup = 0.0;
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const std::size_t k = std::size_t(i) * g.nx + j;
            double div = dBt.v[k] + dBx.v[k];
            if (g.radial() && n > 1) div += (n - 1) / g.x(j) * Bx.v[k];
            b.div_B_term.v[k] = div;
            const double rhs = b.q_plus_term.v[k] + b.q_minus_term.v[k] + div + b.R_term.v[k] +
                               b.square1.v[k] + b.square2.v[k];
            sup = std::max(sup, std::abs(b.lhs.v[k] - rhs));
        }
    b.residual_pointwise = sup;
    ScalarField bulk(g);
    for (std::size_t k = 0; k < g.size(); ++k)
        bulk.v[k] = b.q_plus_term.v[k] + b.q_minus_term.v[k] + b.R_term.v[k] + b.square1.v[k] +
                    b.square2.v[k];
    b.lhs_integral = integrate(b.lhs);
    b.residual_integrated = std::abs(b.lhs_integral - integrate(bulk));
    return b;
}

// □_ℓ v = (Δ_g - L + q)v assembled from the expansion
inline ScalarField conjugated_box(const ScalarField& v, const CarlemanParams& p, const GeometryConfig& cfg) {
    const auto& g = v.grid;
    const int n = detail::dim_of(g);
    const ScalarField vt = d_t(v), vx = d_x(v);
    ScalarField out = lorentz_laplacian(v);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const auto w = weight_point(g.t(i), g.x(j), p, cfg, n);
            out(i, j) += -2.0 * (-w.ell_t * vt(i, j) + w.ell_x * vx(i, j)) + w.q * v(i, j);
        }
    return out;
}

// □_{ℓ,ε} = □_ℓ - 2A₁ + A₂ + A₃ + A₄ with A₁ = ε∂_t², A₂ = -2ετ t∂_t,
// A₃ = -ε²∂_t², A₄ = -ετ
inline ScalarField conjugated_wave_apply(const ScalarField& v, const CarlemanParams& p,
                                         const GeometryConfig& cfg) {
    detail::require_stencil(v.grid);
    detail::require_interior_support(v);
    const auto& g = v.grid;
    const double eps = p.epsilon, tau = p.tau;
    ScalarField out = conjugated_box(v, p, cfg);
    if (eps == 0.0) return out;
    const ScalarField vtt = d_tt(v), vt = d_t(v);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            out(i, j) += -2.0 * eps * vtt(i, j) - 2.0 * eps * tau * g.t(i) * vt(i, j) -
                         eps * eps * vtt(i, j) - eps * tau * v(i, j);
    return out;
}

// e^ℓ Δ_g(e^{-ℓ}v) computed directly, for cross-checks
inline ScalarField conjugated_box_direct(const ScalarField& v, const CarlemanParams& p,
                                         const GeometryConfig& cfg) {
    const auto& g = v.grid;
    const int n = detail::dim_of(g);
    ScalarField em(g), el(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            el(i, j) = weight_point(g.t(i), g.x(j), p, cfg, n).ell;
            em(i, j) = std::exp(-el(i, j)) * v(i, j);
        }
    ScalarField out = apply_box(em);
    for (std::size_t k = 0; k < out.size(); ++k) out.v[k] *= -std::exp(el.v[k]);
    return out;
}

struct WitnessReport {
    double gamma = 0.0, epsilon = 0.0;
    std::vector<double> tau_values, lhs, rhs, witnessed;
    std::vector<double> rhs_main, rhs_aux;
    std::vector<bool> admissible;
    double witnessed_constant = 0.0;
    std::vector<double> refinement_ratios;
    bool pass = true;
    // subelliptic: constant solving LHS = C(RHS1 + C·RHS2)
    std::vector<double> two_constant;
    double two_constant_sup = 0.0;
    // carleman: largest exponent certified by the sweep for the configured C
    double a_hat = std::numeric_limits<double>::infinity();
    double C_used = 0.0;
};

struct SubellipticOptions {
    double eps0 = 0.05;
    double tau_floor_multiplier = 1.0;
    double leak_tol = 1e-10;
};

// LHS = γτ³∫v² + τ∫|∇v|², RHS = ∫|□_{ℓ,ε}v|² + τ∫|∂_t v|² for ℓ = τφ
inline WitnessReport subelliptic_check(const ScalarField& v, double gamma,
                                       const std::vector<double>& tau_sweep, double epsilon,
                                       const GeometryConfig& cfg, const SubellipticOptions& opt = {}) {
    if (tau_sweep.empty()) throw ConfigError("subelliptic_check needs a non-empty tau sweep");
    if (epsilon > gamma * opt.eps0 * (1 + 1e-12))
        throw PreconditionViolated("epsilon exceeds gamma·eps0");
    for (double tau : tau_sweep)
        if (tau < opt.tau_floor_multiplier / gamma)
            throw PreconditionViolated("tau below the floor C/gamma");
    const auto& g = v.grid;
    detail::require_interior_support(v);
    double total = 0.0, leak = 0.0;
    const ScalarField w = cell_volumes(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const double e = w(i, j) * v(i, j) * v(i, j);
            total += e;
            if (foliation_phi(g.t(i), g.r(j), cfg) < gamma || g.r(j) < cfg.r0_inner()) leak += e;
        }
    if (leak > opt.leak_tol * total)
        throw SupportViolation("v leaks outside {r >= r0_inner} ∩ {phi >= gamma}");

    WitnessReport rep;
    rep.gamma = gamma;
    rep.epsilon = epsilon;
    rep.tau_values = tau_sweep;
    const ScalarField vt = d_t(v), vx = d_x(v);
    double v2 = 0, g2 = 0, t2 = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        v2 += w.v[k] * v.v[k] * v.v[k];
        g2 += w.v[k] * (vt.v[k] * vt.v[k] + vx.v[k] * vx.v[k]);
        t2 += w.v[k] * vt.v[k] * vt.v[k];
    }
    for (double tau : tau_sweep) {
        CarlemanParams p;
        p.tau = tau;
        p.epsilon = epsilon;
        p.gamma = gamma;
        const ScalarField bv = conjugated_wave_apply(v, p, cfg);
        double b2 = 0;
        for (std::size_t k = 0; k < g.size(); ++k) b2 += w.v[k] * bv.v[k] * bv.v[k];
        const double lhs = gamma * tau * tau * tau * v2 + tau * g2;
        const double r1 = b2, r2 = tau * t2;
        rep.lhs.push_back(lhs);
        rep.rhs_main.push_back(r1);
        rep.rhs_aux.push_back(r2);
        rep.rhs.push_back(r1 + r2);
        rep.admissible.push_back(true);
        const double c = (r1 + r2) > 0 ? lhs / (r1 + r2) : 0.0;
        rep.witnessed.push_back(c);
        double c2 = 0.0;
        if (r2 > 0)
            c2 = (-r1 + std::sqrt(r1 * r1 + 4.0 * r2 * lhs)) / (2.0 * r2);
        else if (r1 > 0)
            c2 = lhs / r1;
        rep.two_constant.push_back(c2);
    }
    rep.witnessed_constant = *std::max_element(rep.witnessed.begin(), rep.witnessed.end());
    rep.two_constant_sup = *std::max_element(rep.two_constant.begin(), rep.two_constant.end());
    rep.pass = std::isfinite(rep.witnessed_constant);
    return rep;
}

struct CarlemanCheckOptions {
    double eps0 = 0.05;                 // ε = γ·eps0
    double C = 1.0;                     // constant of the estimate, C/γ multiplies the RHS
    double tau_floor_multiplier = 1.0;  // admissible when τ ≥ multiplier/γ⁸
    const ScalarField* q = nullptr;     // optional potential
    MultiplierOptions mopt;
};

// Both sides of the global estimate with the shifted weight e^{τ(φ - max_supp φ)}.
// witnessed(τ) = γ·LHS/main is the constant needed without the remainder;
// a_hat is the largest 𝔞 for which the configured C makes the inequality hold
// at every τ of the sweep (infinite when the main term alone suffices).
inline WitnessReport carleman_estimate_check(const ScalarField& u, double gamma,
                                             const std::vector<double>& tau_sweep,
                                             const GeometryConfig& cfg,
                                             const CarlemanCheckOptions& opt = {}) {
    if (tau_sweep.empty()) throw ConfigError("carleman_estimate_check needs a non-empty tau sweep");
    const auto& g = u.grid;
    WitnessReport rep;
    rep.gamma = gamma;
    rep.epsilon = gamma * opt.eps0;
    rep.tau_values = tau_sweep;
    rep.C_used = opt.C;

    double smax = -std::numeric_limits<double>::infinity(), smin = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            if (u(i, j) != 0.0) {
                const double ph = foliation_phi(g.t(i), g.r(j), cfg);
                smax = std::max(smax, ph);
                smin = std::min(smin, ph);
                any = true;
            }
    if (!any) {
        for (double tau : tau_sweep) {
            rep.lhs.push_back(0);
            rep.rhs.push_back(0);
            rep.rhs_main.push_back(0);
            rep.rhs_aux.push_back(0);
            rep.witnessed.push_back(0);
            rep.admissible.push_back(tau >= opt.tau_floor_multiplier / std::pow(gamma, 8));
        }
        return rep;
    }
    const ScalarField box = apply_box(u, opt.q);
    const ScalarField mask = region_mask(g, Region::phi_superlevel(0.5 * gamma), cfg);
    const ScalarField vol = cell_volumes(g);

    for (double tau : tau_sweep) {
        if (tau * (smax - smin) > 700.0)
            throw NumericalOverflow("weight range e^{tau·(max-min) phi} exceeds double range at tau = " +
                                    std::to_string(tau));
        ScalarField eu(g), ebox(g);
        for (int i = 0; i < g.nt; ++i)
            for (int j = 0; j < g.nx; ++j) {
                const double e = std::exp(tau * (foliation_phi(g.t(i), g.r(j), cfg) - smax));
                eu(i, j) = e * u(i, j);
                ebox(i, j) = box(i, j) != 0.0 ? e * box(i, j) : 0.0;
            }
        if (!eu.all_finite() || !ebox.all_finite())
            throw NumericalOverflow("weighted field is not finite at tau = " + std::to_string(tau));
        const auto W = MultiplierSpec::gaussian_weight(rep.epsilon, tau);
        const ScalarField v = apply(W, eu, opt.mopt);
        const ScalarField wb = apply(W, ebox, opt.mopt);
        const ScalarField vt = d_t(v), vx = d_x(v);
        double v2 = 0, g2 = 0, main = 0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            v2 += vol.v[k] * v.v[k] * v.v[k];
            g2 += vol.v[k] * (vt.v[k] * vt.v[k] + vx.v[k] * vx.v[k]);
            main += mask.v[k] * vol.v[k] * wb.v[k] * wb.v[k];
        }
        const double rem = norm_sq(eu, ScalarField(g, 1.0), NormKind::H1);
        const double lhs = tau * tau * tau * v2 + tau * g2;
        rep.lhs.push_back(lhs);
        rep.rhs_main.push_back(main);
        rep.rhs_aux.push_back(rem);
        rep.rhs.push_back(main + rem);
        rep.witnessed.push_back(main > 0 ? gamma * lhs / main : std::numeric_limits<double>::infinity());
        rep.admissible.push_back(tau >= opt.tau_floor_multiplier / std::pow(gamma, 8));
        const double deficit = gamma * lhs / opt.C - main;
        double ak = std::numeric_limits<double>::infinity();
        if (deficit > 0) ak = rem > 0 ? -std::log(deficit / rem) / (gamma * gamma * tau) : -ak;
        rep.a_hat = std::min(rep.a_hat, ak);
    }
    rep.witnessed_constant = *std::max_element(rep.witnessed.begin(), rep.witnessed.end());
    rep.pass = rep.a_hat > 0.0;
    return rep;
}

} // namespace carleman_lab
