#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "constant_ledger.hpp"
#include "errors.hpp"
#include "fitting.hpp"
#include "geometry.hpp"
#include "grid_ops.hpp"
#include "multipliers.hpp"
#include "wave_solver.hpp"

namespace carleman_lab {

// level-sq: D_δ = D ∩ {φ > δ²}; level-lin: D ∩ {φ > δ}
enum class LevelParam { Sq, Lin };

inline std::string to_string(LevelParam l) { return l == LevelParam::Sq ? "level-sq" : "level-lin"; }

inline LevelParam parse_level(const std::string& s) {
    if (s == "level-sq") return LevelParam::Sq;
    if (s == "level-lin") return LevelParam::Lin;
    throw ConfigError("unknown level parameterization '" + s + "'");
}

inline Region diamond_level(double delta, LevelParam level) {
    return Region::diamond_delta(level == LevelParam::Sq ? delta : std::sqrt(delta));
}

struct StabilityReport {
    double delta = 0;
    double lhs = 0, obs = 0, total = 0, source = 0;
    double ratio = 0;
    double budget = 0;       // log 𝔅(δ)
    bool degenerate = false; // obs = 0 while lhs > 0
    bool pass = true;
    std::string level;
};

namespace detail {

struct StabilityNorms {
    double obs = 0, total = 0, source = 0;
};

inline StabilityNorms stability_norms(const ScalarField& u, const ScalarField& f, const GeometryConfig& cfg) {
    if (!u.grid.same_as(f.grid)) throw ConfigError("u and f live on different grids");
    StabilityNorms s;
    s.total = norm(u, Region::diamond(), cfg, NormKind::H1);
    s.source = norm(f, Region::diamond(), cfg, NormKind::L2);
    s.obs = norm(u, Region::cylinder(), cfg, NormKind::H1) + s.source;
    return s;
}

inline StabilityReport assemble(double delta, double lhs, const StabilityNorms& s, double budget) {
    StabilityReport r;
    r.delta = delta;
    r.lhs = lhs;
    r.obs = s.obs;
    r.total = s.total;
    r.source = s.source;
    r.budget = budget;
    if (lhs == 0.0 || s.total == 0.0) {
        r.ratio = 0.0;
    } else if (s.obs == 0.0) {
        r.degenerate = true;
        r.ratio = std::numeric_limits<double>::infinity();
    } else {
        r.ratio = lhs * std::log1p(s.total / s.obs) / s.total;
    }
    r.pass = !r.degenerate && (r.ratio == 0.0 || std::log(r.ratio) <= budget);
    return r;
}

} // namespace detail

// ‖u‖_{L²(D_δ)} ≤ 𝔅(δ)‖u‖_{H¹(D)}/log(1 + ‖u‖_{H¹(D)}/(‖u‖_{H¹(C)} + ‖f‖_{L²(D)}))
inline StabilityReport stability_functional(const ScalarField& u, const ScalarField& f, double delta, double N,
                                            const GeometryConfig& cfg, LevelParam level = LevelParam::Sq) {
    const auto s = detail::stability_norms(u, f, cfg);
    const double lhs = norm(u, diamond_level(delta, level), cfg, NormKind::L2);
    auto r = detail::assemble(delta, lhs, s, log_blowup(delta, N));
    r.level = to_string(level);
    return r;
}

// one report per δ, sharing the δ-independent norms
inline std::vector<StabilityReport> stability_sweep(const ScalarField& u, const ScalarField& f,
                                                    const std::vector<double>& deltas, double N,
                                                    const GeometryConfig& cfg,
                                                    LevelParam level = LevelParam::Sq) {
    const auto s = detail::stability_norms(u, f, cfg);
    std::vector<StabilityReport> out;
    for (double d : deltas) {
        const double lhs = norm(u, diamond_level(d, level), cfg, NormKind::L2);
        auto r = detail::assemble(d, lhs, s, log_blowup(d, N));
        r.level = to_string(level);
        out.push_back(r);
    }
    return out;
}

struct LoglogReport {
    double lhs = 0, obs = 0, total = 0;
    double denominator = 0;   // log(1 + log(1 + total/obs))^{4/15}
    double witnessed_C = 0;   // lhs·denominator/total
    std::vector<double> deltas, strip_norms, strip_measures;
    double strip_norm_exponent = 0;
    double strip_measure_exponent = 0;
    bool heuristic = false;   // n < 3: the Sobolev route to δ^{4/3} is unavailable
    bool degenerate = false;
};

inline constexpr double kLoglogExponent = 4.0 / 15.0;

// ‖u‖_{L²(D)} ≤ C‖u‖_{H¹(D)}/log(1 + log(1 + ‖u‖_{H¹(D)}/obs))^{4/15}, plus the
// strip term ‖u‖_{L²(D \ D_δ)} over a δ sweep and its power-law fit
inline LoglogReport loglog_bound(const ScalarField& u, const ScalarField& f, const std::vector<double>& deltas,
                                 const GeometryConfig& cfg) {
    LoglogReport r;
    const auto s = detail::stability_norms(u, f, cfg);
    r.obs = s.obs;
    r.total = s.total;
    const ScalarField dmask = region_mask(u.grid, Region::diamond(), cfg);
    r.lhs = norm(u, dmask, NormKind::L2);
    r.heuristic = cfg.n < 3;
    if (r.lhs > 0 && s.total > 0) {
        if (s.obs == 0.0) {
            r.degenerate = true;
            r.denominator = std::numeric_limits<double>::infinity();
            r.witnessed_C = std::numeric_limits<double>::infinity();
        } else {
            r.denominator = std::pow(std::log1p(std::log1p(s.total / s.obs)), kLoglogExponent);
            r.witnessed_C = r.lhs * r.denominator / s.total;
        }
    }
    for (double d : deltas) {
        ScalarField strip = dmask;
        const ScalarField inner = region_mask(u.grid, diamond_level(d, LevelParam::Sq), cfg);
        for (std::size_t k = 0; k < strip.size(); ++k) strip.v[k] = std::max(0.0, strip.v[k] - inner.v[k]);
        r.deltas.push_back(d);
        r.strip_norms.push_back(norm(u, strip, NormKind::L2));
        r.strip_measures.push_back(strip_measure(d, cfg, u.grid));
    }
    if (deltas.size() >= 2) {
        bool positive = std::all_of(r.strip_norms.begin(), r.strip_norms.end(), [](double v) { return v > 0; });
        r.strip_norm_exponent = positive ? fit_power(r.deltas, r.strip_norms) : 0.0;
        r.strip_measure_exponent = fit_power(r.deltas, r.strip_measures);
    }
    return r;
}

struct UcProbeReport {
    double value = 0;                 // max over members and δ of ‖u‖_{L²(D_δ)}/‖u‖_{H¹(grid)}
    std::vector<double> member_values;
    double support_radius = 0;
};

// Solutions whose data vanish on a ball around r = 0 at t = 0; for a radius
// beyond 3R/2 finite speed keeps them zero on the diamond.
inline UcProbeReport qualitative_uc_probe(const EnsembleSpec& spec, const std::vector<double>& deltas,
                                          const GeometryConfig& cfg, LevelParam level = LevelParam::Sq) {
    UcProbeReport rep;
    rep.support_radius = spec.support_radius;
    const auto members = manufacture_solutions(spec);
    rep.member_values.assign(members.size(), 0.0);
    std::vector<ScalarField> masks;
    for (double d : deltas) masks.push_back(region_mask(spec.grid, diamond_level(d, level), cfg));
#pragma omp parallel for schedule(dynamic)
    for (int m = 0; m < static_cast<int>(members.size()); ++m) {
        const double tot = norm(members[m].u, NormKind::H1);
        double v = 0.0;
        if (tot > 0)
            for (const auto& mask : masks) v = std::max(v, norm(members[m].u, mask, NormKind::L2) / tot);
        rep.member_values[m] = v;
    }
    for (double v : rep.member_values) rep.value = std::max(rep.value, v);
    return rep;
}

struct LocalQuantOptions {
    double gamma = 0.45;
    double delta = 0.3;
    double a_frak = 16.0;     // ζ = 𝔞δ²/16
    double C = 1.0;           // μ0 = C/(δ⁸β)
    LedgerCoefficients coefficients;
    CutoffSpec eta{2.1, 2.2, 2.8, 2.9};  // spatial cutoff, 1 on the support of u
    const ScalarField* q = nullptr;
    MultiplierOptions mopt;
};

struct LocalQuantReport {
    double kappa = 0, alpha = 0, beta = 0, kappa_prime = 0, zeta = 0, mu0 = 0;
    std::vector<double> mu_values, lhs, main, remainder, witnessed;
    std::vector<bool> admissible;
    double witnessed_coefficient = 0;  // smallest C/δ^N making every sweep point hold
    bool vacuous = false;
};

// ‖M^{βμ}_μ σ_μ u‖_{H¹} ≤ (C/δ^N)e^{κμ}(‖M^{αμ}_μ θ_μ u‖_{H¹} + ‖□u‖_{L²(Ω_δ)}) + (C/δ^N)e^{-κ'μ}‖u‖_{H¹}
// with σ supported in γ ± ζ/4 and θ = 1 on {φ > γ + 3ζ/32}, supported in {φ > γ + ζ/16}.
inline LocalQuantReport local_quantitative_probe(const ScalarField& u, double kappa, double alpha, double N,
                                                 const std::vector<double>& mu_sweep, const GeometryConfig& cfg,
                                                 const LocalQuantOptions& opt = {}) {
    if (mu_sweep.empty()) throw ConfigError("local-quant probe needs a non-empty mu sweep");
    if (!(kappa > 0 && alpha > 0)) throw PreconditionViolated("kappa and alpha must be positive");
    const auto& g = u.grid;
    LocalQuantReport rep;
    rep.kappa = kappa;
    rep.alpha = alpha;
    rep.mu_values = mu_sweep;
    rep.zeta = opt.a_frak * opt.delta * opt.delta / 16.0;
    const Relation base = base_relation(N, opt.gamma, rep.zeta / 12.0, opt.coefficients);
    rep.beta = base.k.beta.eval(kappa, alpha, opt.delta);
    rep.kappa_prime = base.k.kappa_prime.eval(kappa, alpha, opt.delta);
    rep.mu0 = opt.C / (std::pow(opt.delta, 8) * rep.beta);

    const double unorm = norm(u, NormKind::H1);
    if (unorm == 0.0) {
        rep.vacuous = true;
        for (double mu : mu_sweep) {
            rep.lhs.push_back(0);
            rep.main.push_back(0);
            rep.remainder.push_back(0);
            rep.witnessed.push_back(0);
            rep.admissible.push_back(mu >= rep.mu0);
        }
        return rep;
    }
    for (int j = 0; j < g.nx; ++j)
        if (g.r(j) < cfg.r0_inner())
            for (int i = 0; i < g.nt; ++i)
                if (u(i, j) != 0.0) throw SupportViolation("u must vanish for r < r0_inner");

    const double z = rep.zeta, gam = opt.gamma;
    const SmoothCutoff sigma({gam - z / 4, gam - z / 8, gam + z / 8, gam + z / 4});
    const double inf = std::numeric_limits<double>::infinity();
    const SmoothCutoff theta({gam + z / 16, gam + 3 * z / 32, inf, inf});
    const SmoothCutoff eta(opt.eta);
    ScalarField su(g), tu(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const double ph = foliation_phi(g.t(i), g.r(j), cfg), e = eta(g.x(j));
            su(i, j) = sigma(ph) * e * u(i, j);
            tu(i, j) = theta(ph) * e * u(i, j);
        }
    const ScalarField box = apply_box(u, opt.q);
    const double box_norm = norm(box, Region::omega_delta(opt.delta), cfg, NormKind::L2);

    const int M = static_cast<int>(mu_sweep.size());
    rep.lhs.assign(M, 0);
    rep.main.assign(M, 0);
    rep.remainder.assign(M, 0);
    rep.witnessed.assign(M, 0);
    rep.admissible.assign(M, false);
    for (int k = 0; k < M; ++k) {
        const double mu = mu_sweep[k];
        if (!(mu > 0)) throw ConfigError("mu values must be positive");
        const auto Mb = MultiplierSpec::lowpass_reg(rep.beta * mu, mu);
        const auto Ma = MultiplierSpec::lowpass_reg(alpha * mu, mu);
        const auto Reg = MultiplierSpec::regularizer(mu);
        auto sym_b = [&](double xi) { return Mb.symbol(xi) * Reg.symbol(xi); };
        auto sym_a = [&](double xi) { return Ma.symbol(xi) * Reg.symbol(xi); };
        const double lhs = norm(apply_symbol(su, sym_b, opt.mopt), NormKind::H1);
        const double obs = norm(apply_symbol(tu, sym_a, opt.mopt), NormKind::H1);
        const double main = std::exp(kappa * mu) * (obs + box_norm);
        const double rem = std::exp(-rep.kappa_prime * mu) * unorm;
        rep.lhs[k] = lhs;
        rep.main[k] = main;
        rep.remainder[k] = rem;
        rep.witnessed[k] = lhs / (main + rem);
        rep.admissible[k] = mu >= rep.mu0;
    }
    rep.witnessed_coefficient = *std::max_element(rep.witnessed.begin(), rep.witnessed.end());
    return rep;
}

} // namespace carleman_lab
