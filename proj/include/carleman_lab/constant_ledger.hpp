#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"

namespace carleman_lab {

// c·κ^k·α^a·δ^d
struct Monomial {
    double c = 1.0;
    double k = 0.0, a = 0.0, d = 0.0;

    double eval(double kappa, double alpha, double delta) const {
        return std::exp(log_eval(kappa, alpha, delta));
    }
    double log_eval(double kappa, double alpha, double delta) const {
        double v = std::log(c);
        if (k != 0.0) v += k * std::log(kappa);
        if (a != 0.0) v += a * std::log(alpha);
        if (d != 0.0) v += d * std::log(delta);
        return v;
    }
    bool same_shape(const Monomial& o) const { return k == o.k && a == o.a; }
};

inline Monomial operator*(const Monomial& x, const Monomial& y) {
    return {x.c * y.c, x.k + y.k, x.a + y.a, x.d + y.d};
}

inline Monomial mono_pow(const Monomial& m, double p) {
    return {std::pow(m.c, p), m.k * p, m.a * p, m.d * p};
}

enum class FormKind { Min, Max };

// min or max over monomials; dominated terms (for every κ, α > 0 and δ ∈ (0,1))
// are dropped, so the numeric value never changes under pruning
struct Form {
    FormKind kind = FormKind::Min;
    std::vector<Monomial> terms;

    double log_eval(double kappa, double alpha, double delta) const {
        if (terms.empty()) throw PreconditionViolated("empty constant form");
        double v = terms[0].log_eval(kappa, alpha, delta);
        for (std::size_t i = 1; i < terms.size(); ++i) {
            const double w = terms[i].log_eval(kappa, alpha, delta);
            v = kind == FormKind::Min ? std::min(v, w) : std::max(v, w);
        }
        return v;
    }
    double eval(double kappa, double alpha, double delta) const {
        return std::exp(log_eval(kappa, alpha, delta));
    }

    // x dominates y when x is always the binding term of the pair
    bool dominates(const Monomial& x, const Monomial& y) const {
        if (!x.same_shape(y)) return false;
        if (kind == FormKind::Min) return x.c <= y.c && x.d >= y.d;
        return x.c >= y.c && x.d <= y.d;
    }

    Form& prune() {
        std::vector<Monomial> kept;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            bool drop = false;
            for (std::size_t j = 0; j < terms.size() && !drop; ++j) {
                if (i == j || !dominates(terms[j], terms[i])) continue;
                // identical terms: keep the first copy only
                drop = !dominates(terms[i], terms[j]) || j < i;
            }
            if (!drop) kept.push_back(terms[i]);
        }
        std::sort(kept.begin(), kept.end(), [](const Monomial& x, const Monomial& y) {
            if (x.k != y.k) return x.k > y.k;
            if (x.a != y.a) return x.a > y.a;
            if (x.d != y.d) return x.d < y.d;
            return x.c < y.c;
        });
        terms = std::move(kept);
        return *this;
    }

    static Form min_of(std::vector<Monomial> t) { return Form{FormKind::Min, std::move(t)}.prune(); }
    static Form max_of(std::vector<Monomial> t) { return Form{FormKind::Max, std::move(t)}.prune(); }
    static Form kappa() { return min_of({{1.0, 1.0, 0.0, 0.0}}); }
    static Form alpha() { return min_of({{1.0, 0.0, 1.0, 0.0}}); }

    Form scaled(double s) const {
        Form f = *this;
        for (auto& m : f.terms) m.c *= s;
        return f;
    }

    int max_delta_power() const {
        double p = -std::numeric_limits<double>::infinity();
        for (const auto& m : terms) p = std::max(p, m.d);
        return static_cast<int>(p);
    }
};

inline Form combine(FormKind kind, const Form& x, const Form& y) {
    std::vector<Monomial> t = x.terms;
    t.insert(t.end(), y.terms.begin(), y.terms.end());
    return Form{kind, std::move(t)}.prune();
}

namespace detail {

// (min_i m_i)^p: a min for p > 0 and a max for p < 0; similarly for a max form
inline Form form_pow(const Form& f, double p) {
    Form out;
    out.kind = p >= 0.0 ? f.kind : (f.kind == FormKind::Min ? FormKind::Max : FormKind::Min);
    for (const auto& m : f.terms) out.terms.push_back(mono_pow(m, p));
    return out;
}

inline Form form_product(const Form& x, const Form& y) {
    if (x.kind != y.kind) throw PreconditionViolated("product of a min form and a max form");
    Form out;
    out.kind = x.kind;
    for (const auto& a : x.terms)
        for (const auto& b : y.terms) out.terms.push_back(a * b);
    return out.prune();
}

}  // namespace detail

// f(K, A) where κ ↦ K and α ↦ A. A term of a min form must be non-decreasing
// in κ and α, a term of a max form non-increasing, so the result stays in the class.
inline Form substitute(const Form& f, const Form& K, const Form& A) {
    Form out;
    out.kind = f.kind;
    for (const auto& m : f.terms) {
        const bool ok = f.kind == FormKind::Min ? (m.k >= 0 && m.a >= 0) : (m.k <= 0 && m.a <= 0);
        if (!ok) throw PreconditionViolated("substitution would leave the min/max monomial class");
        Form acc{f.kind, {{m.c, 0.0, 0.0, m.d}}};
        if (m.k != 0.0) {
            Form p = detail::form_pow(K, m.k);
            acc = detail::form_product(acc, p);
        }
        if (m.a != 0.0) {
            Form p = detail::form_pow(A, m.a);
            acc = detail::form_product(acc, p);
        }
        out.terms.insert(out.terms.end(), acc.terms.begin(), acc.terms.end());
    }
    return out.prune();
}

// Anonymous absolute constants behind the "∼" relations of one dependence step
struct LedgerCoefficients {
    double c_C = 1.0;                           // C = c_C δ^{-N}
    double kappa_c0 = 1.0, kappa_c1 = 1.0, kappa_c2 = 1.0;  // κ' = min(c0 δ^N, c1 κ δ^N, c2 α δ^N)
    double beta_c0 = 1.0, beta_c1 = 1.0, beta_c2 = 1.0;
    double c_mu = 1.0;                          // μ0 = c_mu / (δ^8 β)
};

struct DepConstants {
    Monomial C;         // δ-only
    Form kappa_prime;   // min form
    Form beta;          // min form
    Form mu0;           // max form
    double N = 1.0;

    void validate() const {
        if (!(C.c > 0) || C.k != 0 || C.a != 0) throw PreconditionViolated("C must be a positive δ-monomial");
        for (const Form* f : {&kappa_prime, &beta})
            for (const auto& m : f->terms)
                if (!(m.c > 0) || m.k < 0 || m.a < 0 || m.d < 0)
                    throw PreconditionViolated("κ' and β terms need positive coefficients and non-negative powers");
        for (const auto& m : mu0.terms)
            if (!(m.c > 0)) throw PreconditionViolated("μ0 coefficients must be positive");
    }
};

struct Relation {
    double source_level = 0.0;
    double target_level = 0.0;
    DepConstants k;
    int copies = 1;  // number of base steps folded in
};

inline Form mu0_from_beta(const Form& beta, double c_mu) {
    Form inv = detail::form_pow(beta, -1.0);
    for (auto& m : inv.terms) {
        m.c *= c_mu;
        m.d -= 8.0;
    }
    return inv.prune();
}

// The one-step relation {φ > γ - step} ◁ {φ > γ} with N and coefficient knobs
inline Relation base_relation(double N, double gamma, double step, const LedgerCoefficients& co = {}) {
    if (!(N > 0)) throw PreconditionViolated("N must be positive");
    if (!(step > 0)) throw PreconditionViolated("step must be positive");
    Relation r;
    r.source_level = gamma;
    r.target_level = gamma - step;
    r.k.N = N;
    r.k.C = {co.c_C, 0.0, 0.0, -N};
    auto shape = [N](double c0, double c1, double c2) {
        std::vector<Monomial> t;
        if (c0 > 0) t.push_back({c0, 0.0, 0.0, N});
        if (c1 > 0) t.push_back({c1, 1.0, 0.0, N});
        if (c2 > 0) t.push_back({c2, 0.0, 1.0, N});
        return Form::min_of(t);
    };
    r.k.kappa_prime = shape(co.kappa_c0, co.kappa_c1, co.kappa_c2);
    r.k.beta = shape(co.beta_c0, co.beta_c1, co.beta_c2);
    r.k.mu0 = mu0_from_beta(r.k.beta, co.c_mu);
    r.k.validate();
    return r;
}

// C = 1, κ' = κ, β = α, μ0 = 1
inline Relation identity_relation(double level) {
    Relation r;
    r.source_level = r.target_level = level;
    r.k.C = {1.0, 0.0, 0.0, 0.0};
    r.k.kappa_prime = Form::kappa();
    r.k.beta = Form::alpha();
    r.k.mu0 = Form::max_of({{1.0, 0.0, 0.0, 0.0}});
    r.k.N = 0.0;
    r.copies = 0;
    return r;
}

// rel1: U ◁ W, rel2: V ◁ U. Returns V ◁ W.
inline Relation compose(const Relation& rel1, const Relation& rel2) {
    const double scale = std::max({1.0, std::abs(rel1.target_level), std::abs(rel2.source_level)});
    if (std::abs(rel2.source_level - rel1.target_level) > 1e-12 * scale)
        throw LevelMismatch("relation levels do not chain: " + std::to_string(rel1.target_level) + " vs " +
                            std::to_string(rel2.source_level));
    const Form K_half = Form::kappa().scaled(0.5);
    const Form A = Form::alpha();
    const Form kp1 = substitute(rel1.k.kappa_prime, K_half, A);
    const Form b1 = substitute(rel1.k.beta, K_half, A);
    const Form mu1 = substitute(rel1.k.mu0, K_half, A);
    const Form ktil = combine(FormKind::Min, kp1, Form::kappa()).scaled(0.5);
    const Form kp2 = substitute(rel2.k.kappa_prime, ktil, b1);
    const Form b2 = substitute(rel2.k.beta, ktil, b1);
    const Form mu2 = substitute(rel2.k.mu0, ktil, b1);

    Relation r;
    r.source_level = rel1.source_level;
    r.target_level = rel2.target_level;
    r.k.N = std::max(rel1.k.N, rel2.k.N);
    r.k.C = rel1.k.C * rel2.k.C;
    r.k.kappa_prime = combine(FormKind::Min, kp2, kp1.scaled(0.5));
    r.k.beta = b2;
    r.k.mu0 = combine(FormKind::Max, mu1, mu2);
    r.copies = rel1.copies + rel2.copies;
    return r;
}

inline Relation shifted(const Relation& r, double new_source) {
    Relation s = r;
    const double step = r.source_level - r.target_level;
    s.source_level = new_source;
    s.target_level = new_source - step;
    return s;
}

// k-fold composition: k + 1 copies of the base step, chained from the observation level
inline Relation iterate(const Relation& base, int k) {
    if (k < 1) throw PreconditionViolated("iterate needs k >= 1");
    Relation acc = base;
    for (int i = 0; i < k; ++i) acc = compose(acc, shifted(base, acc.target_level));
    return acc;
}

// Closed form of iterate(base_relation(N, ...), k). Each step halves the α
// coefficient once (through κ̃) and the κ coefficient twice (κ/2, then κ̃).
struct ClosedForm {
    Monomial C;
    Form beta, kappa_prime, mu0;
};

inline ClosedForm closed_form(double N, int k, const LedgerCoefficients& co = {}) {
    auto unit = [](double c) { return c == 0.0 || c == 1.0; };
    if (!unit(co.beta_c0) || co.beta_c1 != 1.0 || co.beta_c2 != 1.0 || co.kappa_c0 != co.beta_c0 ||
        co.kappa_c1 != 1.0 || co.kappa_c2 != 1.0)
        throw PreconditionViolated("closed form is tabulated for unit κ'/β coefficients only");
    const double p = N * (k + 1);
    ClosedForm f;
    f.C = {std::pow(co.c_C, k + 1), 0.0, 0.0, -p};
    std::vector<Monomial> t{{std::pow(0.25, k), 1.0, 0.0, p}, {std::pow(0.5, k), 0.0, 1.0, p}};
    if (co.beta_c0 > 0) t.push_back({std::pow(0.5, k), 0.0, 0.0, p});
    f.beta = Form::min_of(t);
    f.kappa_prime = f.beta;
    f.mu0 = mu0_from_beta(f.beta, co.c_mu);
    return f;
}

// The literal forms quoted for the k-th iterate: C^{k+1}/δ^{N(k+1)},
// min((κ/2^k)δ^{N(k+1)}, αδ^{N(k+1)}), C/(δ^8 β_k)
inline ClosedForm literal_closed_form(double N, int k, double C = 1.0) {
    const double p = N * (k + 1);
    ClosedForm f;
    f.C = {std::pow(C, k + 1), 0.0, 0.0, -p};
    f.beta = Form::min_of({{std::pow(0.5, k), 1.0, 0.0, p}, {1.0, 0.0, 1.0, p}});
    f.kappa_prime = f.beta;
    f.mu0 = mu0_from_beta(f.beta, C);
    return f;
}

// smallest k >= 0 with γ - (k+1)·b·δ² <= δ
inline int steps_needed(double gamma, double delta, double b) {
    if (!(delta > 0) || gamma < delta) throw PreconditionViolated("steps_needed needs gamma >= delta > 0");
    if (!(b > 0)) throw PreconditionViolated("step coefficient must be positive");
    const double x = (gamma - delta) / (b * delta * delta);
    const double k = std::ceil(x * (1.0 - 1e-12)) - 1.0;
    if (!(k < double(std::numeric_limits<int>::max())))
        throw NumericalOverflow("iteration count exceeds int range at delta = " + std::to_string(delta));
    return static_cast<int>(std::max(0.0, k));
}

// step coefficient b from b·δ² = ζ/12 with ζ = a·δ²/16
inline double step_coefficient(double a_frak) { return a_frak / (16.0 * 12.0); }

struct BlowupOptions {
    double gamma = 0.5;     // observation level of the iteration
    double b = 1.0 / 12.0;  // step coefficient
    double c_C = 1.0;
};

struct BlowupValue {
    double delta = 0;
    double N = 0;
    double log_closed = 0;   // (N/δ⁴)·log(1/δ)
    double log_e2e = 0;      // log C_k at δ' = δ²/3 and k = steps_needed(γ, δ', b)
    int k = 0;
    double ratio() const { return log_closed > 0 ? log_e2e / log_closed : std::numeric_limits<double>::quiet_NaN(); }
};

inline double log_blowup(double delta, double N) {
    if (!(delta > 0 && delta < 1)) throw PreconditionViolated("blowup needs 0 < delta < 1");
    if (!(N > 0)) throw PreconditionViolated("blowup needs N > 0");
    return N / std::pow(delta, 4) * std::log(1.0 / delta);
}

inline BlowupValue blowup_constant(double delta, double N, const BlowupOptions& opt = {}) {
    BlowupValue v;
    v.delta = delta;
    v.N = N;
    v.log_closed = log_blowup(delta, N);
    const double dp = delta * delta / 3.0;
    v.k = steps_needed(opt.gamma, dp, opt.b);
    v.log_e2e = (v.k + 1) * (std::log(opt.c_C) + N * std::log(1.0 / dp));
    return v;
}

struct OptimizeResult {
    double bound = 0;        // D1·c / log(c/b + 1)^α with the corrected D1
    double D1 = 0;
    double K_alpha = 0;      // sup_{x <= C2} sqrt(x(1+x)) log(1/x + 1)^α
    double x_star = 0;
    double literal_D1 = 0;     // (2C1)^α max(K, μ0) with the literal K
    double literal_K = 0;
    double literal_bound = 0;
};

namespace detail {

// sup over (lo, hi] of f by a log-spaced scan refined with golden-section search
template <class F>
std::pair<double, double> maximize_1d(F f, double lo, double hi) {
    const int n = 2000;
    const double llo = std::log(lo), lhi = std::log(hi);
    int best = 0;
    double fbest = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double v = f(std::exp(llo + (lhi - llo) * i / n));
        if (v > fbest) {
            fbest = v;
            best = i;
        }
    }
    double a = llo + (lhi - llo) * std::max(0, best - 1) / n;
    double b = llo + (lhi - llo) * std::min(n, best + 1) / n;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
    while (b - a > 1e-10 * std::max(1.0, std::abs(a))) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(std::exp(x2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(std::exp(x1));
        }
    }
    double xs = std::exp(0.5 * (a + b)), fs = f(xs);
    if (fbest > fs) {
        xs = std::exp(llo + (lhi - llo) * best / n);
        fs = fbest;
    }
    return {xs, fs};
}

}  // namespace detail

inline OptimizeResult optimize_bound(double b, double c, double C1, double C2, double alpha, double mu0) {
    if (!(b > 0 && c > 0)) throw PreconditionViolated("optimize_bound needs b, c > 0");
    if (!(alpha > 0)) throw PreconditionViolated("optimize_bound needs alpha > 0");
    if (!(C1 > 0 && C2 > 0)) throw PreconditionViolated("optimize_bound needs C1, C2 > 0");
    if (!(mu0 >= 1)) throw PreconditionViolated("optimize_bound needs mu0 >= 1");
    if (b > C2 * c) throw PreconditionViolated("optimize_bound needs b <= C2·c");
    OptimizeResult r;
    const double lo = std::min(1e-8, 0.5 * C2);
    auto [xs, ks] = detail::maximize_1d(
        [alpha](double x) { return std::sqrt(x * (1.0 + x)) * std::pow(std::log1p(1.0 / x), alpha); }, lo, C2);
    r.x_star = xs;
    r.K_alpha = ks;
    const double s = std::pow(2.0 * C1, alpha);
    r.D1 = std::max(ks + s, std::pow(2.0 * C1 * mu0, alpha));
    const double L = std::pow(std::log1p(c / b), alpha);
    r.bound = r.D1 * c / L;
    auto [xp, kp] = detail::maximize_1d(
        [](double x) { return std::sqrt(x * (1.0 + x)) * std::log1p(1.0 / x); }, lo, C2);
    (void)xp;
    r.literal_K = kp / (2.0 * C1);
    r.literal_D1 = s * std::max(r.literal_K, mu0);
    r.literal_bound = r.literal_D1 * c / L;
    return r;
}

// min(c, inf_{μ >= μ0} e^{C1 μ} b + c/μ^α) on a dense log grid
inline double brute_force_min(double b, double c, double C1, double alpha, double mu0, int points = 20000) {
    double best = c;
    const double hi = std::max(mu0 * 10.0, std::log1p(c / b) / C1 * 10.0 + mu0);
    const double llo = std::log(mu0), lhi = std::log(hi);
    for (int i = 0; i <= points; ++i) {
        const double mu = std::exp(llo + (lhi - llo) * i / points);
        const double e = C1 * mu;
        if (e > 700) break;
        best = std::min(best, std::exp(e) * b + c / std::pow(mu, alpha));
    }
    return best;
}

}  // namespace carleman_lab
