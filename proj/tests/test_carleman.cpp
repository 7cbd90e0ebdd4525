#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "carleman_lab/carleman.hpp"
#include "carleman_lab/fitting.hpp"

using namespace carleman_lab;

namespace {

GridSpec box(double t0, double t1, double x0, double x1, int nt, int nx) {
    GridSpec g;
    g.t_min = t0;
    g.t_max = t1;
    g.x_min = x0;
    g.x_max = x1;
    g.nt = nt;
    g.nx = nx;
    return g;
}

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

ScalarField bump_field(const GridSpec& g, double tc, double xc, double rt, double rx) {
    return ScalarField::sample(g, [&](double t, double x) {
        return bump(std::hypot((t - tc) / rt, (x - xc) / rx));
    });
}

double residual_ratio(const CarlemanParams& p, const GeometryConfig& cfg) {
    const GridSpec g = box(-1, 1, 0.2, 2.2, 129, 129);
    const double a = identity_residual(bump_field(g, 0.1, 1.2, 0.4, 0.45), p, cfg).residual_integrated;
    const double b =
        identity_residual(bump_field(g.refined(), 0.1, 1.2, 0.4, 0.45), p, cfg).residual_integrated;
    return a / b;
}

double interior_sup(const ScalarField& f, int ring) {
    double m = 0.0;
    for (int i = ring; i + ring < f.grid.nt; ++i)
        for (int j = ring; j + ring < f.grid.nx; ++j) m = std::max(m, std::abs(f(i, j)));
    return m;
}

} // namespace

TEST(Identity, ZeroFieldHasZeroTerms) {
    GeometryConfig cfg;
    const GridSpec g = box(-1, 1, 0.2, 2.2, 33, 33);
    const auto b = identity_residual(ScalarField(g), CarlemanParams{}, cfg);
    EXPECT_EQ(b.residual_integrated, 0.0);
    EXPECT_EQ(b.residual_pointwise, 0.0);
    for (const auto* f : {&b.lhs, &b.q_plus_term, &b.q_minus_term, &b.square1, &b.square2})
        for (double v : f->v) EXPECT_EQ(v, 0.0);
}

TEST(Identity, BumpResidualSecondOrder) {
    GeometryConfig cfg;
    const double r = residual_ratio(CarlemanParams{}, cfg);
    EXPECT_GE(r, 3.0);
    EXPECT_LE(r, 5.0);
}

TEST(Identity, ShiftedSigmaStillSecondOrder) {
    GeometryConfig cfg;
    CarlemanParams p;
    p.sigma_offset = 1.0;
    const double r = residual_ratio(p, cfg);
    EXPECT_GE(r, 3.0);
    EXPECT_LE(r, 5.0);
}

TEST(Identity, SupportAtBoundaryRejected) {
    GeometryConfig cfg;
    const GridSpec g = box(-1, 1, 0.2, 2.2, 33, 33);
    EXPECT_THROW(identity_residual(ScalarField(g, 1.0), CarlemanParams{}, cfg), SupportViolation);
}

TEST(QPlus, HandValuesOnUnitVectors) {
    const GridSpec g = box(0, 1, 0, 1, 5, 5);
    for (double tau : {1.0, 2.0, 7.3}) {
        CarlemanParams p;
        p.tau = tau;
        VectorField<double> et{ScalarField(g, 1.0), ScalarField(g, 0.0)};
        VectorField<double> er{ScalarField(g, 0.0), ScalarField(g, 1.0)};
        EXPECT_DOUBLE_EQ(q_plus(et, p).v[0], -3.5 * tau);
        EXPECT_DOUBLE_EQ(q_plus(er, p).v[0], 3.5 * tau);
    }
}

// With a = 3τ/2 and radial X, Q₊ + (7/2)τ|X^t|² = (7/2)τ|X^r|² ≥ (7/26)τ|X^r|²; the
// version with τ|X^t|² added instead dips to -(5/2)τ|∇v|² on time-like gradients.
TEST(QPlus, PositivityOnFieldsAwayFromAxis) {
    GeometryConfig cfg;
    const GridSpec g = box(-0.6, 0.6, 0.8, 3.0, 97, 177);
    CarlemanParams p;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    double form_min = 1e300, stated_min = 1e300;
    for (int m = 0; m < 20; ++m) {
        const double xc = cfg.r0_inner() + 0.3 + 1.2 * U(rng);
        const auto v = ScalarField::sample(g, [&](double t, double x) {
            return bump(std::hypot(t / 0.4, (x - xc) / 0.3)) * std::cos(5 * U(rng) * t);
        });
        const auto X = gradient(v);
        const auto Q = q_plus(X, p);
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double xt2 = X.t.v[k] * X.t.v[k], xr2 = X.x.v[k] * X.x.v[k];
            if (xr2 > 1e-6 * (xt2 + xr2)) form_min = std::min(form_min, (Q.v[k] + 3.5 * p.tau * xt2) / (p.tau * xr2));
            if (xt2 + xr2 > 1e-290) stated_min = std::min(stated_min, (Q.v[k] + p.tau * xt2) / (p.tau * (xt2 + xr2)));
        }
    }
    EXPECT_GE(form_min, 7.0 / 26.0 - 0.01);
    EXPECT_NEAR(form_min, 3.5, 1e-6);
    EXPECT_LT(stated_min, 7.0 / 26.0 - 0.01);
    EXPECT_GE(stated_min, -2.5 - 1e-12);
}

TEST(QMinus, HandValues) {
    GeometryConfig cfg;
    // φ(t, r) = 1 at t = 0, r = r1 + sqrt(2); φ = 0 at the vertex
    GridSpec g = box(-1, 1, cfg.r1() - 1, cfg.r1() + std::sqrt(2.0), 3, 3);
    CarlemanParams p;
    p.tau = 2.0;
    const auto q = q_minus_on_grad_ell(g, p, cfg);
    EXPECT_NEAR(q.phi_tau3(1, 2), 8.0, 1e-12);
    EXPECT_NEAR(q.assembled(1, 2), 8.0, 1e-12);
    GridSpec v = box(-1, 1, cfg.r1() - 1, cfg.r1() + 1, 3, 3);
    EXPECT_EQ(q_minus_on_grad_ell(v, p, cfg).phi_tau3(1, 1), 0.0);
}

TEST(QMinus, AssembliesAgreeOnGrid) {
    GeometryConfig cfg;
    const GridSpec g = box(-1, 1, 0.2, 2.2, 65, 65);
    for (double tau : {0.5, 3.0, 11.0}) {
        CarlemanParams p;
        p.tau = tau;
        const auto q = q_minus_on_grad_ell(g, p, cfg);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (q.scale.v[k] > 0)
                EXPECT_LE(std::abs(q.assembled.v[k] - q.phi_tau3.v[k]) / q.scale.v[k], 1e-12);
    }
}

TEST(ConjugatedWave, ExpansionMatchesDirectConjugation) {
    GeometryConfig cfg;
    CarlemanParams p;
    p.tau = 1.5;
    std::vector<double> err;
    for (int n : {65, 129, 257}) {
        const GridSpec g = box(-1, 1, 1.6, 3.6, n, n);
        const auto v = bump_field(g, 0.0, 2.6, 0.5, 0.5);
        ScalarField d = conjugated_wave_apply(v, p, cfg) - conjugated_box_direct(v, p, cfg);
        err.push_back(interior_sup(d, 2) / interior_sup(conjugated_box_direct(v, p, cfg), 2));
    }
    EXPECT_GE(err[0] / err[1], 3.0);
    EXPECT_GE(err[1] / err[2], 3.0);
    EXPECT_LE(err[2], 1e-3);
}

TEST(ConjugatedWave, ZeroFieldGivesZero) {
    GeometryConfig cfg;
    CarlemanParams p;
    p.epsilon = 0.1;
    const GridSpec g = box(-1, 1, 1.6, 3.6, 33, 33);
    EXPECT_EQ(interior_sup(conjugated_wave_apply(ScalarField(g), p, cfg), 0), 0.0);
}

// e^{-εD_t²/2τ}□_ℓ v = □_{ℓ,ε} e^{-εD_t²/2τ} v up to discretization error
TEST(ConjugatedWave, IntertwinesWithGaussianWeight) {
    GeometryConfig cfg;
    CarlemanParams p0;
    p0.tau = 1.0;
    CarlemanParams pe = p0;
    pe.epsilon = 0.05;
    const auto W = MultiplierSpec::gaussian_weight(pe.epsilon, pe.tau);
    std::vector<double> err;
    for (int n : {193, 385, 769}) {
        const GridSpec g = box(-3, 3, 1.6, 3.6, n, 65);
        const auto v = bump_field(g, 0.0, 2.6, 0.5, 0.5);
        ScalarField wv = apply(W, v);
        double peak = 0.0;
        for (double a : wv.v) peak = std::max(peak, std::abs(a));
        for (auto& a : wv.v)
            if (std::abs(a) < 1e-13 * peak) a = 0.0;
        const ScalarField lhs = apply(W, conjugated_wave_apply(v, p0, cfg));
        const ScalarField rhs = conjugated_wave_apply(wv, pe, cfg);
        err.push_back(interior_sup(lhs - rhs, 4) / norm(v, NormKind::H1));
    }
    EXPECT_GE(err[0] / err[1], 3.0);
    EXPECT_GE(err[1] / err[2], 3.0);
}

TEST(Subelliptic, ZeroFieldIsVacuous) {
    GeometryConfig cfg;
    const GridSpec g = box(-0.5, 0.5, 2.0, 3.2, 33, 33);
    const auto r = subelliptic_check(ScalarField(g), 0.2, {5, 10}, 0.01, cfg);
    EXPECT_TRUE(r.pass);
    for (double v : r.witnessed) EXPECT_EQ(v, 0.0);
}

TEST(Subelliptic, ScalingInvariance) {
    GeometryConfig cfg;
    const GridSpec g = box(-0.5, 0.5, 2.0, 3.2, 65, 65);
    const auto v = bump_field(g, 0.05, 2.65, 0.2, 0.15);
    const auto a = subelliptic_check(v, 0.2, {5, 10, 20}, 0.01, cfg);
    const auto b = subelliptic_check(2.0 * v, 0.2, {5, 10, 20}, 0.01, cfg);
    for (std::size_t k = 0; k < a.witnessed.size(); ++k)
        EXPECT_NEAR(a.witnessed[k], b.witnessed[k], 1e-12 * a.witnessed[k]);
}

TEST(Subelliptic, EnsembleConstantStableUnderRefinement) {
    GeometryConfig cfg;
    const GridSpec g = box(-0.5, 0.5, 2.0, 3.2, 65, 65);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0, 1);
    double c0 = 0, c1 = 0;
    for (int m = 0; m < 8; ++m) {
        const double tc = 0.1 * (2 * U(rng) - 1), xc = 2.55 + 0.2 * U(rng);
        const double k = 8 * U(rng);
        auto make = [&](const GridSpec& gg) {
            return ScalarField::sample(gg, [&](double t, double x) {
                return bump(std::hypot((t - tc) / 0.15, (x - xc) / 0.15)) * std::cos(k * x);
            });
        };
        c0 = std::max(c0, subelliptic_check(make(g), 0.2, {5, 10, 20}, 0.01, cfg).witnessed_constant);
        c1 = std::max(c1, subelliptic_check(make(g.refined()), 0.2, {5, 10, 20}, 0.01, cfg).witnessed_constant);
    }
    EXPECT_TRUE(std::isfinite(c0));
    EXPECT_LE(std::abs(c0 - c1) / std::max(c0, c1), 0.2);
}

TEST(Subelliptic, PreconditionsEnforced) {
    GeometryConfig cfg;
    const GridSpec g = box(-0.5, 0.5, 2.0, 3.2, 65, 65);
    const auto v = bump_field(g, 0.05, 2.65, 0.2, 0.15);
    EXPECT_THROW(subelliptic_check(v, 0.2, {5}, 0.02, cfg), PreconditionViolated);
    EXPECT_THROW(subelliptic_check(v, 0.2, {1}, 0.01, cfg), PreconditionViolated);
    EXPECT_THROW(subelliptic_check(v, 0.2, {}, 0.01, cfg), ConfigError);
    const auto low = bump_field(g, 0.0, 2.2, 0.2, 0.15);  // reaches φ < γ
    EXPECT_THROW(subelliptic_check(low, 0.2, {5}, 0.01, cfg), SupportViolation);
}

TEST(CarlemanEstimate, ZeroFieldIsVacuous) {
    GeometryConfig cfg;
    const GridSpec g = box(-0.5, 0.5, 2.2, 3.0, 65, 65);
    const auto r = carleman_estimate_check(ScalarField(g), 0.25, {40, 60}, cfg);
    EXPECT_TRUE(r.pass);
}

TEST(CarlemanEstimate, PotentialWithRaisedFloorKeepsPass) {
    GeometryConfig cfg;
    const GridSpec g = box(-0.5, 0.5, 2.2, 3.0, 129, 257);
    const auto u = bump_field(g, 0.0, 2.65, 0.25, 0.25);
    const ScalarField q = ScalarField::sample(g, [](double, double x) { return std::cos(3 * x); });
    CarlemanCheckOptions o;
    const auto free = carleman_estimate_check(u, 0.25, {40, 60, 80}, cfg, o);
    o.q = &q;
    o.tau_floor_multiplier = 2.0;
    const auto withq = carleman_estimate_check(u, 0.25, {40, 60, 80}, cfg, o);
    EXPECT_TRUE(free.pass);
    EXPECT_TRUE(withq.pass);
    EXPECT_LE(relative_drift(free.witnessed_constant, withq.witnessed_constant), 0.5);
}
