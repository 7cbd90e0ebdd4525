#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "carleman_lab/bound_probe.hpp"
#include "carleman_lab/multipliers.hpp"

using namespace carleman_lab;

namespace {

GridSpec line(double t0, double t1, int nt, int nx = 3) {
    GridSpec g;
    g.t_min = t0;
    g.t_max = t1;
    g.x_min = 0.0;
    g.x_max = 1.0;
    g.nt = nt;
    g.nx = nx;
    return g;
}

ScalarField pulse(const GridSpec& g, double s, double t0 = 0.0) {
    return ScalarField::sample(g, [&](double t, double x) {
        return std::exp(-(t - t0) * (t - t0) / (2 * s * s)) * (1.0 + x);
    });
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.v[k] - b.v[k]));
    return m;
}

double sum_sq(const ScalarField& u) {
    double s = 0.0;
    for (double a : u.v) s += a * a;
    return s;
}

} // namespace

TEST(Multiplier, LowPassKeepsTimeConstantField) {
    const GridSpec g = line(0, 2, 129);
    MultiplierOptions per;
    per.periodic = true;
    const ScalarField u(g, 2.5);
    EXPECT_LE(sup_diff(apply(MultiplierSpec::lowpass(3.0), u, per), u), 1e-13);
}

TEST(Multiplier, GaussianWeightOnPureTone) {
    const GridSpec g = line(0, 2, 257);
    MultiplierOptions per;
    per.periodic = true;
    for (int bin : {1, 5, 20}) {
        const double w = 2 * std::numbers::pi * bin / 2.0;
        ComplexField tone(g);
        for (int i = 0; i < g.nt; ++i)
            for (int j = 0; j < g.nx; ++j) tone(i, j) = std::polar(1.0, w * g.t(i));
        const double eps = 0.3, tau = 2.0;
        const auto out = apply(MultiplierSpec::gaussian_weight(eps, tau), tone, per);
        const double f = std::exp(-eps * w * w / (2 * tau));
        for (std::size_t k = 0; k < out.size(); ++k) EXPECT_LE(std::abs(out.v[k] - f * tone.v[k]), 1e-10);
    }
}

TEST(Multiplier, RegularizerWidensGaussianVariance) {
    const GridSpec g = line(-4, 4, 2049);
    const double s = 0.2;
    for (double lambda : {10.0, 50.0, 200.0}) {
        const auto out = apply(MultiplierSpec::regularizer(lambda), pulse(g, s));
        const double v = s * s + 2.0 / lambda;
        const auto expect = ScalarField::sample(g, [&](double t, double x) {
            return s / std::sqrt(v) * std::exp(-t * t / (2 * v)) * (1.0 + x);
        });
        EXPECT_LE(sup_diff(out, expect), 1e-9) << lambda;
    }
}

TEST(Multiplier, OperatorsCommute) {
    const GridSpec g = line(-6, 6, 1025);
    const auto u = pulse(g, 0.3, 0.2);
    const auto A = MultiplierSpec::regularizer(20.0), B = MultiplierSpec::lowpass_reg(6.0, 30.0);
    EXPECT_LE(sup_diff(apply(A, apply(B, u)), apply(B, apply(A, u))), 1e-12);
}

TEST(Multiplier, SquareOfSymbolEqualsTwoApplications) {
    const GridSpec g = line(-6, 6, 1025);
    const auto u = pulse(g, 0.3);
    const auto W = MultiplierSpec::gaussian_weight(0.1, 1.0);
    const auto twice = apply(W, apply(W, u));
    const auto sq = apply_symbol(u, [&](double xi) { return W.symbol(xi) * W.symbol(xi); });
    EXPECT_LE(sup_diff(twice, sq), 1e-12);
}

TEST(Multiplier, ContractionsDoNotIncreaseEnergy) {
    const GridSpec g = line(-6, 6, 1025);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int m = 0; m < 10; ++m) {
        const double a = U(rng), b = 5 * U(rng);
        const auto u = ScalarField::sample(g, [&](double t, double) {
            return std::exp(-t * t / 0.3) * (a + std::cos(b * t));
        });
        for (const auto& s : {MultiplierSpec::regularizer(8.0), MultiplierSpec::lowpass(4.0),
                              MultiplierSpec::gaussian_weight(0.2, 1.0), MultiplierSpec::lowpass_reg(4.0, 16.0)})
            EXPECT_LE(sum_sq(apply(s, u)), sum_sq(u) * (1 + 1e-12));
    }
}

TEST(Multiplier, ParsevalMatchesDirectSum) {
    const GridSpec g = line(-6, 6, 801, 5);
    const auto u = pulse(g, 0.4);
    double direct = 0.0;
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const double wx = (j == 0 || j == g.nx - 1) ? 0.5 * g.dx() : g.dx();
            direct += g.dt() * wx * u(i, j) * u(i, j);
        }
    EXPECT_NEAR(parseval_norm_sq(u), direct, 1e-12 * direct);
}

TEST(Multiplier, ZeroFieldMapsToZero) {
    const GridSpec g = line(-1, 1, 65);
    const ScalarField z(g);
    for (const auto& s : {MultiplierSpec::regularizer(8.0), MultiplierSpec::lowpass(4.0)})
        EXPECT_EQ(sup_diff(apply(s, z), z), 0.0);
    EXPECT_EQ(conjugation_residual(z, 0.5, 1.0), 0.0);
}

TEST(Multiplier, InvalidParametersRejected) {
    const GridSpec g = line(-1, 1, 65);
    EXPECT_THROW(apply(MultiplierSpec::regularizer(-1.0), pulse(g, 0.1)), ConfigError);
    EXPECT_THROW(apply(MultiplierSpec::gaussian_weight(0.0, 1.0), pulse(g, 0.1)), ConfigError);
}

TEST(Multiplier, WideSupportRejected) {
    const GridSpec g = line(-1, 1, 65);
    EXPECT_THROW(apply(MultiplierSpec::lowpass(2.0), ScalarField(g, 1.0)), SupportTooWide);
    EXPECT_THROW(conjugation_residual(ScalarField(g, 1.0), 0.5, 1.0), SupportTooWide);
}

TEST(Conjugation, ResidualConvergesAtSecondOrder) {
    std::vector<double> r;
    for (int nt : {129, 257, 513}) {
        GridSpec g = line(-2, 2, nt, 5);
        r.push_back(conjugation_residual(pulse(g, 0.15), 0.5, 1.0));
    }
    EXPECT_GE(r[0] / r[1], 3.0);
    EXPECT_GE(r[1] / r[2], 3.0);
}

TEST(Profile, RegularizedProfileIsBoundedAndFlatNearZero) {
    for (double lambda : {4.0, 64.0, 1024.0}) {
        if (lambda >= 64) EXPECT_NEAR(regularized_profile(0.0, lambda), 1.0, 1e-5);
        for (double s = -3; s <= 3; s += 0.05) {
            EXPECT_GE(regularized_profile(s, lambda), -1e-12);
            EXPECT_LE(regularized_profile(s, lambda), 1.0 + 1e-12);
        }
    }
    EXPECT_NEAR(regularized_profile(2.5, 1024.0), 0.0, 1e-10);
}

TEST(BoundProbe, AlmostLocalityRate) {
    const auto p = default_probe_instance(LemmaId::A2);
    const auto rep = bound_probe(LemmaId::A2, p);
    ASSERT_TRUE(rep.expected_rate);
    EXPECT_NEAR(*rep.expected_rate, 0.25, 1e-15);
    EXPECT_LE(std::abs(rep.fitted_rate - 0.25) / 0.25, 0.15);
    EXPECT_TRUE(rep.pass);
}

TEST(BoundProbe, ExponentialWeightBoundUniformInTau) {
    const auto p = default_probe_instance(LemmaId::LL2_13);
    const auto rep = bound_probe(LemmaId::LL2_13, p);
    EXPECT_TRUE(rep.pass);
    // LHS/(e^{Dτ}e^{τ²/λ}) stays bounded over the sweep
    double worst = 0.0;
    for (std::size_t k = 0; k < rep.sweep.size(); ++k)
        worst = std::max(worst, rep.lhs_values[k] / std::exp(rep.sweep[k] * rep.sweep[k] / p.lambda));
    EXPECT_LT(worst, 1.0);
}

TEST(BoundProbe, ZeroFieldGivesZeroLhsForEveryLemma) {
    for (auto id : {LemmaId::A2, LemmaId::LL2_3, LemmaId::LL2_4, LemmaId::LL2_10, LemmaId::LL2_11,
                    LemmaId::LL2_13, LemmaId::LL2_14}) {
        auto p = default_probe_instance(id, 513, 9);
        p.u = ScalarField(p.u.grid);
        const auto rep = bound_probe(id, p);
        for (double v : rep.lhs_values) EXPECT_EQ(v, 0.0) << to_string(id);
        EXPECT_TRUE(rep.pass);
    }
}

TEST(BoundProbe, ShortSweepRejected) {
    auto p = default_probe_instance(LemmaId::A2, 513, 9);
    p.sweep = {8, 16, 32};
    EXPECT_THROW(bound_probe(LemmaId::A2, p), InsufficientSweep);
}
