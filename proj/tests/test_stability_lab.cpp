#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "carleman_lab/fitting.hpp"
#include "carleman_lab/stability_lab.hpp"

using namespace carleman_lab;

namespace {

const std::vector<double> kDeltas{0.3, 0.2, 0.1};

std::vector<Member> ensemble(EnsembleSpec::Recipe r, int members, std::uint64_t seed, double radius = 1.0) {
    GeometryConfig cfg;
    EnsembleSpec s;
    s.recipe = r;
    s.members = members;
    s.seed = seed;
    s.support_radius = radius;
    s.grid = diamond_grid(cfg, 129, 385);
    return manufacture_solutions(s);
}

GridSpec local_grid() {
    GridSpec g;
    g.t_min = -5;
    g.t_max = 5;
    g.x_min = 2;
    g.x_max = 3;
    g.nt = 641;
    g.nx = 257;
    return g;
}

ScalarField local_bump(const GridSpec& g, double scale = 1.0) {
    return ScalarField::sample(g, [scale](double t, double x) {
        return scale * detail::compact_bump(t / 0.25) * detail::compact_bump((x - 2.5) / 0.3);
    });
}

} // namespace

TEST(Stability, ZeroFieldIsTrivial) {
    GeometryConfig cfg;
    const ScalarField z(diamond_grid(cfg, 65, 193));
    const auto r = stability_functional(z, z, 0.2, 1.0, cfg);
    EXPECT_EQ(r.ratio, 0.0);
    EXPECT_TRUE(r.pass);
    EXPECT_FALSE(r.degenerate);
}

TEST(Stability, PlaneWavesPassWithMonotoneSupRatio) {
    GeometryConfig cfg;
    std::vector<double> sup(kDeltas.size(), 0.0);
    for (const auto& m : ensemble(EnsembleSpec::Recipe::PlaneWave, 4, 3)) {
        const auto reps = stability_sweep(m.u, m.f, kDeltas, 1.0, cfg);
        for (std::size_t k = 0; k < reps.size(); ++k) {
            EXPECT_TRUE(reps[k].pass);
            EXPECT_GT(reps[k].ratio, 0.0);
            EXPECT_LE(std::log(reps[k].ratio), reps[k].budget);
            sup[k] = std::max(sup[k], reps[k].ratio);
        }
    }
    for (std::size_t k = 1; k < sup.size(); ++k) EXPECT_GE(sup[k], sup[k - 1]);
}

TEST(Stability, SweepAgreesWithSingleEvaluation) {
    GeometryConfig cfg;
    const auto m = ensemble(EnsembleSpec::Recipe::GaussianBeam, 1, 4).front();
    const auto reps = stability_sweep(m.u, m.f, kDeltas, 2.0, cfg, LevelParam::Lin);
    for (std::size_t k = 0; k < kDeltas.size(); ++k) {
        const auto r = stability_functional(m.u, m.f, kDeltas[k], 2.0, cfg, LevelParam::Lin);
        EXPECT_EQ(r.ratio, reps[k].ratio);
        EXPECT_EQ(r.level, "level-lin");
        EXPECT_NEAR(r.budget, 2.0 * std::log(1.0 / kDeltas[k]) / std::pow(kDeltas[k], 4), 1e-9 * r.budget);
    }
}

TEST(Stability, RatioDecreasesAsObservationGrows) {
    detail::StabilityNorms s{0.0, 3.0, 0.0};
    double prev = std::numeric_limits<double>::infinity();
    for (double obs : {1e-4, 1e-2, 0.5, 2.0, 40.0}) {
        s.obs = obs;
        const auto r = detail::assemble(0.2, 1.0, s, 10.0);
        EXPECT_LT(r.ratio, prev);
        EXPECT_NEAR(r.ratio, std::log1p(3.0 / obs) / 3.0, 1e-15);
        prev = r.ratio;
    }
}

TEST(Stability, NoObservationIsDegenerate) {
    const auto r = detail::assemble(0.2, 1.0, {0.0, 3.0, 0.0}, 10.0);
    EXPECT_TRUE(r.degenerate);
    EXPECT_FALSE(r.pass);
    EXPECT_TRUE(std::isinf(r.ratio));
}

TEST(Stability, GridMismatchRejected) {
    GeometryConfig cfg;
    const ScalarField a(diamond_grid(cfg, 65, 193)), b(diamond_grid(cfg, 65, 195));
    EXPECT_THROW(stability_functional(a, b, 0.2, 1.0, cfg), ConfigError);
}

TEST(Loglog, StripNormsBoundedBySupTimesMeasure) {
    GeometryConfig cfg;
    const auto m = ensemble(EnsembleSpec::Recipe::RandomBandLimited, 1, 9).front();
    const std::vector<double> ds{0.4, 0.3, 0.2, 0.1};
    const auto r = loglog_bound(m.u, m.f, ds, cfg);
    double sup = 0.0;
    for (double v : m.u.v) sup = std::max(sup, std::abs(v));
    for (std::size_t k = 0; k < ds.size(); ++k) {
        EXPECT_GT(r.strip_norms[k], 0.0);
        EXPECT_LE(r.strip_norms[k], 1.05 * sup * std::sqrt(r.strip_measures[k]));
    }
    EXPECT_GE(r.strip_norm_exponent, 0.5 * r.strip_measure_exponent - 0.05);
    EXPECT_TRUE(r.heuristic);
    EXPECT_GT(r.denominator, 0.0);
    EXPECT_NEAR(r.witnessed_C, r.lhs * r.denominator / r.total, 1e-15 * r.witnessed_C);
}

TEST(Loglog, ZeroFieldHasZeroStrips) {
    GeometryConfig cfg;
    const ScalarField z(diamond_grid(cfg, 65, 193));
    const auto r = loglog_bound(z, z, {0.3, 0.2}, cfg);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.witnessed_C, 0.0);
    for (double v : r.strip_norms) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(r.strip_norm_exponent, 0.0);
}

TEST(UcProbe, EmptyEnsembleGivesZero) {
    GeometryConfig cfg;
    EnsembleSpec s;
    s.recipe = EnsembleSpec::Recipe::VanishingOnBall;
    s.members = 0;
    s.grid = diamond_grid(cfg, 65, 193);
    EXPECT_EQ(qualitative_uc_probe(s, kDeltas, cfg).value, 0.0);
}

TEST(UcProbe, FarFamilyVanishesAndGapShrinkageIsMonotone) {
    GeometryConfig cfg;
    std::vector<double> vals;
    for (double rho : {1.6, 1.5, 1.4, 1.2}) {
        EnsembleSpec s;
        s.recipe = EnsembleSpec::Recipe::VanishingOnBall;
        s.members = 4;
        s.seed = 21;
        s.support_radius = rho * cfg.R();
        s.grid = diamond_grid(cfg, 129, 385);
        vals.push_back(qualitative_uc_probe(s, kDeltas, cfg).value);
    }
    EXPECT_LE(vals.front(), 1e-6);
    for (std::size_t k = 1; k < vals.size(); ++k) EXPECT_GE(vals[k], vals[k - 1]);
    EXPECT_GT(vals.back(), 1e-3);
}

TEST(LocalQuant, ZeroFieldIsVacuous) {
    GeometryConfig cfg;
    const ScalarField z(local_grid());
    const auto r = local_quantitative_probe(z, 0.5, 0.5, 1.0, {10.0, 20.0}, cfg);
    EXPECT_TRUE(r.vacuous);
    EXPECT_EQ(r.witnessed_coefficient, 0.0);
    ASSERT_EQ(r.admissible.size(), 2u);
}

TEST(LocalQuant, RefinementStableAndDecreasingInKappa) {
    GeometryConfig cfg;
    const std::vector<double> mus{10.0, 20.0, 40.0};
    const GridSpec g0 = local_grid(), g1 = g0.refined();
    const auto u0 = local_bump(g0), u1 = local_bump(g1);
    double prev = std::numeric_limits<double>::infinity();
    for (double ka : {0.5, 0.8}) {
        const double c0 = local_quantitative_probe(u0, ka, 0.5, 1.0, mus, cfg).witnessed_coefficient;
        const double c1 = local_quantitative_probe(u1, ka, 0.5, 1.0, mus, cfg).witnessed_coefficient;
        EXPECT_TRUE(std::isfinite(c0));
        EXPECT_GT(c0, 0.0);
        EXPECT_LE(relative_drift(c0, c1), 0.30);
        EXPECT_LT(c0, prev);
        prev = c0;
    }
}

TEST(LocalQuant, HomogeneousOfDegreeZero) {
    GeometryConfig cfg;
    const GridSpec g = local_grid();
    const auto a = local_quantitative_probe(local_bump(g), 0.6, 0.5, 1.0, {20.0}, cfg);
    const auto b = local_quantitative_probe(local_bump(g, 7.0), 0.6, 0.5, 1.0, {20.0}, cfg);
    EXPECT_NEAR(a.witnessed_coefficient, b.witnessed_coefficient, 1e-12 * a.witnessed_coefficient);
}

TEST(LocalQuant, StepParametersFollowTheLedger) {
    GeometryConfig cfg;
    LocalQuantOptions opt;
    const auto r = local_quantitative_probe(local_bump(local_grid()), 0.5, 0.5, 1.0, {10.0}, cfg, opt);
    EXPECT_DOUBLE_EQ(r.zeta, opt.a_frak * opt.delta * opt.delta / 16.0);
    // β = min(1, κ, α)·δ^N with unit coefficients
    EXPECT_NEAR(r.beta, 0.5 * opt.delta, 1e-15);
    EXPECT_NEAR(r.mu0, 1.0 / (std::pow(opt.delta, 8) * r.beta), 1e-9 * r.mu0);
    EXPECT_FALSE(r.admissible[0]);
}

TEST(LocalQuant, SupportAndParameterGuards) {
    GeometryConfig cfg;
    GridSpec g = local_grid();
    g.x_min = 0.5;
    const auto u = ScalarField::sample(g, [](double t, double x) {
        return detail::compact_bump(t / 0.25) * detail::compact_bump((x - 0.8) / 0.2);
    });
    EXPECT_THROW(local_quantitative_probe(u, 0.5, 0.5, 1.0, {10.0}, cfg), SupportViolation);
    const auto v = local_bump(local_grid());
    EXPECT_THROW(local_quantitative_probe(v, 0.5, 0.5, 1.0, {}, cfg), ConfigError);
    EXPECT_THROW(local_quantitative_probe(v, 0.0, 0.5, 1.0, {10.0}, cfg), PreconditionViolated);
    EXPECT_THROW(local_quantitative_probe(v, 0.5, 0.5, 1.0, {-1.0}, cfg), ConfigError);
}
