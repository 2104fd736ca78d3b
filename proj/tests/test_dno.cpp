#include <gtest/gtest.h>

#include <random>

#include "capwave/dno.hpp"
#include "capwave/dno_oracle.hpp"

using namespace capwave;

namespace {

const GridSpec box(32, 2.0 * pi);

SpectralField trig(double a, int k1, int k2, double phase = 0.0) {
    return sample(box, [&](double x, double y) { return a * std::cos(k1 * x + k2 * y + phase); });
}

double rel(const SpectralField& a, const SpectralField& b) { return l2_norm(a - b) / l2_norm(b); }

// Low-mode surfaces and potentials: every product below stays inside the dealiased band.
SpectralField low_h() { return trig(0.12, 1, 0) + trig(0.05, 1, 1, 0.3); }
SpectralField low_f() { return trig(1.0, 0, 2) + trig(0.4, 1, -1, 0.7); }

} // namespace

TEST(DnoSeries, FlatSurfaceIsLambda) {
    const SpectralField f = low_f();
    const SpectralField h = SpectralField::zeros(box);
    for (int order = 0; order <= 4; ++order) EXPECT_LE(rel(dno_series(h, f, order), lambda_pow(f, 1.0)), 1e-15);
}

TEST(DnoSeries, FirstTermOnSingleModes) {
    // h = a cos x1, f = cos 2 x2: -div(h grad f) = 4 a cos x1 cos 2x2 and Lambda(h Lambda f) = 2 sqrt 5 a (same).
    const double a = 0.1;
    const SpectralField h = trig(a, 1, 0), f = trig(1.0, 0, 2);
    const SpectralField expect =
        sample(box, [&](double x, double y) { return (4.0 - 2.0 * std::sqrt(5.0)) * a * std::cos(x) * std::cos(2 * y); });
    EXPECT_LE(rel(dno_term(h, f, 1), expect), 1e-13);
}

TEST(DnoSeries, SecondTermMatchesSymmetrizedFormula) {
    // G_2 = -1/2 (Lambda^2 h^2 Lambda + Lambda h^2 Lambda^2 - 2 Lambda h Lambda h Lambda)
    const SpectralField h = low_h(), f = low_f();
    auto L = [](const SpectralField& u, double p = 1.0) { return lambda_pow(u, p); };
    const SpectralField h2 = multiply(h, h);
    SpectralField expect = L(multiply(h2, L(f)), 2.0) + L(multiply(h2, L(f, 2.0))) - 2.0 * L(multiply(h, L(multiply(h, L(f)))));
    expect *= -0.5;
    EXPECT_LE(rel(dno_term(h, f, 2), expect), 1e-12);
}

TEST(DnoSeries, TermsAreHomogeneousInH) {
    const SpectralField h = low_h(), f = low_f();
    for (int n = 1; n <= 4; ++n) {
        SpectralField h3 = h;
        h3 *= 3.0;
        SpectralField expect = dno_term(h, f, n);
        expect *= std::pow(3.0, n);
        EXPECT_LE(rel(dno_term(h3, f, n), expect), 1e-12) << "n = " << n;
    }
}

TEST(DnoSeries, FusedLowOrderPathMatchesRecursion) {
    const GridSpec g(64, 10.0);
    std::mt19937_64 rng(2);
    const SpectralField h = 0.1 * random_bumps(g, rng, 3, 0.6, 1.2, 2.0);
    const SpectralField f = random_bumps(g, rng, 3, 0.6, 1.2, 2.0);
    for (int order = 0; order <= 2; ++order) {
        SpectralField rec = dno_term(h, f, 0);
        for (int n = 1; n <= order; ++n) rec += dno_term(h, f, n);
        EXPECT_LE(rel(dno_series(h, f, order), rec), 1e-12) << "order " << order;
    }
}

TEST(DnoSeries, SlopeGuardAndOrderRange) {
    const SpectralField f = low_f();
    EXPECT_THROW(dno_series(trig(0.8, 1, 0), f, 2), PreconditionError);
    EXPECT_THROW(dno_series(low_h(), f, 7), PreconditionError);
}

TEST(DnoSeries, TranslationRotationDilationCovariance) {
    const GridSpec g(64, 2.0 * pi);
    std::mt19937_64 rng(7);
    SpectralField h = random_bumps(g, rng, 3, 0.5, 0.9, 1.0);
    h *= 0.2 / max_slope(h);
    const SpectralField f = random_bumps(g, rng, 2, 0.5, 0.9, 1.0);
    for (int order : {1, 2, 3}) {
        EXPECT_LE(symmetry_check(h, f, {GridTransform::Translation, 3, -5, 1, 2}, order), 1e-12);
        for (int q = 1; q <= 3; ++q) EXPECT_LE(symmetry_check(h, f, {GridTransform::Rotation, 0, 0, q, 2}, order), 1e-12);
    }
    // Dilation needs data that survives the band restriction; coarse modes only.
    SpectralField hc(g, true), fc(g, true);
    hc.at(1, 0) = hc.at(-1, 0) = 0.025;
    hc.at(0, 2) = hc.at(0, -2) = cplx(0.0, 0.01);
    hc.at(0, -2) = cplx(0.0, -0.01);
    fc.at(1, 1) = fc.at(-1, -1) = 0.5;
    EXPECT_LE(symmetry_check(hc, fc, {GridTransform::Dilation, 0, 0, 1, 2}, 3), 1e-12);
    EXPECT_THROW(symmetry_check(h, f, {GridTransform::Rotation, 0, 0, 4, 2}, 2), PreconditionError);
}

TEST(DnoSeries, LeibnizRuleForVectorFields) {
    // Translations commute with the series exactly. For Omega and Sigma the periodic box clips the
    // |x|^-3 tails that Lambda attaches to localized data, so the residual must fall like L^-2.
    double prev_omega = 0.0, prev_sigma = 0.0;
    for (auto [n, L] : {std::pair{128, 30.0}, std::pair{256, 60.0}}) {
        const GridSpec g(n, L);
        std::mt19937_64 rng(5);
        SpectralField h = random_bumps(g, rng, 2, 1.0, 1.6, 1.5);
        h *= 0.2 / max_slope(h);
        const SpectralField f = random_bumps(g, rng, 2, 1.0, 1.6, 1.5);
        EXPECT_LE(leibniz_gamma_check(h, f, VectorField::Partial1, 3), 1e-8);
        EXPECT_LE(leibniz_gamma_check(h, f, VectorField::Partial2, 3), 1e-8);
        const double om = leibniz_gamma_check(h, f, VectorField::Omega, 3);
        const double sg = leibniz_gamma_check(h, f, VectorField::Sigma, 3);
        EXPECT_LE(om, 1e-2);
        EXPECT_LE(sg, 1e-2);
        if (prev_omega > 0.0) {
            EXPECT_LT(om, prev_omega / 3.0);
            EXPECT_LT(sg, prev_sigma / 3.0);
        }
        prev_omega = om;
        prev_sigma = sg;
    }
}

TEST(DnoSeries, TangentMatchesFiniteDifference) {
    const SpectralField h = low_h(), f = low_f(), dir = trig(0.05, 2, 1, 0.2);
    const double s = 1e-5;
    const SpectralField fd = (1.0 / (2 * s)) * (dno_series(h + s * dir, f, 3) - dno_series(h - s * dir, f, 3));
    EXPECT_LE(rel(dno_series_tangent(h, dir, f, 3), fd), 1e-7);
}

TEST(DnoSeries, MultilinearBoundIsModest) {
    const GridSpec g(64, 2.0 * pi);
    for (int n = 1; n <= 3; ++n) {
        const double c = multilinear_bound_probe(g, n, 4, 10 + n);
        EXPECT_TRUE(std::isfinite(c));
        EXPECT_LT(c, 50.0) << "n = " << n;
    }
}

TEST(DnoOracle, AgreesWithSeriesOnGentleSurface) {
    DnoConfig cfg;
    cfg.richardson_levels = 1;
    const SpectralField h = gaussian_with_slope(box, 0.05, 1.0);
    const SpectralField f = dealias(sample(box, [](double x, double y) { return std::exp(-(x * x + y * y) / 0.64); }));
    OracleReport rep;
    const SpectralField ref = dno_oracle(h, f, cfg, &rep);
    EXPECT_LE(rep.residual, 1e-10);
    const double e0 = rel(dno_series(h, f, 0), ref), e1 = rel(dno_series(h, f, 1), ref), e2 = rel(dno_series(h, f, 2), ref);
    EXPECT_LT(e1, 0.2 * e0);
    EXPECT_LT(e2, 0.2 * e1);
    EXPECT_LT(e2, 1e-4);
}

TEST(DnoOracle, FlatSurfaceReproducesLambda) {
    DnoConfig cfg;
    cfg.richardson_levels = 1;
    const SpectralField f = low_f();
    EXPECT_LE(rel(dno_oracle(SpectralField::zeros(box), f, cfg), lambda_pow(f, 1.0)), 1e-8);
}

TEST(DnoOracle, RejectsShallowDomain) {
    DnoConfig cfg;
    cfg.oracle_depth = 1.0;
    EXPECT_THROW(dno_oracle(low_h(), low_f(), cfg), ConfigError);
}

TEST(Surface, CurvatureOfCosineProfile) {
    // kappa = h'' / (2 (1 + h'^2)^{3/2}) for h = a cos x1
    const GridSpec g(128, 2.0 * pi);
    const double a = 0.3;
    const SpectralField h = sample(g, [&](double x, double) { return a * std::cos(x); });
    const SpectralField expect = sample(g, [&](double x, double) {
        const double d = -a * std::sin(x), dd = -a * std::cos(x);
        return 0.5 * dd / std::pow(1.0 + d * d, 1.5);
    });
    EXPECT_LE(rel(curvature(h), expect), 1e-12);
}

TEST(Surface, EnergyOfFlatSurfaceCosinePotential) {
    // int psi Lambda psi for psi = a cos x1 on the 2 pi box is a^2 (2 pi)^2 / 2.
    const double a = 0.7;
    const SurfaceState s{SpectralField::zeros(box), trig(a, 1, 0), 0.0};
    EXPECT_NEAR(physical_energy(s, 2), a * a * 4 * pi * pi / 2, 1e-12);
}
