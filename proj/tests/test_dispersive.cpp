#include <gtest/gtest.h>

#include "capwave/dispersive.hpp"
#include "capwave/evolution.hpp"
#include "oracles.hpp"

using namespace capwave;

namespace {

std::vector<double> rho_grid(double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(1e-3 + (hi - 1e-3) * i / (n - 1));
    return v;
}

// Gaussian e^{-|x|^2/2} and its Laplacian, transforms 2 pi e^{-rho^2/2} and -rho^2 2 pi e^{-rho^2/2}.
RadialProfile laplacian_gaussian_profile() {
    return RadialProfile::analytic(
        "lap_gauss", [](double r) { return cplx(-2.0 * pi * r * r * std::exp(-0.5 * r * r)); },
        [](double r) { return cplx(-2.0 * pi * (2.0 * r - r * r * r) * std::exp(-0.5 * r * r)); }, 40.0);
}

} // namespace

TEST(Bessel, AgreesWithMultiprecisionSeries) {
    double worst = 0.0;
    for (int m = 0; m <= 20; ++m)
        for (double s = 0.0; s <= 100.0; s += 0.37) worst = std::max(worst, std::abs(bessel_j_std(m, s) - oracle::bessel_series(m, s)));
    EXPECT_LE(worst, 1e-10);
    EXPECT_NEAR(bessel_j_std(-3, 2.5), -oracle::bessel_series(3, 2.5), 1e-14);
    EXPECT_THROW(bessel_j_std(1, -1.0), PreconditionError);
}

TEST(Bessel, CircleNormalization) {
    EXPECT_NEAR(std::abs(bessel_j(0, 0.0) - cplx(2.0 * pi)), 0.0, 1e-15);
    // trapezoid rule on the circle is spectrally accurate for this periodic integrand
    for (int m : {0, 1, 3, -2})
        for (double s : {0.5, 4.0, 12.0}) {
            const int n = 256;
            cplx acc = 0.0;
            for (int k = 0; k < n; ++k) {
                const double th = 2.0 * pi * k / n;
                acc += std::polar(1.0, s * std::cos(th) + m * th);
            }
            acc *= 2.0 * pi / n;
            EXPECT_LE(std::abs(acc - bessel_j(m, s)), 1e-12) << m << " " << s;
        }
}

TEST(Bessel, EnvelopeConstant) {
    const BesselEnvelope e = bessel_envelope(20, 1000.0);
    EXPECT_NEAR(e.constant, 2.0 * pi, 1e-12);
    EXPECT_EQ(e.argmax_m, 0);
    EXPECT_EQ(e.argmax_s, 0.0);
    EXPECT_THROW(bessel_envelope(-1, 10.0), PreconditionError);
}

TEST(Quadrature, AnalyticIntegrals) {
    auto r1 = integrate_panels([](double x) { return cplx(std::sin(x)); }, {0.0, pi});
    EXPECT_TRUE(r1.converged);
    EXPECT_NEAR(r1.value.real(), 2.0, 1e-13);
    // integrable endpoint singularity, graded breakpoints
    auto r2 = integrate_panels([](double x) { return cplx(1.0 / std::sqrt(x)); }, {0.0, 1e-8, 1e-4, 1e-2, 1.0});
    EXPECT_NEAR(r2.value.real(), 2.0, 1e-8);
    // Fresnel-type oscillation: int_0^inf e^{i x^2} dx = sqrt(pi)/2 e^{i pi/4}; truncate at 60 and add the tail
    auto r3 = integrate_panels([](double x) { return std::polar(1.0, x * x); }, {0.0, 60.0}, {1e-13, 1e-12, 20000});
    const cplx tail = cplx(0.0, 1.0) * std::polar(1.0, 3600.0) / 120.0;  // -e^{iX^2}/(2iX) leading term
    EXPECT_LE(std::abs(r3.value + tail - std::sqrt(pi) / 2.0 * std::polar(1.0, pi / 4)), 1e-5);
    auto r4 = integrate_panels([](double x) { return cplx(std::sin(1.0 / x)); }, {1e-6, 1.0}, {1e-15, 1e-15, 8});
    EXPECT_FALSE(r4.converged);
}

TEST(Harmonics, RadialDataHasOnlyMZero) {
    const auto fhat = [](Vec2 x) { return cplx(2.0 * pi * std::exp(-0.5 * dot(x, x))); };
    const HarmonicDecomposition d = circular_harmonics(fhat, 3, rho_grid(12.0, 200));
    for (const auto& [m, p] : d.profiles)
        for (double r : {0.3, 1.0, 2.5}) {
            const double expect = m == 0 ? 2.0 * pi * std::exp(-0.5 * r * r) : 0.0;
            // between nodes the tabulated profile is interpolated; spacing 0.06 bounds the error near 1e-6
            EXPECT_NEAR(std::abs(p(r) - expect), 0.0, 1e-6) << "m = " << m;
        }
    const auto& p0 = d.profiles.at(0);
    EXPECT_NEAR(p0.derivative(1.0).real(), -2.0 * pi * std::exp(-0.5), 1e-4);
}

TEST(Harmonics, AngularFactorShiftsHarmonic) {
    const auto fhat = [](Vec2 x) {
        const double r = norm(x);
        return r == 0.0 ? cplx(0.0) : cplx(x[0], x[1]) / r * std::exp(-0.5 * r * r);
    };
    const HarmonicDecomposition d = circular_harmonics(fhat, 2, rho_grid(12.0, 200));
    EXPECT_NEAR(std::abs(d.profiles.at(1)(1.2)), std::exp(-0.72), 1e-7);
    EXPECT_LE(std::abs(d.profiles.at(0)(1.2)), 1e-12);
    EXPECT_LE(std::abs(d.profiles.at(-1)(1.2)), 1e-12);
    // a twelve-fold pattern cannot fit in m_max = 2
    const auto rough = [](Vec2 x) { return cplx(std::cos(12.0 * std::atan2(x[1], x[0])) * std::exp(-dot(x, x))); };
    EXPECT_THROW(circular_harmonics(rough, 2, rho_grid(6.0, 40)), NumericalError);
}

TEST(Harmonics, PlancherelEnergy) {
    // ||e^{-|x|^2/2}||^2 = pi, ||e^{-|x|^2/8}||^2 = 4 pi
    EXPECT_NEAR(plancherel_energy(radial_decomposition(gaussian_profile(1.0))), pi, 1e-9);
    EXPECT_NEAR(plancherel_energy(radial_decomposition(gaussian_profile(2.0))), 4.0 * pi, 1e-8);
}

TEST(Propagation, InitialValuesAndRadialBreaks) {
    const HarmonicDecomposition d = radial_decomposition(gaussian_profile(1.0));
    EXPECT_NEAR(std::abs(propagate_point(d, 0.0, 0.0, 0.0).value - 1.0), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(propagate_point(d, 0.0, 1.3, 0.7).value - std::exp(-0.845)), 0.0, 1e-10);
    const auto b = radial_breaks(3.0, 7.0, 0.0, 40.0);
    EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
    EXPECT_EQ(b.front(), 0.0);
    EXPECT_EQ(b.back(), 40.0);
    EXPECT_THROW(propagate_point(d, -1.0, 0.0, 0.0), PreconditionError);
}

TEST(Propagation, AgreesWithGridPropagator) {
    // Two independent paths for e^{i t Lambda^{3/2}}: the Hankel-type quadrature and the periodic FFT
    // propagator. The data's transform vanishes at the origin so the rough symbol leaves only short tails.
    const GridSpec g(128, 40.0);
    const SpectralField u = sample(g, [](double x, double y) {
        const double r2 = x * x + y * y;
        return (r2 - 2.0) * std::exp(-0.5 * r2);
    });
    const double t = 1.0;
    const CVec grid = to_physical(profile(u, t));
    const HarmonicDecomposition d = radial_decomposition(laplacian_gaussian_profile());
    double worst = 0.0;
    for (int a : {64, 66, 70, 75, 80, 90})
        for (int b : {64, 67, 72}) {
            const double x = g.coord(a), y = g.coord(b);
            const cplx q = propagate_point(d, t, std::hypot(x, y), std::atan2(y, x)).value;
            worst = std::max(worst, std::abs(q - grid[g.idx(a, b)]));
        }
    EXPECT_LE(worst, 1e-6);
}

TEST(Propagation, GridDerivedHarmonicsMatchAnalyticTransform) {
    const GridSpec g(64, 20.0);
    const SpectralField f = sample(g, [](double x, double y) { return std::exp(-0.5 * (x * x + y * y)); });
    const HarmonicDecomposition d = circular_harmonics(f, 2, rho_grid(6.0, 60));
    EXPECT_NEAR(std::abs(d.profiles.at(0)(1.5) - 2.0 * pi * std::exp(-1.125)), 0.0, 1e-5);
    EXPECT_LT(d.horizon, std::numeric_limits<double>::infinity());
    EXPECT_THROW(propagate_point(d, 2.0 * d.horizon, 0.0, 0.0), PreconditionError);
}

TEST(Propagation, UnitaryOnALargeDisc) {
    const HarmonicDecomposition d = radial_decomposition(gaussian_profile(1.0));
    const double e0 = plancherel_energy(d);
    const double t = 2.0;
    EXPECT_NEAR(disc_energy(d, t, 2.5 * t + 12.0) / e0, 1.0, 1e-2);
}

TEST(WeightedNorm, RadialDataSkipsRotationTerms) {
    // For m = 0 only the Omega^0 terms survive, and Sigma^0 + Sigma^1 with iota = 0 scales under dilation:
    // f(x / w) has norm w^{3/2 - beta} times that of f.
    for (double beta : {0.0, 0.25, 0.5}) {
        const double n1 = weighted_rhs_norm(radial_decomposition(gaussian_profile(1.0)), beta, 0.0);
        const double n2 = weighted_rhs_norm(radial_decomposition(gaussian_profile(2.0)), beta, 0.0);
        EXPECT_NEAR(n2 / n1, std::pow(2.0, 1.5 - beta), 1e-8) << beta;
    }
    EXPECT_THROW(weighted_rhs_norm(radial_decomposition(gaussian_profile(1.0)), 0.0, -0.1), PreconditionError);
}

TEST(WeightedNorm, AgreesWithGridComputation) {
    // f = Laplacian of e^{-|x|^2/2}; at beta = 1/2 the norm is ||Y f|| + ||Y Sigma f||.
    const GridSpec g(128, 30.0);
    const SpectralField f = sample(g, [](double x, double y) {
        const double r2 = x * x + y * y;
        return (r2 - 2.0) * std::exp(-0.5 * r2);
    });
    const double grid = l2_norm(apply_Y(f)) + l2_norm(apply_Y(apply_vector_field(f, VectorField::Sigma)));
    const double polar = weighted_rhs_norm(radial_decomposition(laplacian_gaussian_profile()), 0.5);
    EXPECT_NEAR(polar / grid, 1.0, 1e-6);
}

TEST(WeightedNorm, SigmaHatDuality) {
    // Sigma f^ = -(rho d_rho + 2) f^: for the Gaussian, Sigma f = -|x|^2 e^{-|x|^2/2}, whose transform is
    // 2 pi (rho^2 - 2) e^{-rho^2/2}; check through the grid.
    const GridSpec g(128, 30.0);
    const SpectralField f = sample(g, [](double x, double y) { return std::exp(-0.5 * (x * x + y * y)); });
    const SpectralField sf = apply_vector_field(f, VectorField::Sigma);
    const auto ft = grid_fourier_transform(sf);
    for (double r : {0.0, 0.7, 1.9}) {
        const auto p = gaussian_profile(1.0);
        const cplx expect = -(r * p.derivative(r) + 2.0 * p(r));
        EXPECT_NEAR(std::abs(ft({r, 0.0}) - expect), 0.0, 1e-9) << r;
    }
}

TEST(Hardy, BoundHoldsAndIsScaleFreeAtZeroEpsilon) {
    const auto expo = RadialProfile::analytic(
        "exp", [](double r) { return cplx(std::exp(-r)); }, [](double r) { return cplx(-std::exp(-r)); }, 60.0);
    const HardyResult h = hardy_bound_check(expo);
    EXPECT_LE(h.ratio, hardy_constant(0.05));
    EXPECT_GT(h.ratio, 0.0);
    EXPECT_NEAR(hardy_constant(0.05), std::sqrt(2.0 / 0.99 / (2.0 * pi)), 1e-15);
    // with eps = 0 the weight is rho^{1/2} and the ratio is invariant under rho -> lambda rho
    const auto scaled = RadialProfile::analytic(
        "exp3", [](double r) { return cplx(std::exp(-3.0 * r)); }, [](double r) { return cplx(-3.0 * std::exp(-3.0 * r)); },
        20.0);
    EXPECT_NEAR(hardy_bound_check(expo, 0.0).ratio, hardy_bound_check(scaled, 0.0).ratio, 1e-6);
}

TEST(Hardy, FamilyStaysBelowConstant) {
    // Plateaus e^{-(rho/c)^k} sharpen as k grows; none may exceed the constant.
    double prev = 0.0;
    int decreasing = 0;
    for (int i = 0; i < 20; ++i) {
        const double k = 1.0 + 0.5 * i;
        const auto p = RadialProfile::analytic(
            "plateau", [k](double r) { return cplx(std::exp(-std::pow(r, k))); },
            [k](double r) { return r > 0.0 ? cplx(-k * std::pow(r, k - 1.0) * std::exp(-std::pow(r, k))) : cplx(0.0); },
            40.0);
        const double v = hardy_bound_check(p).ratio;
        EXPECT_LE(v, hardy_constant(0.05)) << "k = " << k;
        if (i > 0 && v < prev) ++decreasing;
        prev = v;
    }
    EXPECT_GE(decreasing, 15);
}

TEST(PhaseRegimes, ComparatorsWithinFixedFactors) {
    for (double R : {0.5, 3.0}) {
        const auto rows = phi_regime_table(R);
        ASSERT_EQ(rows.size(), 3u);
        for (const auto& row : rows) {
            EXPECT_GT(row.samples, 100);
            EXPECT_GE(row.min_ratio, 1.0 / 20.0) << row.regime;
            EXPECT_LE(row.max_ratio, 20.0) << row.regime;
            EXPECT_GE(row.min_dratio, 1.0 / 20.0) << row.regime;
            EXPECT_LE(row.max_dratio, 20.0) << row.regime;
        }
    }
    EXPECT_THROW(phi_regime_table(0.0), PreconditionError);
}

TEST(Decay, GaussianDecaysLikeInverseTime) {
    RScan scan;
    scan.points = 80;
    const DecayReport r = sup_norm_decay(radial_decomposition(gaussian_profile(1.0)), {2.0, 8.0, 32.0}, 0.0, scan);
    EXPECT_NEAR(r.fitted_exponent, -1.0, 0.1);
    EXPECT_GT(r.rhs_norm, 0.0);
    EXPECT_EQ(r.ratios.size(), 3u);
    EXPECT_THROW(sup_norm_decay(radial_decomposition(gaussian_profile(1.0)), {1.0}, 0.0), PreconditionError);
}
