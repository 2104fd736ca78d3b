#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "capwave/multiplier.hpp"
#include "capwave/vector_fields.hpp"

namespace capwave {

/// Surface elevation h and velocity-potential trace psi.
struct SurfaceState {
    SpectralField h;
    SpectralField psi;
    double time = 0.0;
};

struct DnoConfig {
    int series_order = 2;
    double oracle_depth = 10.0;
    int oracle_layers = 64;
    /// Geometric clustering of oracle layers toward the surface (0 = uniform).
    double oracle_stretch = 3.0;
    /// Number of layer doublings combined by Richardson extrapolation (0 = plain solve).
    int richardson_levels = 2;
    double solver_tol = 1e-13;
    int solver_max_iter = 400;

    void validate(const GridSpec& g) const {
        if (series_order < 0 || series_order > 6)
            throw ConfigError("dno: series_order must be in [0, 6], got " + std::to_string(series_order));
        if (oracle_layers < 16) throw ConfigError("dno: oracle_layers must be >= 16");
        if (oracle_depth < 3.0 * g.L / (2.0 * pi)) throw ConfigError("dno: oracle_depth must be >= 3 L / (2 pi)");
        if (richardson_levels < 0 || richardson_levels > 4) throw ConfigError("dno: richardson_levels in [0, 4]");
    }
};

inline constexpr double slope_guard = 0.5;

inline double max_slope(const RVec& h1, const RVec& h2) {
    double m = 0.0;
    for (std::size_t i = 0; i < h1.size(); ++i) m = std::max(m, h1[i] * h1[i] + h2[i] * h2[i]);
    return std::sqrt(m);
}

/// max |grad h| on the grid.
inline double max_slope(const SpectralField& h) {
    const RVec a = to_physical_real(partial(h, 0)), b = to_physical_real(partial(h, 1));
    return max_slope(a, b);
}

inline void require_slope_value(double s, const char* who) {
    if (!(s < slope_guard))
        throw PreconditionError(std::string(who) + ": max |grad h| = " + std::to_string(s) + " exceeds 0.5");
}

inline void require_slope(const SpectralField& h, const char* who) { require_slope_value(max_slope(h), who); }

namespace detail {

/// Holds the physical samples of h (and optionally a direction g) for the series recursion.
class SeriesEvaluator {
public:
    explicit SeriesEvaluator(const SpectralField& h) : grid_(h.grid()), h_(to_physical_real(h)) {}
    SeriesEvaluator(const SpectralField& h, const SpectralField& g)
        : grid_(h.grid()), h_(to_physical_real(h)), g_(to_physical_real(g)) {}

    /// G_n(h) f from
    ///   G_0 = Lambda,  G_n f = -div(A_n grad Lambda^{n-1} f) - sum_{m=1}^n G_{n-m}[A_m Lambda^m f],
    /// with A_m = h^m / m!. This is the order-by-order form of G(h)[e^{|D| h} e^{ik.x}] =
    /// (d_z - grad h . grad)(e^{|k| z + ik.x}) at z = h.
    SpectralField term(const SpectralField& f, int n) const {
        if (n == 0) return lambda_pow(f, 1.0);
        const RVec An = power_over_factorial(n, nullptr);
        SpectralField out = flux_divergence(An, lambda_pow_keep(f, n - 1));
        out *= -1.0;
        for (int m = 1; m <= n; ++m) out -= term(times(power_over_factorial(m, nullptr), lambda_pow(f, m)), n - m);
        return out;
    }

    /// d/ds G_n(h + s g) f at s = 0.
    SpectralField tangent(const SpectralField& f, int n) const {
        if (n == 0) return SpectralField::zeros(grid_, f.is_real());
        // d A_m = A_{m-1} g
        SpectralField out = flux_divergence(power_over_factorial(n - 1, &g_), lambda_pow_keep(f, n - 1));
        out *= -1.0;
        for (int m = 1; m <= n; ++m) {
            const SpectralField lm = lambda_pow(f, m);
            out -= tangent(times(power_over_factorial(m, nullptr), lm), n - m);
            out -= term(times(power_over_factorial(m - 1, &g_), lm), n - m);
        }
        return out;
    }

private:
    /// h^m / m!, optionally multiplied by the direction samples.
    RVec power_over_factorial(int m, const RVec* extra) const {
        while (static_cast<int>(powers_.size()) <= m) {
            const int k = static_cast<int>(powers_.size());
            RVec next(h_.size(), 1.0);
            if (k > 0)
                for (std::size_t i = 0; i < next.size(); ++i) next[i] = powers_[k - 1][i] * h_[i] / k;
            powers_.push_back(std::move(next));
        }
        if (!extra) return powers_[m];
        RVec a = powers_[m];
        for (std::size_t i = 0; i < a.size(); ++i) a[i] *= (*extra)[i];
        return a;
    }

    /// Lambda^p keeping the zero mode for p = 0 (identity).
    static SpectralField lambda_pow_keep(const SpectralField& f, int p) { return p == 0 ? f : lambda_pow(f, p); }

    SpectralField times(const RVec& a, const SpectralField& f) const {
        if (f.is_real()) {
            RVec v = to_physical_real(f);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] *= a[i];
            return from_physical_real(v, grid_);
        }
        CVec v = to_physical(f);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= a[i];
        if (f.is_real())
            for (auto& x : v) x = x.real();
        return dealias(forward_transform(std::span<const cplx>(v.data(), v.size()), grid_, f.is_real()));
    }

    /// div(a grad f).
    SpectralField flux_divergence(const RVec& a, const SpectralField& f) const {
        if (!f.is_real()) return divergence(times(a, partial(f, 0)), times(a, partial(f, 1)));
        auto [p1, p2] = to_physical_pair(partial(f, 0), partial(f, 1));
        for (std::size_t i = 0; i < p1.size(); ++i) {
            p1[i] *= a[i];
            p2[i] *= a[i];
        }
        auto [q1, q2] = forward_pair(p1, p2, grid_);
        return divergence(dealias(std::move(q1)), dealias(std::move(q2)));
    }

    GridSpec grid_;
    RVec h_;
    RVec g_;
    mutable std::vector<RVec> powers_;
};

} // namespace detail

/// The n-th homogeneous term G_n(h) f of the Dirichlet-Neumann series.
inline SpectralField dno_term(const SpectralField& h, const SpectralField& f, int n) {
    h.check_same(f);
    return detail::SeriesEvaluator(h).term(f, n);
}

/// n M_n(g, h, ..., h, f): derivative of G_n(h) f in the direction g.
inline SpectralField dno_term_tangent(const SpectralField& h, const SpectralField& g, const SpectralField& f, int n) {
    h.check_same(f);
    h.check_same(g);
    return detail::SeriesEvaluator(h, g).tangent(f, n);
}

namespace detail {

/// Series value plus the physical gradient of f, which callers usually need as well.
struct LowOrderSeries {
    SpectralField value;
    RVec f1, f2;
};

/// Orders 0..2 for real f with the transforms shared between terms. Expanding the recursion,
///   G_1 f = -div(h grad f) - Lambda w,  w = h Lambda f,
///   G_2 f = -div(h^2/2 grad Lambda f) + div(h grad w) + Lambda(h Lambda w) - Lambda(h^2/2 Lambda^2 f),
/// so all divergence terms and all Lambda terms can be collected before transforming back.
inline LowOrderSeries dno_series_low(const RVec& h, const SpectralField& f, int order) {
    const auto& g = f.grid();
    const auto& k = wavenumbers(g);
    const std::size_t N = g.size();
    auto d1 = [&](std::size_t i) { return cplx(0.0, k.d1[i]); };
    auto d2 = [&](std::size_t i) { return cplx(0.0, k.d2[i]); };
    auto lam = [&](std::size_t i) { return k.kabs[i]; };
    LowOrderSeries r{lambda_pow(f, 1.0), to_physical_real_with(f, d1), to_physical_real_with(f, d2)};
    if (order == 0) return r;
    const RVec lf = to_physical_real_with(f, lam);
    RVec w(N), v1(N), v2(N), sc(N);
    for (std::size_t i = 0; i < N; ++i) {
        w[i] = h[i] * lf[i];
        v1[i] = -h[i] * r.f1[i];
        v2[i] = -h[i] * r.f2[i];
        sc[i] = -w[i];
    }
    if (order >= 2) {
        const SpectralField wh = from_physical_real(w, g);
        const RVec l2 = to_physical_real_with(f, [&](std::size_t i) { return k.kabs[i] * k.kabs[i]; });
        const RVec g1 = to_physical_real_with(f, [&](std::size_t i) { return cplx(0.0, k.d1[i] * k.kabs[i]); });
        const RVec g2 = to_physical_real_with(f, [&](std::size_t i) { return cplx(0.0, k.d2[i] * k.kabs[i]); });
        const RVec w1 = to_physical_real_with(wh, d1), w2 = to_physical_real_with(wh, d2);
        const RVec lw = to_physical_real_with(wh, lam);
        for (std::size_t i = 0; i < N; ++i) {
            const double a2 = 0.5 * h[i] * h[i];
            v1[i] += h[i] * w1[i] - a2 * g1[i];
            v2[i] += h[i] * w2[i] - a2 * g2[i];
            sc[i] += h[i] * lw[i] - a2 * l2[i];
        }
    }
    r.value += forward_real_combined({&v1, &v2, &sc}, g, [&](std::size_t j, std::size_t i) {
        return j == 0 ? d1(i) : j == 1 ? d2(i) : cplx(lam(i));
    });
    return r;
}

inline SpectralField dno_series_unchecked(const SpectralField& h, const SpectralField& f, int order) {
    if (order <= 2 && f.is_real() && h.is_real()) return dno_series_low(to_physical_real(h), f, order).value;
    SeriesEvaluator ev(h);
    SpectralField out = ev.term(f, 0);
    for (int n = 1; n <= order; ++n) out += ev.term(f, n);
    return out;
}
} // namespace detail

/// G_0 + ... + G_order applied to f. Computes G(h) = sqrt(1 + |grad h|^2) N(h).
inline SpectralField dno_series(const SpectralField& h, const SpectralField& f, int order) {
    if (order < 0 || order > 6) throw PreconditionError("dno_series: order must be in [0, 6]");
    require_slope(h, "dno_series");
    h.check_same(f);
    return detail::dno_series_unchecked(h, f, order);
}

/// Directional derivative of the truncated series in h.
inline SpectralField dno_series_tangent(const SpectralField& h, const SpectralField& g, const SpectralField& f,
                                        int order) {
    detail::SeriesEvaluator ev(h, g);
    SpectralField out = SpectralField::zeros(h.grid(), f.is_real());
    for (int n = 1; n <= order; ++n) out += ev.tangent(f, n);
    return out;
}

/// kappa = 1/2 div(grad h / sqrt(1 + |grad h|^2)).
inline SpectralField curvature(const SpectralField& h) {
    auto [a, b] = to_physical_pair(partial(h, 0), partial(h, 1));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = 1.0 / std::sqrt(1.0 + a[i] * a[i] + b[i] * b[i]);
        a[i] *= s;
        b[i] *= s;
    }
    auto [fa, fb] = forward_pair(a, b, h.grid());
    SpectralField k = divergence(dealias(std::move(fa)), dealias(std::move(fb)));
    k *= 0.5;
    return k;
}

/// Derivative of curvature(h) in the direction dh.
inline SpectralField curvature_tangent(const SpectralField& h, const SpectralField& dh) {
    const auto& g = h.grid();
    const RVec a = to_physical_real(partial(h, 0)), b = to_physical_real(partial(h, 1));
    RVec da = to_physical_real(partial(dh, 0)), db = to_physical_real(partial(dh, 1));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double q = 1.0 + a[i] * a[i] + b[i] * b[i];
        const double s = 1.0 / std::sqrt(q);
        const double dot = (a[i] * da[i] + b[i] * db[i]) / q;
        da[i] = s * (da[i] - a[i] * dot);
        db[i] = s * (db[i] - b[i] * dot);
    }
    SpectralField k = divergence(from_physical_real(da, g), from_physical_real(db, g));
    k *= 0.5;
    return k;
}

/// int psi G(h) psi + c int (sqrt(1 + |grad h|^2) - 1); twice the conserved Hamiltonian.
inline double physical_energy(const SurfaceState& s, int order, double c_surface = 2.0) {
    const SpectralField gpsi = dno_series(s.h, s.psi, order);
    const double kinetic = inner(gpsi, s.psi).real();
    const RVec a = to_physical_real(partial(s.h, 0)), b = to_physical_real(partial(s.h, 1));
    double surface = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double q = a[i] * a[i] + b[i] * b[i];
        surface += q / (std::sqrt(1.0 + q) + 1.0);
    }
    return kinetic + c_surface * surface * s.h.grid().cell_area();
}

// ---------------------------------------------------------------------------
// Symmetries of the series

enum class GridTransform { Translation, Rotation, Dilation };

struct TransformSpec {
    GridTransform kind = GridTransform::Translation;
    int shift1 = 1, shift2 = 0;  // grid cells, for translations
    int quarter_turns = 1;       // 1, 2, 3 for rotations
    int lambda = 2;              // integer dilation factor
};

namespace detail {

/// f o T for grid-exact transforms, applied to coefficients.
inline SpectralField transform_field(const SpectralField& f, const TransformSpec& t) {
    const auto& g = f.grid();
    const auto& w = wavenumbers(g);
    SpectralField out(g, f.is_real());
    switch (t.kind) {
        case GridTransform::Translation: {
            const double d1 = t.shift1 * g.dx(), d2 = t.shift2 * g.dx();
            for (std::size_t i = 0; i < f.size(); ++i) {
                if (w.m1[i] == -g.n / 2 || w.m2[i] == -g.n / 2) continue;
                out[i] = f[i] * std::polar(1.0, w.k1[i] * d1 + w.k2[i] * d2);
            }
            return out;
        }
        case GridTransform::Rotation: {
            // f(R x) has coefficient c_m at R^T m; quarter turn: R^T (m1, m2) = (m2, -m1).
            for (std::size_t i = 0; i < f.size(); ++i) {
                int a = w.m1[i], b = w.m2[i];
                if (a == -g.n / 2 || b == -g.n / 2) {
                    if (std::abs(f[i]) > 0.0) throw PreconditionError("symmetry_check: Nyquist content cannot rotate");
                    continue;
                }
                for (int q = 0; q < t.quarter_turns; ++q) std::tie(a, b) = std::pair(b, -a);
                out.at(a, b) = f[i];
            }
            return out;
        }
        case GridTransform::Dilation: {
            // transform round-off leaves ~1e-17 everywhere; only real content has to fit the band
            double peak = 0.0;
            for (const auto& c : f.coeffs()) peak = std::max(peak, std::abs(c));
            for (std::size_t i = 0; i < f.size(); ++i) {
                if (std::abs(f[i]) <= 1e-13 * peak) continue;
                const int a = w.m1[i] * t.lambda, b = w.m2[i] * t.lambda;
                if (std::abs(a) >= g.n / 3.0 || std::abs(b) >= g.n / 3.0)
                    throw PreconditionError("symmetry_check: dilated field leaves the dealiased band");
                out.at(a, b) = f[i];
            }
            return out;
        }
    }
    return out;
}

} // namespace detail

/// ||G(h o T)[f o T] - c_T (G(h) f) o T|| / ||G(h) f|| with h o T := h(T x) / lambda for dilations.
inline double symmetry_check(const SpectralField& h, const SpectralField& f, const TransformSpec& t, int order) {
    if (t.kind == GridTransform::Rotation && (t.quarter_turns < 1 || t.quarter_turns > 3))
        throw PreconditionError("symmetry_check: rotation must be 1..3 quarter turns");
    if (t.kind == GridTransform::Dilation && t.lambda < 1)
        throw PreconditionError("symmetry_check: dilation factor must be a positive integer");
    const SpectralField base = dno_series(h, f, order);
    SpectralField ht = detail::transform_field(h, t);
    double c = 1.0;
    if (t.kind == GridTransform::Dilation) {
        ht *= 1.0 / t.lambda;
        c = t.lambda;
    }
    const SpectralField lhs = dno_series(ht, detail::transform_field(f, t), order);
    SpectralField rhs = detail::transform_field(base, t);
    rhs *= c;
    const double denom = l2_norm(base);
    return denom > 0.0 ? l2_norm(lhs - rhs) / (c * denom) : l2_norm(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Random localized data and probes

/// Sum of Gaussian bumps with random centres/widths, confined to the inner part of the box.
inline SpectralField random_bumps(const GridSpec& g, std::mt19937_64& rng, int count, double width_lo,
                                  double width_hi, double centre_radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), uw(width_lo, width_hi);
    struct Bump {
        double x, y, w, a;
    };
    std::vector<Bump> bumps;
    for (int i = 0; i < count; ++i) bumps.push_back({centre_radius * u(rng), centre_radius * u(rng), uw(rng), u(rng)});
    return dealias(sample(g, [&](double x, double y) {
        double s = 0.0;
        for (const auto& b : bumps) s += b.a * std::exp(-((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / (b.w * b.w));
        return s;
    }));
}

inline SpectralField remove_mean(SpectralField f) {
    f[0] = 0.0;
    return f;
}

/// max over trials of ||G_n(h) f|| / (||grad h||_inf^n ||grad f||).
inline double multilinear_bound_probe(const GridSpec& g, int n, int trials, std::uint64_t seed) {
    if (n < 0 || n > 6) throw PreconditionError("multilinear_bound_probe: n must be in [0, 6]");
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        SpectralField h = remove_mean(random_bumps(g, rng, 3, 0.3 * g.L / (2 * pi), 0.7 * g.L / (2 * pi), 0.15 * g.L));
        const SpectralField f = random_bumps(g, rng, 3, 0.3 * g.L / (2 * pi), 0.7 * g.L / (2 * pi), 0.15 * g.L);
        const double s = max_slope(h);
        if (s > 0.0) h *= 0.25 / s;  // keep inside the series guard; the ratio is scale-free in h
        const double grad_f = std::hypot(l2_norm(partial(f, 0)), l2_norm(partial(f, 1)));
        const double ratio = l2_norm(dno_term(h, f, n)) / (std::pow(max_slope(h), n) * grad_f);
        worst = std::max(worst, ratio);
    }
    return worst;
}

/// Residual of the Leibniz rule for the truncated series:
///   d, Omega:  Gamma[G(h) f] = dG[Gamma h] f + G(h) Gamma f
///   Sigma:     Sigma[G_n f] = dG_n[Sigma h] f + G_n(Sigma f) - (n + 1) G_n f
inline double leibniz_gamma_check(const SpectralField& h, const SpectralField& f, VectorField gamma, int order,
                                  MarginReport* report = nullptr) {
    MarginReport local;
    MarginReport& rep = report ? *report : local;
    const SpectralField gh = apply_vector_field(h, gamma, &rep);
    const SpectralField gf = apply_vector_field(f, gamma, &rep);
    if (rep.warning) throw PreconditionError("leibniz_gamma_check: fields not localized away from the box edge");
    detail::SeriesEvaluator ev(h), evt(h, gh);
    SpectralField lhs = SpectralField::zeros(h.grid()), rhs = SpectralField::zeros(h.grid());
    for (int n = 0; n <= order; ++n) {
        const SpectralField gn = ev.term(f, n);
        lhs += apply_vector_field(gn, gamma);
        rhs += evt.tangent(f, n);
        rhs += ev.term(gf, n);
        if (gamma == VectorField::Sigma) rhs -= static_cast<double>(n + 1) * gn;
    }
    const double scale = l2_norm(lhs);
    return scale > 0.0 ? l2_norm(lhs - rhs) / scale : l2_norm(lhs - rhs);
}

} // namespace capwave
