#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "capwave/dno.hpp"
#include "capwave/evolution.hpp"
#include "capwave/littlewood_paley.hpp"
#include "capwave/pseudo_product.hpp"
#include "capwave/symbols.hpp"

namespace capwave {

// ---------------------------------------------------------------------------
// Resonant sets. Every set is a cone, so the search runs on |eta| = 1 with
// parameters (xi_1, xi_2, arg eta).

enum class ResonantSet { Time, Space, SpaceTime };

inline const char* set_label(ResonantSet s) {
    switch (s) {
        case ResonantSet::Time: return "T";
        case ResonantSet::Space: return "S";
        case ResonantSet::SpaceTime: return "R";
    }
    return "?";
}

struct ResonantPoint {
    ResonantSet set = ResonantSet::Time;
    double residual = std::numeric_limits<double>::infinity();
    Vec2 xi{};
    Vec2 eta{};
};

struct ResonanceConfig {
    double box = 3.0;           // xi ranges over [-box, box]^2
    int starts_per_axis = 9;    // multi-start grid for the local search
    int angle_starts = 3;
    int scan_per_axis = 161;    // brute-force scan of the normalized slice
    double exclusion = 1e-3;    // keep |xi - eta| above this in gradient residuals
    double resonant_tol = 1e-4; // |phi| + |grad phi| below this counts as resonant
    int max_iter = 200;
};

struct ResonanceReport {
    Signs signs;
    std::array<ResonantPoint, 3> best;  // indexed by ResonantSet
    double scan_min_phase = 0.0;        // min |phi| on the normalized scan
    double scan_min_phase_ratio = 0.0;  // min |phi| / (0.5 min(|xi|,|eta|,|xi-eta|)^{3/2})
    double scan_min_joint = 0.0;        // min |phi| + |grad phi| away from xi = 0
    int resonant_count = 0;             // points with |phi| + |grad phi| < resonant_tol
    double resonant_max_xi = 0.0;       // largest |xi| among them
    int space_zero_count = 0;           // converged zeros of grad phi
    double space_max_dist_2eta = 0.0;   // max |xi - 2 eta| / |eta| over those zeros
};

namespace detail {

inline Vec2 unit(double th) { return {std::cos(th), std::sin(th)}; }

/// Residual vector of the chosen set at normalized parameters p = (xi1, xi2, theta).
inline std::vector<double> set_residual(Signs s, ResonantSet set, const std::array<double, 3>& p, double excl) {
    const Vec2 xi{p[0], p[1]}, eta = unit(p[2]);
    std::vector<double> r;
    if (set != ResonantSet::Space) r.push_back(phase(s, xi, eta));
    if (set != ResonantSet::Time) {
        Vec2 g{};
        if (norm(xi - eta) > excl) g = grad_eta_phase(s, xi, eta);
        else g = grad_eta_phase(s, eta + (excl / std::max(norm(xi - eta), 1e-300)) * (xi - eta), eta);
        r.push_back(g[0]);
        r.push_back(g[1]);
    }
    return r;
}

inline double residual_measure(Signs s, ResonantSet set, Vec2 xi, Vec2 eta) {
    double m = 0.0;
    if (set != ResonantSet::Space) m += std::abs(phase(s, xi, eta));
    if (set != ResonantSet::Time) m += norm(grad_eta_phase(s, xi, eta));
    return m;
}

/// Solves the 3x3 system A x = b by Gaussian elimination with partial pivoting.
inline std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> A, std::array<double, 3> b) {
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        if (A[c][c] == 0.0) return {0.0, 0.0, 0.0};
        for (int r = c + 1; r < 3; ++r) {
            const double f = A[r][c] / A[c][c];
            for (int k = c; k < 3; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::array<double, 3> x{};
    for (int c = 2; c >= 0; --c) {
        double s = b[c];
        for (int k = c + 1; k < 3; ++k) s -= A[c][k] * x[k];
        x[c] = s / A[c][c];
    }
    return x;
}

/// Levenberg-Marquardt with a central-difference Jacobian.
inline std::array<double, 3> levenberg_marquardt(Signs s, ResonantSet set, std::array<double, 3> p, double box,
                                                 double excl, int max_iter) {
    auto cost = [&](const std::array<double, 3>& q) {
        double c = 0.0;
        for (double v : set_residual(s, set, q, excl)) c += v * v;
        return c;
    };
    double lambda = 1e-3, c0 = cost(p);
    for (int it = 0; it < max_iter && c0 > 1e-30; ++it) {
        const auto r = set_residual(s, set, p, excl);
        const std::size_t m = r.size();
        std::vector<std::array<double, 3>> J(m);
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-7 * std::max(1.0, std::abs(p[k]));
            auto pp = p, pm = p;
            pp[k] += h;
            pm[k] -= h;
            const auto rp = set_residual(s, set, pp, excl), rm = set_residual(s, set, pm, excl);
            for (std::size_t i = 0; i < m; ++i) J[i][k] = (rp[i] - rm[i]) / (2.0 * h);
        }
        std::array<std::array<double, 3>, 3> JtJ{};
        std::array<double, 3> Jtr{};
        for (std::size_t i = 0; i < m; ++i)
            for (int a = 0; a < 3; ++a) {
                Jtr[a] -= J[i][a] * r[i];
                for (int b = 0; b < 3; ++b) JtJ[a][b] += J[i][a] * J[i][b];
            }
        bool improved = false;
        for (int tries = 0; tries < 12 && !improved; ++tries) {
            auto A = JtJ;
            for (int a = 0; a < 3; ++a) A[a][a] += lambda * (JtJ[a][a] + 1e-12);
            const auto d = solve3(A, Jtr);
            std::array<double, 3> q{std::clamp(p[0] + d[0], -box, box), std::clamp(p[1] + d[1], -box, box), p[2] + d[2]};
            const double c1 = cost(q);
            if (c1 < c0) {
                const double gain = c0 - c1;
                p = q;
                c0 = c1;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                if (gain < 1e-32) it = max_iter;
            } else {
                lambda *= 4.0;
            }
        }
        if (!improved) break;
    }
    return p;
}

} // namespace detail

/// Locates T = {phi = 0}, S = {grad_eta phi = 0} and R = T n S for one sign pair by a
/// multi-start Levenberg-Marquardt search plus a scan of the normalized slice.
inline ResonanceReport resonant_sets(Signs s, const ResonanceConfig& cfg = {}) {
    if (cfg.box <= 0.0 || cfg.starts_per_axis < 2 || cfg.scan_per_axis < 3 || cfg.angle_starts < 1)
        throw ConfigError("resonant_sets: invalid search box");
    ResonanceReport rep;
    rep.signs = s;

    std::vector<std::array<double, 3>> starts;
    for (int a = 0; a < cfg.starts_per_axis; ++a)
        for (int b = 0; b < cfg.starts_per_axis; ++b)
            for (int c = 0; c < cfg.angle_starts; ++c) {
                const double x = -cfg.box + 2.0 * cfg.box * (a + 0.5) / cfg.starts_per_axis;
                const double y = -cfg.box + 2.0 * cfg.box * (b + 0.5) / cfg.starts_per_axis;
                starts.push_back({x, y, 2.0 * pi * (c + 0.25) / cfg.angle_starts});
            }

    for (ResonantSet set : {ResonantSet::Time, ResonantSet::Space, ResonantSet::SpaceTime}) {
        std::vector<ResonantPoint> found(starts.size());
        parallel_for(starts.size(), [&](std::size_t i) {
            const auto p = detail::levenberg_marquardt(s, set, starts[i], cfg.box, cfg.exclusion, cfg.max_iter);
            const Vec2 xi{p[0], p[1]}, eta = detail::unit(p[2]);
            found[i] = {set, detail::residual_measure(s, set, xi, eta), xi, eta};
        });
        auto& best = rep.best[static_cast<int>(set)];
        best.set = set;
        for (const auto& f : found) {
            // Sequential reduction in start order keeps ties deterministic.
            if (f.residual < best.residual) best = f;
            if (set == ResonantSet::Space && f.residual < 1e-9) {
                ++rep.space_zero_count;
                rep.space_max_dist_2eta = std::max(rep.space_max_dist_2eta, norm(f.xi - 2.0 * f.eta));
            }
            if (set == ResonantSet::SpaceTime && f.residual < cfg.resonant_tol) {
                ++rep.resonant_count;
                rep.resonant_max_xi = std::max(rep.resonant_max_xi, norm(f.xi));
            }
        }
    }

    // Scan: a uniform grid of the slice (it contains xi = 0) plus log-spaced rings around xi = 0,
    // which is where the (+-) resonance sits.
    std::vector<Vec2> pts;
    const int n = cfg.scan_per_axis;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            pts.push_back({-cfg.box + 2.0 * cfg.box * a / (n - 1), -cfg.box + 2.0 * cfg.box * b / (n - 1)});
    for (int k = 0; k <= 60; ++k)
        for (int q = 0; q < 32; ++q) pts.push_back(std::pow(10.0, -7.0 + 0.1 * k) * detail::unit(2.0 * pi * (q + 0.5) / 32));

    rep.scan_min_phase = rep.scan_min_phase_ratio = rep.scan_min_joint = std::numeric_limits<double>::infinity();
    const Vec2 eta{1.0, 0.0};  // rotation invariance fixes the direction of eta
    for (const Vec2& xi : pts) {
        const double ph = std::abs(phase(s, xi, eta));
        rep.scan_min_phase = std::min(rep.scan_min_phase, ph);
        const double small = std::min({norm(xi), 1.0, norm(xi - eta)});
        if (small > 0.0) rep.scan_min_phase_ratio = std::min(rep.scan_min_phase_ratio, ph / (0.5 * pow32(small)));
        if (norm(xi - eta) < cfg.exclusion) continue;
        const double joint = ph + norm(grad_eta_phase(s, xi, eta));
        if (joint < cfg.resonant_tol) {
            ++rep.resonant_count;
            rep.resonant_max_xi = std::max(rep.resonant_max_xi, norm(xi));
        }
        if (norm(xi) > 0.1) rep.scan_min_joint = std::min(rep.scan_min_joint, joint);
    }
    return rep;
}

/// phi_{--}(2 eta, eta) / |eta|^{3/2} - (2^{3/2} - 2), maximized over random eta.
inline double phi_double_eta_error(int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Vec2 eta{u(rng), u(rng)};
        if (norm(eta) < 1e-3) continue;
        const double v = phase({-1, -1}, 2.0 * eta, eta) / pow32(norm(eta));
        worst = std::max(worst, std::abs(v - (2.0 * std::sqrt(2.0) - 2.0)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Vanishing orders

enum class Regime { XiSmall, EtaSmall, DiffSmall };

inline const char* regime_label(Regime r) {
    switch (r) {
        case Regime::XiSmall: return "xi_small";
        case Regime::EtaSmall: return "eta_small";
        case Regime::DiffSmall: return "diff_small";
    }
    return "?";
}

inline Regime parse_regime(const std::string& s) {
    if (s == "xi_small") return Regime::XiSmall;
    if (s == "eta_small") return Regime::EtaSmall;
    if (s == "diff_small") return Regime::DiffSmall;
    throw ConfigError("unknown regime '" + s + "' (xi_small | eta_small | diff_small)");
}

inline double declared_order(const SymbolClass& c, Regime r) {
    switch (r) {
        case Regime::XiSmall: return c.c1;
        case Regime::EtaSmall: return c.c2;
        case Regime::DiffSmall: return c.c3;
    }
    return 0.0;
}

struct OrderFit {
    std::string symbol;
    Regime regime = Regime::XiSmall;
    double slope = 0.0;
    double r_squared = 0.0;
    int n_samples = 0;
    bool infinite = false;  // symbol vanishes identically in the regime
    double intercept = 0.0;
    std::vector<double> log_param;  // log s per sample
    std::vector<double> log_peak;   // log max |m| per sample
};

struct OrderFitConfig {
    int decades = 4;
    int per_decade = 4;
    int directions = 32;  // directions of the small variable
    int bases = 16;       // directions of the large variable on the unit circle
    double start = 1e-1;  // largest value of the small parameter
};

/// Log-log slope of max_{directions} |m| against the small parameter s in [start 10^-decades, start].
inline OrderFit vanishing_order_fit(const BilinearSymbol& m, Regime regime, const OrderFitConfig& cfg = {}) {
    if (cfg.decades < 3) throw PreconditionError("vanishing_order_fit: needs at least 3 decades");
    if (cfg.directions < 1 || cfg.bases < 1 || cfg.per_decade < 1) throw PreconditionError("vanishing_order_fit: bad sampling");
    const int ns = cfg.decades * cfg.per_decade + 1;
    std::vector<double> peak(ns, 0.0);
    parallel_for(static_cast<std::size_t>(ns), [&](std::size_t k) {
        const double s = cfg.start * std::pow(10.0, -static_cast<double>(k) / cfg.per_decade);
        double best = 0.0;
        for (int b = 0; b < cfg.bases; ++b) {
            const Vec2 base = detail::unit(2.0 * pi * (b + 0.37) / cfg.bases);
            for (int d = 0; d < cfg.directions; ++d) {
                const Vec2 dir = s * detail::unit(2.0 * pi * (d + 0.5) / cfg.directions);
                Vec2 xi{}, eta{};
                switch (regime) {
                    case Regime::XiSmall: xi = dir; eta = base; break;
                    case Regime::EtaSmall: xi = base; eta = dir; break;
                    case Regime::DiffSmall: xi = base; eta = base - dir; break;
                }
                best = std::max(best, std::abs(m(xi, eta)));
            }
        }
        peak[k] = best;
    });
    std::vector<double> x, y;
    for (int k = 0; k < ns; ++k) {
        if (!(peak[k] > 0.0) || !std::isfinite(peak[k])) continue;
        x.push_back(std::log(cfg.start) - k * std::log(10.0) / cfg.per_decade);
        y.push_back(std::log(peak[k]));
    }
    OrderFit fit;
    fit.symbol = m.name;
    fit.regime = regime;
    fit.n_samples = static_cast<int>(x.size());
    fit.log_param = x;
    fit.log_peak = y;
    if (x.size() < 3) {
        fit.infinite = true;
        fit.slope = std::numeric_limits<double>::infinity();
        fit.r_squared = 1.0;
        return fit;
    }
    fit.slope = detail::ls_slope(x, y);
    double my = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        my += y[i];
        mx += x[i];
    }
    my /= y.size();
    mx /= x.size();
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = my + fit.slope * (x[i] - mx);
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

/// max over random points and lambda in {2, 1/2} of |m(l xi, l eta) - l^beta m(xi, eta)| / |l^beta m(xi, eta)|.
inline double homogeneity_residual(const BilinearSymbol& m, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Vec2 xi{u(rng), u(rng)}, eta{u(rng), u(rng)};
        if (norm(xi) < 0.1 || norm(eta) < 0.1 || norm(xi - eta) < 0.1) continue;
        const auto base = m(xi, eta);
        if (std::abs(base) < 1e-8) continue;
        for (double l : {2.0, 0.5}) {
            const auto expect = std::pow(l, m.declared.beta) * base;
            worst = std::max(worst, std::abs(m(l * xi, l * eta) - expect) / std::abs(expect));
        }
    }
    return worst;
}

/// Remainder of the first-order expansion of grad_eta phi_{+-} near xi = 0,
///   grad phi - 3/(2|eta|^{1/2}) (xi - (1/2)(xi.eta_hat) eta_hat),
/// fitted against |xi|; returns the log-log slope (2 for a second-order remainder).
inline double grad_expansion_remainder_order(Vec2 eta, int samples = 9) {
    const double ne = norm(eta);
    if (ne == 0.0) throw PreconditionError("grad_expansion_remainder_order: eta = 0");
    const Vec2 eh = (1.0 / ne) * eta;
    std::vector<double> x, y;
    for (int k = 0; k < samples; ++k) {
        const double r = 1e-1 * std::pow(10.0, -0.375 * k);
        double worst = 0.0;
        for (int d = 0; d < 16; ++d) {
            const Vec2 xi = r * detail::unit(2.0 * pi * (d + 0.5) / 16);
            const Vec2 lead = (1.5 / std::sqrt(ne)) * (xi - (0.5 * dot(xi, eh)) * eh);
            worst = std::max(worst, norm(grad_eta_phase({1, -1}, xi, eta) - lead));
        }
        if (worst > 0.0) {
            x.push_back(std::log(r));
            y.push_back(std::log(worst));
        }
    }
    return detail::ls_slope(x, y);
}

// ---------------------------------------------------------------------------
// Time/space cutoffs for the (--) phase

struct CutoffPair {
    double chi_T;
    double chi_S;
};

/// chi^T = rho(200 |xi - 2 eta| / |xi|), chi^S = 1 - chi^T.
inline CutoffPair cutoff_partition(Vec2 xi, Vec2 eta) {
    const double nx = norm(xi);
    if (nx == 0.0) throw PreconditionError("cutoff_partition: xi = 0");
    const double t = rho_cutoff(200.0 * norm(xi - 2.0 * eta) / nx);
    return {t, 1.0 - t};
}

/// Lower bound on supp chi^T from the triangle-inequality chain.
inline double cutoff_time_bound() { return std::pow(200.0 / 101.0, 1.5) - 1.0 - std::pow(101.0 / 99.0, 1.5); }

struct CutoffScan {
    double min_phase_ratio_T = 0.0;  // min phi_{--} / |eta|^{3/2} on supp chi^T
    double min_grad_ratio_S = 0.0;   // min |grad phi_{--}| / (|xi|^{1/2} + |eta|^{1/2}) on supp chi^S
    int samples_T = 0;
    int samples_S = 0;
};

/// Random scan of both supports with |xi| = 1 (both ratios are 0-homogeneous and rotation invariant).
/// On supp chi^S the gradient ratio behaves like |xi| / |eta| for |eta| >> |xi|, so the scan keeps
/// |eta| <= eta_max |xi|.
inline CutoffScan cutoff_scan(int samples, std::uint64_t seed, double eta_max = 4.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CutoffScan out;
    out.min_phase_ratio_T = out.min_grad_ratio_S = std::numeric_limits<double>::infinity();
    const Vec2 xi{1.0, 0.0};
    const Signs mm{-1, -1};
    for (int i = 0; i < samples; ++i) {
        // supp chi^T: |xi - 2 eta| < |xi| / 100
        const Vec2 w = (0.01 * std::sqrt(u(rng))) * detail::unit(2.0 * pi * u(rng));
        const Vec2 eta = 0.5 * (xi - w);
        if (cutoff_partition(xi, eta).chi_T > 0.0) {
            out.min_phase_ratio_T = std::min(out.min_phase_ratio_T, phase(mm, xi, eta) / pow32(norm(eta)));
            ++out.samples_T;
        }
        // supp chi^S, |eta| log-uniform in [1e-3, eta_max]
        const Vec2 e2 = (1e-3 * std::pow(eta_max / 1e-3, u(rng))) * detail::unit(2.0 * pi * u(rng));
        if (cutoff_partition(xi, e2).chi_S > 0.0 && norm(xi - e2) > 1e-9) {
            const double r = norm(grad_eta_phase(mm, xi, e2)) / (1.0 + std::sqrt(norm(e2)));
            out.min_grad_ratio_S = std::min(out.min_grad_ratio_S, r);
            ++out.samples_S;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadratic part of the complex equation

struct QuadraticTerms {
    SpectralField direct;  // Lambda^{1/2}(G_1(h) psi) + i(-|grad psi|^2/2 + (Lambda psi)^2/2)
    SpectralField tform;   // T_{m--}(u, u) + T_{m++}(ubar, ubar) + T_{m+-}(ubar, u)
};

/// Both evaluations of the quadratic part of d_t u at the state u = Lambda^{1/2} h + i psi.
inline QuadraticTerms quadratic_terms(const SurfaceState& s, const PseudoProductPlan& pmm,
                                      const PseudoProductPlan& ppp, const PseudoProductPlan& ppm) {
    const GridSpec& g = s.h.grid();
    SpectralField direct = lambda_pow(dno_term(s.h, s.psi, 1), 0.5);
    const SpectralField p1 = partial(s.psi, 0), p2 = partial(s.psi, 1), lp = lambda_pow(s.psi, 1.0);
    SpectralField q = multiply(lp, lp) - multiply(p1, p1) - multiply(p2, p2);
    q *= 0.5;
    direct.set_real(false);
    for (std::size_t i = 0; i < g.size(); ++i) direct[i] += cplx(0.0, 1.0) * q[i];

    const SpectralField u = to_complex(s), ub = conjugate(u);
    SpectralField tform = pmm.apply(u, u) + ppp.apply(ub, ub) + ppm.apply(ub, u);
    return {dealias(std::move(direct)), std::move(tform)};
}

struct QuadraticConsistency {
    double residual = 0.0;      // max over trials of ||tform - direct||_2
    double amplitude = 0.0;
    double psi_zero_residual = 0.0;  // h-only state
    double h_zero_residual = 0.0;    // psi-only state
    double scale = 0.0;              // max ||direct||_2, for reference
};

/// Random zero-mean localized states of the given amplitude on an n x n grid with L = 2 pi.
inline QuadraticConsistency quadratic_consistency(int trials, double amplitude = 1e-3, int n = 32,
                                                  std::uint64_t seed = 7) {
    if (trials < 1) throw PreconditionError("quadratic_consistency: trials must be >= 1");
    const GridSpec g(n, 2.0 * pi);
    const PseudoProductPlan pmm(g, symbol_by_name("m_mm")), ppp(g, symbol_by_name("m_pp")),
        ppm(g, symbol_by_name("m_pm"));
    std::mt19937_64 rng(seed);
    QuadraticConsistency out;
    out.amplitude = amplitude;
    auto state = [&]() {
        SpectralField h = remove_mean(random_bumps(g, rng, 3, 0.4, 0.8, 1.0));
        SpectralField p = random_bumps(g, rng, 3, 0.4, 0.8, 1.0);
        h *= amplitude / std::max(sup_norm(h), 1e-300);
        p *= amplitude / std::max(sup_norm(p), 1e-300);
        return SurfaceState{std::move(h), std::move(p), 0.0};
    };
    auto err = [&](const SurfaceState& s) {
        const auto t = quadratic_terms(s, pmm, ppp, ppm);
        out.scale = std::max(out.scale, l2_norm(t.direct));
        return l2_norm(t.tform - t.direct);
    };
    for (int i = 0; i < trials; ++i) out.residual = std::max(out.residual, err(state()));
    SurfaceState s = state();
    out.psi_zero_residual = err({s.h, SpectralField::zeros(g, true), 0.0});
    out.h_zero_residual = err({SpectralField::zeros(g, true), s.psi, 0.0});
    return out;
}

} // namespace capwave
