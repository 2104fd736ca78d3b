// Acceptance run: one line per criterion, nonzero exit if any fails.
// Usage: acceptance [criterion numbers...]   (no arguments runs all twelve)

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "capwave/dispersive.hpp"
#include "capwave/dno_oracle.hpp"
#include "capwave/evolution.hpp"
#include "capwave/pseudo_product.hpp"
#include "capwave/resonance.hpp"
#include "oracles.hpp"

using namespace capwave;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SpectralField bump(const GridSpec& g, double a, double cx, double cy, double w2) {
    return dealias(sample(g, [&](double x, double y) { return a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / w2); }));
}

Outcome flat_surface() {
    const GridSpec g(64, 2.0 * pi);
    std::mt19937_64 rng(1);
    const SpectralField f = random_bumps(g, rng, 4, 0.4, 1.0, 1.0);
    const SpectralField h = SpectralField::zeros(g);
    double worst = 0.0;
    for (int order = 0; order <= 4; ++order) {
        const SpectralField a = dno_series(h, f, order), b = lambda_pow(f, 1.0);
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return {worst <= 1e-12, fmt("max coefficient difference %.2e (orders 0..4)", worst)};
}

Outcome dno_convergence() {
    const GridSpec g(64, 2.0 * pi);
    DnoConfig cfg;  // 64 layers, two Richardson doublings
    const auto study = dno_convergence_study(g, {0.1, 0.05, 0.025}, {1, 2}, cfg);
    bool ok = true;
    std::string d;
    for (const auto& [order, slope] : study.slopes) {
        ok = ok && std::abs(slope - (order + 1)) <= 0.2;
        d += fmt("order %d slope %.3f (target %d); ", order, slope, order + 1);
    }
    return {ok, d};
}

Outcome energy_conservation() {
    // Localized packet on a 40-wide box. The long run goes well past the time the packet needs to reach
    // the box edge; the energy identity holds on the torus regardless, so the horizon stop is off.
    const GridSpec g(128, 40.0);
    const SurfaceState s0{remove_mean(bump(g, 1e-3, 0.0, 0.0, 2.0)), bump(g, 5e-4, 0.3, 0.0, 1.5), 0.0};
    EvolutionConfig cfg;
    cfg.enforce_horizon = false;
    cfg.sample_every = 1000000;
    auto drift = [&](double dt, double t_end) {
        cfg.dt = dt;
        cfg.t_end = t_end;
        const RunResult r = run(s0, cfg);
        return std::abs(r.rows.back().energy - r.rows.front().energy) / r.rows.front().energy;
    };
    const double long_run = drift(1e-3, 20.0);
    // At this amplitude dt = 1e-3 already sits on the floor set by round-off and the truncated DN
    // series (about 2e-12), so the step-halving order is read off a coarse ladder on a shorter run.
    const double floor = 1e-11;
    std::vector<double> ladder;
    for (double dt : {0.1, 0.05, 0.025}) ladder.push_back(drift(dt, 2.0));
    bool order_ok = true;
    int above_floor = 0;
    std::string d = fmt("drift %.2e at dt=1e-3 over t<=20; halving ladder (t<=2):", long_run);
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
        const double ratio = ladder[i] / ladder[i + 1];
        if (ladder[i + 1] > floor) {
            ++above_floor;
            order_ok = order_ok && ratio >= 8.0;
        }
        d += fmt(" %.2e -> %.2e (x%.1f%s)", ladder[i], ladder[i + 1], ratio, ladder[i + 1] > floor ? "" : ", floor reached");
    }
    return {long_run <= 1e-6 && order_ok && above_floor > 0, d};
}

Outcome linear_dispersion() {
    const GridSpec g(32, 2.0 * pi);
    double worst = 0.0;
    for (auto [k1, k2] : {std::pair{1, 2}, std::pair{3, 0}, std::pair{2, 3}, std::pair{5, 1}}) {
        const SurfaceState s{sample(g, [&](double x, double y) { return 0.01 * std::cos(k1 * x + k2 * y); }),
                             SpectralField::zeros(g), 0.0};
        EvolutionConfig cfg;
        cfg.nonlinear = false;
        cfg.dt = 0.01;
        cfg.t_end = 0.2;  // keeps omega t below pi, so arg needs no unwrapping
        cfg.enforce_horizon = false;
        cfg.sample_every = 1000000;
        const RunResult r = run(s, cfg);
        const cplx a = to_complex(s).at(k1, k2), b = to_complex(r.final_state).at(k1, k2);
        const double omega = -std::arg(b / a) / r.final_state.time;
        const double expect = std::pow(std::hypot(k1, k2), 1.5);
        worst = std::max(worst, std::abs(omega - expect) / expect);
    }
    return {worst <= 1e-10, fmt("max relative frequency error %.2e over 4 modes", worst)};
}

Outcome dispersive_decay() {
    std::vector<double> times;
    for (int i = 0; i < 7; ++i) times.push_back(std::pow(100.0, i / 6.0));
    bool ok = true;
    std::string d;
    for (double beta : {0.0, 0.25, 0.5}) {
        const DecayReport r = sup_norm_decay(radial_decomposition(decay_profile_for_beta(beta)), times, beta);
        const double predicted = -1.0 + 2.0 * beta / 3.0;
        const double spread = r.ratio_max / *std::min_element(r.ratios.begin(), r.ratios.end());
        // beta = 1/4 is reported, the gate is on the two endpoints
        if (beta != 0.25) ok = ok && std::abs(r.fitted_exponent - predicted) <= 0.1 && !r.ratio_monotone_growth && spread <= 10.0;
        d += fmt("beta %.2f exponent %.3f (predicted %.3f) ratio max %.3f spread %.2f%s; ", beta, r.fitted_exponent, predicted,
                 r.ratio_max, spread, r.ratio_monotone_growth ? " GROWING" : "");
    }
    return {ok, d};
}

Outcome resonances() {
    const ResonanceReport pp = resonant_sets({1, 1}), pm = resonant_sets({1, -1}), mm = resonant_sets({-1, -1});
    const double e = phi_double_eta_error(2000, 3);
    const bool ok = pp.resonant_count == 0 && pp.scan_min_phase_ratio > 0.0 && pm.resonant_count > 0 && pm.resonant_max_xi < 1e-3 &&
                    mm.space_zero_count > 0 && mm.space_max_dist_2eta <= 1e-6 && e <= 1e-10;
    return {ok, fmt("(++) %d resonant, min phase ratio %.3f; (+-) %d resonant, max |xi| %.1e; (--) %d space zeros within %.1e of "
                    "xi=2eta, doubled-eta error %.1e",
                    pp.resonant_count, pp.scan_min_phase_ratio, pm.resonant_count, pm.resonant_max_xi, mm.space_zero_count,
                    mm.space_max_dist_2eta, e)};
}

Outcome symbol_classes() {
    bool ok = true;
    double worst_margin = 1e300, worst_hom = 0.0;
    std::string worst;
    for (const auto& name : certified_symbol_names()) {
        const BilinearSymbol m = symbol_by_name(name);
        worst_hom = std::max(worst_hom, homogeneity_residual(m, 500, 9));
        for (Regime r : {Regime::XiSmall, Regime::EtaSmall, Regime::DiffSmall}) {
            const OrderFit f = vanishing_order_fit(m, r);
            const double margin = f.infinite ? 1e300 : f.slope - declared_order(m.declared, r);
            if (margin < worst_margin) {
                worst_margin = margin;
                worst = name + " " + regime_label(r);
            }
            ok = ok && margin >= -0.1;
        }
    }
    ok = ok && worst_hom <= 1e-10;
    return {ok, fmt("%zu symbols x 3 regimes; smallest slope margin %.3f (%s); homogeneity residual %.1e",
                    certified_symbol_names().size(), worst_margin, worst.c_str(), worst_hom)};
}

Outcome quadratic_form() {
    const QuadraticConsistency q = quadratic_consistency(20);
    const double tol = 1e-8 * q.amplitude * q.amplitude;
    const double worst = std::max({q.residual, q.psi_zero_residual, q.h_zero_residual});
    return {worst <= tol, fmt("max residual %.2e (tolerance %.1e, direct term size %.2e)", worst, tol, q.scale)};
}

Outcome coifman_meyer() {
    const GridSpec g(32, 2.0 * pi);
    bool ok = true;
    std::string d;
    for (const char* name : {"m2", "m_pm"})
        for (const Exponents e : {Exponents{2, 2, p_infinity}, Exponents{2, p_infinity, 2}}) {
            const CmProbeResult r = cm_bound_probe(symbol_by_name(name), g, 0, 3, e, 8, 1);
            ok = ok && r.trend_slope <= 0.1;
            d += fmt("%s %s slope %.3f; ", name, e.label().c_str(), r.trend_slope);
        }
    if (!ok) {
        // Not gated: the same probe one grid refinement up, skipping the coarsest annulus.
        const CmProbeResult r = cm_bound_probe(symbol_by_name("m2"), GridSpec(64, 2.0 * pi), 1, 4, {2, 2, p_infinity}, 8, 1);
        d += fmt("[info: m2 (2,2,inf) at n=64, levels 1..4: slope %.3f]", r.trend_slope);
    }
    return {ok, d};
}

Outcome littlewood_paley() {
    double part = 0.0;
    for (const GridSpec g : {GridSpec(64, 2.0 * pi), GridSpec(96, 40.0), GridSpec(256, 2.0 * pi)}) {
        const auto& w = wavenumbers(g);
        const auto [jlo, jhi] = lp_relevant_range(g);
        for (std::size_t i = 1; i < g.size(); ++i) {
            double s = 0.0;
            for (int j = jlo; j <= jhi; ++j) s += lp_theta(w.kabs[i] * std::ldexp(1.0, -j));
            part = std::max(part, std::abs(s - 1.0));
        }
    }
    const GridSpec g(256, 2.0 * pi);
    const auto [lo, hi] = oracle::resolvable_levels(g);
    std::mt19937_64 rng(4);
    double spread = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const SpectralField f = oracle::spikes(g, rng, 4);
        double rmin = 1e300, rmax = 0.0;
        for (int j = lo; j <= hi; ++j) {
            const double r = oracle::bernstein_ratio(f, j);
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        spread = std::max(spread, rmax / rmin);
    }
    return {part <= 1e-10 && spread <= 2.0,
            fmt("partition residual %.1e; Bernstein max/min %.3f over levels %d..%d", part, spread, lo, hi)};
}

Outcome bessel_hardy() {
    double worst = 0.0;
    for (int m = 0; m <= 20; ++m)
        for (double s = 0.0; s <= 100.0; s += 0.25) worst = std::max(worst, std::abs(bessel_j_std(m, s) - oracle::bessel_series(m, s)));
    const BesselEnvelope half = bessel_envelope(20, 500.0), full = bessel_envelope(20, 1000.0);
    const bool stable = std::abs(full.constant - half.constant) <= 1e-12 * full.constant;
    double hardy = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double k = 1.0 + 0.5 * i;
        const auto p = RadialProfile::analytic(
            "plateau", [k](double r) { return cplx(std::exp(-std::pow(r, k))); },
            [k](double r) { return r > 0.0 ? cplx(-k * std::pow(r, k - 1.0) * std::exp(-std::pow(r, k))) : cplx(0.0); }, 40.0);
        hardy = std::max(hardy, hardy_bound_check(p).ratio);
    }
    const double c = hardy_constant(0.05);
    return {worst <= 1e-10 && stable && hardy <= c,
            fmt("Bessel error %.1e; envelope constant %.6f at (m=%d, s=%g), %s; Hardy max ratio %.4f <= %.4f", worst, full.constant,
                full.argmax_m, full.argmax_s, stable ? "stable from s<=500 to s<=1000" : "NOT stable", hardy, c)};
}

Outcome symmetries() {
    const GridSpec g(64, 2.0 * pi);
    std::mt19937_64 rng(7);
    SpectralField h = random_bumps(g, rng, 3, 0.5, 0.9, 1.0);
    h *= 0.2 / max_slope(h);
    const SpectralField f = random_bumps(g, rng, 2, 0.5, 0.9, 1.0);
    double tr = symmetry_check(h, f, {GridTransform::Translation, 3, -5, 1, 2}, 2);
    for (int q = 1; q <= 3; ++q) tr = std::max(tr, symmetry_check(h, f, {GridTransform::Rotation, 0, 0, q, 2}, 2));
    SpectralField hc(g, true), fc(g, true);
    hc.at(1, 0) = hc.at(-1, 0) = 0.025;
    hc.at(0, 2) = cplx(0.0, 0.01);
    hc.at(0, -2) = cplx(0.0, -0.01);
    fc.at(1, 1) = fc.at(-1, -1) = 0.5;
    fc.at(2, -1) = fc.at(-2, 1) = 0.2;
    const double dil = symmetry_check(hc, fc, {GridTransform::Dilation, 0, 0, 1, 2}, 2);
    return {tr <= 1e-10 && dil <= 1e-8, fmt("translation/rotation residual %.1e; dilation residual %.1e", tr, dil)};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"DN flat-surface exactness", flat_surface},
        {"DN series/oracle convergence", dno_convergence},
        {"energy conservation", energy_conservation},
        {"linear dispersion", linear_dispersion},
        {"dispersive decay", dispersive_decay},
        {"resonant sets", resonances},
        {"symbol classes", symbol_classes},
        {"quadratic-form consistency", quadratic_form},
        {"Coifman-Meyer probe", coifman_meyer},
        {"Littlewood-Paley and Bernstein", littlewood_paley},
        {"Bessel and Hardy", bessel_hardy},
        {"symmetry identities", symmetries},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                    sec);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d criteria failed\n", failed);
    return failed ? 1 : 0;
}
