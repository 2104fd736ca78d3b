#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capwave/dno.hpp"

namespace capwave {

struct DiagnosticParams {
    int K = 2;
    double delta = 0.01;
    double delta_prime = 0.05;  // (2K + 1) delta
    double alpha = 0.05;
    double iota = 0.05;
    double sobolev_s = 4.5;   // H^s index for ||Lambda^{1/2} u||
    double weighted_k = 1.0;  // W^{k,2} index of the vector-field norms
    int ell = 1;              // vector-field order (S powers are capped at 2)
};

struct EvolutionConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    int dno_order = 2;
    double c_surface = 2.0;
    bool nonlinear = true;
    bool enforce_horizon = true;
    int sample_every = 100;
    DiagnosticParams diag;

    /// dt <= 0.25 dx^{3/2} unless set explicitly.
    static double default_dt(const GridSpec& g) { return 0.25 * std::pow(g.dx(), 1.5); }

    /// Documented stability bound of the stepper on the nonlinear residual: dt * omega_max <= 2.8.
    static double stability_bound(const GridSpec& g) { return 2.8 / std::pow(pi / g.dx(), 1.5); }

    void validate(const GridSpec& g) const {
        if (!(dt > 0.0)) throw ConfigError("evolution: dt must be positive");
        if (t_end < 0.0) throw ConfigError("evolution: t_end must be >= 0");
        if (dno_order < 0 || dno_order > 6) throw ConfigError("evolution: dno_order must be in [0, 6]");
        if (sample_every < 1) throw ConfigError("evolution: sample_every must be >= 1");
        if (diag.K < 0) throw ConfigError("evolution: K must be >= 0");
        if (std::abs(diag.delta_prime - (2 * diag.K + 1) * diag.delta) > 1e-12 * std::max(1.0, diag.delta_prime))
            throw ConfigError("evolution: delta_prime must equal (2K+1) delta");
        if (diag.ell < 0 || diag.ell > 2) throw ConfigError("evolution: ell must be in [0, 2]");
        (void)g;
    }
};

// ---------------------------------------------------------------------------
// Complex form u = Lambda^{1/2} h + i psi

inline SpectralField to_complex(const SurfaceState& s) {
    SpectralField u = lambda_pow(s.h, 0.5);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += cplx(0.0, 1.0) * s.psi[i];
    u.set_real(false);
    return u;
}

/// Inverse of to_complex: h_k = (u_k + conj(u_{-k})) / (2 |k|^{1/2}), psi_k = (u_k - conj(u_{-k})) / 2i.
/// The mean of h is the gauge zero.
inline SurfaceState from_complex(const SpectralField& u, double time = 0.0) {
    const auto& g = u.grid();
    const auto& w = wavenumbers(g);
    const RVec& rs = radial_table(g, "half_inv_sqrt", [](double k) { return k > 0.0 ? 0.5 / std::sqrt(k) : 0.0; });
    SurfaceState s{SpectralField(g, true), SpectralField(g, true), time};
    for (std::size_t i = 0; i < u.size(); ++i) {
        const cplx un = std::conj(u[w.neg[i]]);
        s.h[i] = (u[i] + un) * rs[i];
        s.psi[i] = (u[i] - un) * cplx(0.0, -0.5);
    }
    return s;
}

namespace detail {
inline const RVec& omega_table(const GridSpec& g) {
    return radial_table(g, "omega", [](double k) { return k * std::sqrt(k); });
}

/// e^{-i t |k|^{3/2}} for the few step sizes in use; a short per-thread list avoids recomputing the phases.
inline const CVec& phase_table(const GridSpec& g, double t) {
    struct Entry {
        GridSpec g;
        double t;
        CVec phase;
    };
    thread_local std::vector<Entry> recent;
    for (const auto& e : recent)
        if (e.t == t && e.g == g) return e.phase;
    const RVec& om = omega_table(g);
    CVec ph(g.size());
    for (std::size_t i = 0; i < ph.size(); ++i) ph[i] = std::polar(1.0, -t * om[i]);
    if (recent.size() >= 6) recent.erase(recent.begin());
    recent.push_back({g, t, std::move(ph)});
    return recent.back().phase;
}
} // namespace detail

/// e^{-i t Lambda^{3/2}} u.
inline SpectralField linear_propagate(const SpectralField& u, double t) {
    const CVec& ph = detail::phase_table(u.grid(), t);
    SpectralField out(u.grid(), false);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * ph[i];
    return out;
}

/// Profile f = e^{i t Lambda^{3/2}} u.
inline SpectralField profile(const SpectralField& u, double t) { return linear_propagate(u, -t); }

// ---------------------------------------------------------------------------
// Right-hand side

struct SurfaceRhs {
    SpectralField dh;
    SpectralField dpsi;
};

namespace detail {

/// Shared physical quantities of one RHS evaluation.
struct RhsPieces {
    SpectralField gpsi;
    RVec h1, h2, p1, p2, gp;
};

inline RhsPieces rhs_pieces(const SurfaceState& s, int order, const char* who) {
    const auto& k = wavenumbers(s.h.grid());
    RhsPieces r;
    if (s.h.is_real()) {
        r.h1 = to_physical_real_with(s.h, [&](std::size_t i) { return cplx(0.0, k.d1[i]); });
        r.h2 = to_physical_real_with(s.h, [&](std::size_t i) { return cplx(0.0, k.d2[i]); });
    } else {
        r.h1 = to_physical_real(partial(s.h, 0));
        r.h2 = to_physical_real(partial(s.h, 1));
    }
    require_slope_value(max_slope(r.h1, r.h2), who);
    if (order <= 2 && s.psi.is_real() && s.h.is_real()) {
        auto low = dno_series_low(to_physical_real(s.h), s.psi, order);
        r.gpsi = std::move(low.value);
        r.p1 = std::move(low.f1);
        r.p2 = std::move(low.f2);
    } else {
        r.gpsi = dno_series_unchecked(s.h, s.psi, order);
        r.p1 = to_physical_real(partial(s.psi, 0));
        r.p2 = to_physical_real(partial(s.psi, 1));
    }
    r.gp = to_physical_real(r.gpsi);
    return r;
}

/// c kappa - |grad psi|^2 / 2 + (G psi + grad h . grad psi)^2 / (2 (1 + |grad h|^2)) from the pieces.
inline SpectralField psi_rhs(const RhsPieces& p, const GridSpec& g, double c) {
    const std::size_t N = p.h1.size();
    RVec q(N), c1(N), c2(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double a = p.gp[i] + p.h1[i] * p.p1[i] + p.h2[i] * p.p2[i];
        const double grad2 = 1.0 + p.h1[i] * p.h1[i] + p.h2[i] * p.h2[i];
        q[i] = -0.5 * (p.p1[i] * p.p1[i] + p.p2[i] * p.p2[i]) + 0.5 * a * a / grad2;
        const double sc = 0.5 * c / std::sqrt(grad2);
        c1[i] = sc * p.h1[i];
        c2[i] = sc * p.h2[i];
    }
    const auto& k = wavenumbers(g);
    return forward_real_combined({&q, &c1, &c2}, g, [&](std::size_t j, std::size_t i) {
        return j == 0 ? cplx(1.0) : cplx(0.0, j == 1 ? k.d1[i] : k.d2[i]);
    });
}

} // namespace detail

/// d_t h = G(h) psi,
/// d_t psi = c kappa - |grad psi|^2 / 2 + (G(h) psi + grad h . grad psi)^2 / (2 (1 + |grad h|^2)).
inline SurfaceRhs rhs(const SurfaceState& s, const EvolutionConfig& cfg) {
    if (!cfg.nonlinear) {
        require_slope(s.h, "rhs");
        SpectralField dpsi = laplacian(s.h);
        dpsi *= 0.5 * cfg.c_surface;
        return {lambda_pow(s.psi, 1.0), dpsi};
    }
    const auto p = detail::rhs_pieces(s, cfg.dno_order, "rhs");
    return {p.gpsi, detail::psi_rhs(p, s.h.grid(), cfg.c_surface)};
}

/// Directional derivative of rhs at s in the direction ds.
inline SurfaceRhs rhs_tangent(const SurfaceState& s, const SurfaceState& ds, const EvolutionConfig& cfg) {
    if (!cfg.nonlinear) return rhs(ds, cfg);
    const auto p = detail::rhs_pieces(s, cfg.dno_order, "rhs_tangent");
    SpectralField dgpsi = dno_series_tangent(s.h, ds.h, s.psi, cfg.dno_order) + dno_series(s.h, ds.psi, cfg.dno_order);
    const RVec dg = to_physical_real(dgpsi);
    const auto [dh1, dh2] = to_physical_pair(partial(ds.h, 0), partial(ds.h, 1));
    const auto [dp1, dp2] = to_physical_pair(partial(ds.psi, 0), partial(ds.psi, 1));
    RVec q(p.h1.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double a = p.gp[i] + p.h1[i] * p.p1[i] + p.h2[i] * p.p2[i];
        const double Q = 1.0 + p.h1[i] * p.h1[i] + p.h2[i] * p.h2[i];
        const double da = dg[i] + dh1[i] * p.p1[i] + dh2[i] * p.p2[i] + p.h1[i] * dp1[i] + p.h2[i] * dp2[i];
        const double dQ = 2.0 * (p.h1[i] * dh1[i] + p.h2[i] * dh2[i]);
        q[i] = -(p.p1[i] * dp1[i] + p.p2[i] * dp2[i]) + a * da / Q - 0.5 * a * a * dQ / (Q * Q);
    }
    SpectralField dpsi = from_physical_real(q, s.h.grid());
    SpectralField kap = curvature_tangent(s.h, ds.h);
    kap *= cfg.c_surface;
    dpsi += kap;
    return {dgpsi, dpsi};
}

/// d_t u for the complex form.
inline SpectralField rhs_complex(const SpectralField& u, const EvolutionConfig& cfg) {
    const SurfaceRhs r = rhs(from_complex(u), cfg);
    SpectralField out = lambda_pow(r.dh, 0.5);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += cplx(0.0, 1.0) * r.dpsi[i];
    out.set_real(false);
    return out;
}

/// d_t u minus the linear part -i Lambda^{3/2} u.
inline SpectralField nonlinear_part(const SpectralField& u, const EvolutionConfig& cfg) {
    if (!cfg.nonlinear && cfg.c_surface == 2.0) return SpectralField::zeros(u.grid(), false);
    SpectralField out = rhs_complex(u, cfg);
    const RVec& om = detail::omega_table(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] += cplx(-om[i] * u[i].imag(), om[i] * u[i].real());
    return out;
}

inline SpectralField rhs_complex_tangent(const SpectralField& u, const SpectralField& du, const EvolutionConfig& cfg) {
    const SurfaceRhs r = rhs_tangent(from_complex(u), from_complex(du), cfg);
    SpectralField out = lambda_pow(r.dh, 0.5);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += cplx(0.0, 1.0) * r.dpsi[i];
    out.set_real(false);
    return out;
}

// ---------------------------------------------------------------------------
// Time stepping

/// Thrown when a step produces non-finite values; carries the last valid state.
class BlowUpError : public NumericalError {
public:
    BlowUpError(const std::string& what, SurfaceState last) : NumericalError(what), last_valid(std::move(last)) {}
    SurfaceState last_valid;
};

struct StepInfo {
    double symmetry_correction = 0.0;  // size of the reality projection after the step
};

namespace detail {
inline bool all_finite(const SpectralField& f) {
    for (const auto& c : f.coeffs())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}
} // namespace detail

/// One integrating-factor RK4 step in u-space around the exact propagator e^{-i dt Lambda^{3/2}}.
inline SurfaceState step(const SurfaceState& s, const EvolutionConfig& cfg, StepInfo* info = nullptr) {
    const double dt = cfg.dt;
    const SpectralField u = to_complex(s);
    auto N = [&](const SpectralField& v) { return nonlinear_part(v, cfg); };
    auto E = [](const SpectralField& v, double t) { return linear_propagate(v, t); };
    SpectralField k1, k2, k3, k4;
    try {
        k1 = N(u);
        SpectralField a = u;
        a += (0.5 * dt) * k1;
        k2 = N(E(a, 0.5 * dt));
        SpectralField b = E(u, 0.5 * dt);
        b += (0.5 * dt) * k2;
        k3 = N(b);
        SpectralField c = E(u, dt);
        c += dt * E(k3, 0.5 * dt);
        k4 = N(c);
    } catch (const PreconditionError& e) {
        throw BlowUpError(std::string("step: stage left the admissible set: ") + e.what(), s);
    }
    SpectralField next = E(u, dt);
    SpectralField incr = E(k1, dt);
    incr += 2.0 * E(k2 + k3, 0.5 * dt);
    incr += k4;
    next += (dt / 6.0) * incr;
    if (!detail::all_finite(next)) throw BlowUpError("step: non-finite values at t = " + std::to_string(s.time + dt), s);
    SurfaceState out = from_complex(next, s.time + dt);
    if (info) info->symmetry_correction = l2_norm(to_complex(out) - next) / std::max(l2_norm(next), 1e-300);
    return out;
}

// ---------------------------------------------------------------------------
// Diagnostics and runs

/// Largest time before a wave packet of the resolved band crosses half the box:
/// t <= 0.5 L / v_max with group speed v = (3/2) k^{1/2}.
inline double horizon_time(const SpectralField& u) {
    const auto& w = wavenumbers(u.grid());
    double amax = 0.0;
    for (const auto& c : u.coeffs()) amax = std::max(amax, std::abs(c));
    double kres = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (std::abs(u[i]) > 1e-8 * amax) kres = std::max(kres, w.kabs[i]);
    if (kres == 0.0) return std::numeric_limits<double>::infinity();
    return 0.5 * u.grid().L / (1.5 * std::sqrt(kres));
}

struct DiagnosticsRow {
    double t = 0.0;
    double energy = 0.0;
    double hs_norm = 0.0;
    std::vector<double> weighted;  // ||Y^2 Lambda^alpha u||_{W^{k,2}_l}, l = 0..ell
    std::vector<double> sup;       // ||Y Lambda^{1/2+alpha-beta} u||_inf, beta = 0, 1/4, 1/2
    std::vector<double> growth;    // <t>^{1 - 2 beta / 3} * sup
    bool horizon_exceeded = false;
    double symmetry_correction = 0.0;
};

inline const std::vector<double>& decay_betas() {
    static const std::vector<double> b{0.0, 0.25, 0.5};
    return b;
}

/// S^i u for i <= ell with S = (3/2) t d_t + Sigma, d_t substituted from the equation.
/// S^2 uses d_t(S u) = DF(u)[S u - u/2] + u_t / 2 (S u - u/2 solves the linearised flow).
inline std::vector<SpectralField> scaling_powers(const SpectralField& u, double t, int ell,
                                                 const EvolutionConfig& cfg) {
    std::vector<SpectralField> out{u};
    if (ell == 0) return out;
    const SpectralField ut = rhs_complex(u, cfg);
    SpectralField su = apply_vector_field(u, VectorField::Sigma);
    su += (1.5 * t) * ut;
    out.push_back(su);
    if (ell == 1) return out;
    SpectralField w = su;
    w -= 0.5 * u;
    SpectralField dsu = rhs_complex_tangent(u, w, cfg);
    dsu += 0.5 * ut;
    SpectralField s2 = apply_vector_field(su, VectorField::Sigma);
    s2 += (1.5 * t) * dsu;
    out.push_back(s2);
    return out;
}

inline DiagnosticsRow diagnose(const SurfaceState& s, const EvolutionConfig& cfg) {
    DiagnosticsRow row;
    row.t = s.time;
    row.energy = physical_energy(s, cfg.dno_order, cfg.c_surface);
    const SpectralField u = to_complex(s);
    const SpectralField hu = lambda_pow(u, 0.5);
    row.hs_norm = sobolev_norm(hu, cfg.diag.sobolev_s, 2);
    const double tb = std::sqrt(1.0 + s.time * s.time);
    const auto powers = scaling_powers(u, s.time, cfg.diag.ell, cfg);
    std::vector<SpectralField> weighted_powers;
    for (const auto& p : powers) weighted_powers.push_back(apply_Y(apply_Y(lambda_pow(p, cfg.diag.alpha), cfg.diag.iota), cfg.diag.iota));
    for (int l = 0; l <= cfg.diag.ell; ++l)
        row.weighted.push_back(weighted_norm_from_powers(weighted_powers, cfg.diag.weighted_k, 2, l));
    for (double beta : decay_betas()) {
        const double v = sup_norm(apply_Y(lambda_pow(u, 0.5 + cfg.diag.alpha - beta), cfg.diag.iota));
        row.sup.push_back(v);
        row.growth.push_back(std::pow(tb, 1.0 - 2.0 * beta / 3.0) * v);
    }
    return row;
}

struct RunResult {
    std::vector<DiagnosticsRow> rows;
    SurfaceState final_state;
    bool horizon_truncated = false;
    double horizon = 0.0;
    double max_symmetry_correction = 0.0;
};

/// Integrates to t_end, sampling diagnostics every `sample_every` steps (and at the end).
/// With enforce_horizon the run stops at the box-exit time and flags the last row.
inline RunResult run(const SurfaceState& initial, const EvolutionConfig& cfg,
                     const std::function<void(const DiagnosticsRow&)>& on_sample = {}) {
    cfg.validate(initial.h.grid());
    RunResult res;
    res.horizon = horizon_time(to_complex(initial));
    SurfaceState s = initial;
    auto record = [&](bool flag) {
        DiagnosticsRow row = diagnose(s, cfg);
        row.horizon_exceeded = flag;
        row.symmetry_correction = res.max_symmetry_correction;
        if (on_sample) on_sample(row);
        res.rows.push_back(std::move(row));
    };
    record(false);
    const long steps = std::lround(cfg.t_end / cfg.dt);
    for (long n = 1; n <= steps; ++n) {
        if (cfg.enforce_horizon && s.time + cfg.dt > res.horizon + 1e-12) {
            res.horizon_truncated = true;
            if (res.rows.back().t == s.time) {
                res.rows.back().horizon_exceeded = true;
            } else {
                record(true);
            }
            break;
        }
        StepInfo info;
        try {
            s = step(s, cfg, &info);
        } catch (const BlowUpError&) {
            res.final_state = s;
            throw;
        }
        res.max_symmetry_correction = std::max(res.max_symmetry_correction, info.symmetry_correction);
        if (n % cfg.sample_every == 0 || n == steps) record(false);
    }
    res.final_state = s;
    return res;
}

} // namespace capwave
