#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "capwave/littlewood_paley.hpp"
#include "capwave/multiplier.hpp"
#include "capwave/parallel.hpp"
#include "capwave/symbols.hpp"

namespace capwave {

enum class ProductMode { NaiveFull, DyadicLocalized };

/// Reference evaluation of T_m(f, g)^(xi) = sum_eta m(xi, eta) f^(eta) g^(xi - eta) over the dealiased band.
/// With DyadicLocalized the symbol is replaced by mu = theta(|(xi, eta)| / 2^j) m.
class PseudoProductPlan {
public:
    PseudoProductPlan(GridSpec g, BilinearSymbol symbol, ProductMode mode = ProductMode::NaiveFull,
                      std::optional<int> dyadic_j = std::nullopt, int max_n = 64)
        : grid_(g), symbol_(std::move(symbol)), mode_(mode), j_(dyadic_j) {
        g.validate();
        if (g.n > max_n)
            throw PreconditionError("pseudo-product: naive evaluation is O(n^4); n = " + std::to_string(g.n) +
                                    " exceeds the cap " + std::to_string(max_n));
        if (mode_ == ProductMode::DyadicLocalized && !j_)
            throw PreconditionError("pseudo-product: dyadic mode needs a level j");
        build();
    }

    const GridSpec& grid() const { return grid_; }
    const BilinearSymbol& symbol() const { return symbol_; }

    /// max |m(xi, eta)| over the pairs the sum visits.
    double max_abs_symbol() const {
        double m = 0.0;
        for (std::size_t i = 0; i < table_.size(); ++i)
            if (diff_[i] != npos) m = std::max(m, std::abs(table_[i]));
        return m;
    }

    SpectralField apply(const SpectralField& f, const SpectralField& g) const {
        if (!(f.grid() == grid_) || !(g.grid() == grid_)) throw PreconditionError("pseudo-product: grid mismatch");
        const std::size_t K = kept_.size();
        CVec out(grid_.size());
        parallel_for(K, [&](std::size_t a) {
            cplx acc = 0.0;
            const std::size_t row = a * K;
            for (std::size_t b = 0; b < K; ++b) {
                const std::size_t z = diff_[row + b];
                if (z == npos) continue;
                acc += table_[row + b] * f[kept_[b]] * g[z];
            }
            out[kept_[a]] = acc;
        });
        return SpectralField(grid_, std::move(out), false);
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    void build() {
        const auto& w = wavenumbers(grid_);
        for (std::size_t i = 0; i < grid_.size(); ++i)
            if (w.keep[i]) kept_.push_back(i);
        const std::size_t K = kept_.size();
        table_.assign(K * K, cplx(0.0));
        diff_.assign(K * K, npos);
        const double scale = j_ ? std::ldexp(1.0, -*j_) : 1.0;
        parallel_for(K, [&](std::size_t a) {
            const std::size_t ia = kept_[a];
            const Vec2 xi{w.k1[ia], w.k2[ia]};
            for (std::size_t b = 0; b < K; ++b) {
                const std::size_t ib = kept_[b];
                const int d1 = w.m1[ia] - w.m1[ib], d2 = w.m2[ia] - w.m2[ib];
                if (std::abs(d1) >= grid_.n / 2 || std::abs(d2) >= grid_.n / 2) continue;
                const std::size_t iz = grid_.idx(grid_.index_of_mode(d1), grid_.index_of_mode(d2));
                if (!w.keep[iz]) continue;
                const Vec2 eta{w.k1[ib], w.k2[ib]};
                cplx m = symbol_(xi, eta);
                if (mode_ == ProductMode::DyadicLocalized)
                    m *= lp_theta(std::sqrt(dot(xi, xi) + dot(eta, eta)) * scale);
                if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
                    throw PreconditionError("pseudo-product: symbol '" + symbol_.name + "' is not finite");
                table_[a * K + b] = m;
                diff_[a * K + b] = iz;
            }
        });
    }

    GridSpec grid_;
    BilinearSymbol symbol_;
    ProductMode mode_;
    std::optional<int> j_;
    std::vector<std::size_t> kept_;
    std::vector<std::size_t> diff_;
    std::vector<cplx> table_;
};

inline SpectralField t_m(const SpectralField& f, const SpectralField& g, const PseudoProductPlan& plan) {
    return plan.apply(f, g);
}

/// Symbol of the dual operator: <T_m(f, g), w> = <f, T_{m*}(w, conj g)> with m*(a, b) = conj(m(b, a)).
inline BilinearSymbol adjoint_symbol(const BilinearSymbol& m) {
    auto inner = m.eval;
    return {m.name + "_adjoint", [inner](Vec2 a, Vec2 b) { return std::conj(inner(b, a)); }, m.declared};
}

/// Complex conjugate field: coefficients conj(c_{-k}).
inline SpectralField conjugate(const SpectralField& f) {
    const auto& w = wavenumbers(f.grid());
    SpectralField out(f.grid(), f.is_real());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::conj(f[w.neg[i]]);
    return out;
}

// ---------------------------------------------------------------------------
// Coifman-Meyer probes

/// Exponent triple; 0 encodes infinity.
struct Exponents {
    int p = 2, q = 2, r = 0;

    static double inv(int e) { return e == 0 ? 0.0 : 1.0 / e; }
    void validate() const {
        for (int e : {p, q, r})
            if (e != 0 && e < 1) throw PreconditionError("exponents must be >= 1 or infinity");
        if (std::abs(inv(q) + inv(r) - inv(p)) > 1e-12) throw PreconditionError("exponents: need 1/q + 1/r = 1/p");
    }
    std::string label() const {
        auto s = [](int e) { return e == 0 ? std::string("inf") : std::to_string(e); };
        return "(" + s(p) + "," + s(q) + "," + s(r) + ")";
    }
};

inline double lp_norm(const SpectralField& f, int p) {
    if (p == 2) return l2_norm(f);
    if (p == 0) return sup_norm(f);
    // Grid quadrature of int |f|^p dx.
    const CVec v = to_physical(f);
    double s = 0.0;
    for (const auto& c : v) s += std::pow(std::abs(c), p);
    return std::pow(s * f.grid().cell_area(), 1.0 / p);
}

namespace detail {

struct Bump {
    double x, y, w, a;
};

inline std::vector<Bump> draw_bumps(std::mt19937_64& rng, int count, double wlo, double whi, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), uw(wlo, whi);
    std::vector<Bump> out;
    for (int i = 0; i < count; ++i) out.push_back({radius * u(rng), radius * u(rng), uw(rng), u(rng)});
    return out;
}

/// F(lambda x) for the bump superposition F.
inline SpectralField sample_bumps(const GridSpec& g, const std::vector<Bump>& bumps, double lambda) {
    return dealias(sample(g, [&](double x, double y) {
        double s = 0.0;
        for (const auto& b : bumps) {
            const double dx = lambda * x - b.x, dy = lambda * y - b.y;
            s += b.a * std::exp(-(dx * dx + dy * dy) / (b.w * b.w));
        }
        return s;
    }));
}

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double d = n * sxx - sx * sx;
    return d == 0.0 ? 0.0 : (n * sxy - sx * sy) / d;
}

} // namespace detail

struct CmRow {
    int j = 0;
    Exponents e;
    double max_ratio = 0.0;
    double symbol_sup = 0.0;  // max |mu| 2^{-beta j} over grid pairs: the plane-wave part of max_ratio
};

struct CmProbeResult {
    std::vector<CmRow> rows;
    double trend_slope = 0.0;  // slope of log2(max_ratio) against j
};

/// mu = theta(|(xi, eta)| / 2^j) m.
inline BilinearSymbol localized_symbol(const BilinearSymbol& m, int j) {
    const double s = std::ldexp(1.0, -j);
    auto inner = m.eval;
    return {m.name + "_j" + std::to_string(j),
            [inner, s](Vec2 a, Vec2 b) { return lp_theta(std::sqrt(dot(a, a) + dot(b, b)) * s) * inner(a, b); },
            m.declared};
}

/// Dual in the second slot: <T_m(f, g), w> = <g, T_{m#}(w, conj f)> with m#(a, b) = conj(m(b, b - a)).
inline BilinearSymbol adjoint_second_symbol(const BilinearSymbol& m) {
    auto inner = m.eval;
    return {m.name + "_adjoint2", [inner](Vec2 a, Vec2 b) { return std::conj(inner(b, b - a)); }, m.declared};
}

namespace detail {

/// Largest singular value of a linear map on the dealiased band, by power iteration on A*A.
template <class Op, class Adj>
double top_singular_value(const GridSpec& g, Op&& A, Adj&& At, std::mt19937_64& rng, int iters) {
    std::normal_distribution<double> nd;
    const auto& w = wavenumbers(g);
    SpectralField v(g, false);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (w.keep[i]) v[i] = cplx(nd(rng), nd(rng));
    double s = 0.0;
    for (int it = 0; it < iters; ++it) {
        const double nv = l2_norm(v);
        if (nv == 0.0) return 0.0;
        v *= 1.0 / nv;
        const SpectralField a = A(v);
        s = l2_norm(a);
        v = At(a);
    }
    return s;
}

} // namespace detail

/// Estimates sup ||T_mu(f, g)||_p / (2^{beta j} ||f||_q ||g||_r) per level, mu = theta(|(xi,eta)|/2^j) m.
///
/// For (2, 2, inf) and (2, inf, 2) the map is linear in the L^2 slot, so for each L^inf trial the best
/// L^2 partner is found exactly by power iteration. The L^inf trials are every plane wave (for which
/// the map is diagonal and its norm is the largest |mu| over grid pairs) plus band-limited random
/// bumps. Other exponent triples fall back to random trial pairs.
inline CmProbeResult cm_bound_probe(const BilinearSymbol& symbol, const GridSpec& g, int j_lo, int j_hi, Exponents e,
                                    int trials, std::uint64_t seed, int power_iters = 25) {
    e.validate();
    if (j_hi < j_lo) throw PreconditionError("cm_bound_probe: empty j-range");
    if (trials < 0) throw PreconditionError("cm_bound_probe: trials must be >= 0");
    const auto& d = symbol.declared;
    if (!(d.c1 > 0.0 && d.c2 > 0.0 && d.c3 > 0.0))
        throw PreconditionError("cm_bound_probe: the bound needs c1, c2, c3 > 0 for '" + symbol.name + "'");
    const bool linf_g = e.p == 2 && e.q == 2 && e.r == 0;
    const bool linf_f = e.p == 2 && e.q == 0 && e.r == 2;
    const double unit = g.L / (2.0 * pi);
    CmProbeResult res;
    std::vector<double> xs, ys;
    for (int j = j_lo; j <= j_hi; ++j) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(j - j_lo));
        const BilinearSymbol mu = localized_symbol(symbol, j);
        const PseudoProductPlan plan(g, mu);
        const double norm_j = std::pow(2.0, d.beta * j);
        CmRow row{j, e};
        row.symbol_sup = plan.max_abs_symbol() / norm_j;
        double worst = 0.0;
        auto bump = [&] {
            return lp_project(detail::sample_bumps(g, detail::draw_bumps(rng, 3, 0.3 * unit, 0.6 * unit, 0.8 * unit), 1.0),
                              j + 2, LpKind::Below);
        };
        if (linf_g || linf_f) {
            worst = row.symbol_sup;
            const PseudoProductPlan dual(g, linf_g ? adjoint_symbol(mu) : adjoint_second_symbol(mu));
            for (int t = 0; t < trials; ++t) {
                const SpectralField fixed = bump();
                const double sup = sup_norm(fixed);
                if (sup == 0.0) continue;
                const SpectralField fixed_bar = conjugate(fixed);
                double s = 0.0;
                if (linf_g)
                    s = detail::top_singular_value(
                        g, [&](const SpectralField& x) { return plan.apply(x, fixed); },
                        [&](const SpectralField& w) { return dual.apply(w, fixed_bar); }, rng, power_iters);
                else
                    s = detail::top_singular_value(
                        g, [&](const SpectralField& x) { return plan.apply(fixed, x); },
                        [&](const SpectralField& w) { return dual.apply(w, fixed_bar); }, rng, power_iters);
                worst = std::max(worst, s / (norm_j * sup));
            }
        } else {
            for (int t = 0; t < trials; ++t) {
                const SpectralField f = bump(), h = bump();
                const double denom = norm_j * lp_norm(f, e.q) * lp_norm(h, e.r);
                if (denom > 0.0) worst = std::max(worst, lp_norm(plan.apply(f, h), e.p) / denom);
            }
        }
        row.max_ratio = worst;
        res.rows.push_back(row);
        if (worst > 0.0) {
            xs.push_back(j);
            ys.push_back(std::log2(worst));
        }
    }
    res.trend_slope = xs.size() >= 2 ? detail::ls_slope(xs, ys) : 0.0;
    return res;
}

/// Right side of the corollary:
///   ||Lambda^{s2} f||_q ||Y_k Lambda^{beta - s2} g||_r + ||Y_k Lambda^{beta - s3} f||_q ||Lambda^{s3} g||_r,
/// with Y_k = Lambda^kappa + Lambda^-kappa.
inline double corollary_rhs(const SpectralField& f, const SpectralField& g, double beta, double s2, double s3,
                            double kappa, Exponents e) {
    auto lam = [](const SpectralField& x, double a) { return a == 0.0 ? x : lambda_pow(x, a); };
    auto yk = [&](const SpectralField& x) { return kappa == 0.0 ? 2.0 * x : apply_Y(x, kappa); };
    return lp_norm(lam(f, s2), e.q) * lp_norm(yk(lam(g, beta - s2)), e.r) +
           lp_norm(yk(lam(f, beta - s3)), e.q) * lp_norm(lam(g, s3), e.r);
}

/// max over random trials of ||T_m(f, g)||_p / corollary_rhs.
inline double corollary_bound_probe(const BilinearSymbol& symbol, const GridSpec& g, double s2, double s3,
                                    Exponents e, double kappa, int trials, std::uint64_t seed) {
    e.validate();
    const auto& d = symbol.declared;
    if (!(d.c1 > 0.0)) throw PreconditionError("corollary_bound_probe: needs c1 > 0");
    if (!(s2 < d.c2) || !(s3 < d.c3)) throw PreconditionError("corollary_bound_probe: need s2 < c2 and s3 < c3");
    if (kappa < 0.0) throw PreconditionError("corollary_bound_probe: kappa must be >= 0");
    const PseudoProductPlan plan(g, symbol);
    std::mt19937_64 rng(seed);
    const double unit = g.L / (2.0 * pi);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const SpectralField f = detail::sample_bumps(g, detail::draw_bumps(rng, 3, 0.2 * unit, 0.6 * unit, 0.5 * unit), 1.0);
        const SpectralField h = detail::sample_bumps(g, detail::draw_bumps(rng, 3, 0.2 * unit, 0.6 * unit, 0.5 * unit), 1.0);
        const double rhs = corollary_rhs(f, h, d.beta, s2, s3, kappa, e);
        if (rhs > 0.0) worst = std::max(worst, lp_norm(plan.apply(f, h), e.p) / rhs);
    }
    return worst;
}

} // namespace capwave
