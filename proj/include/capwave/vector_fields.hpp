#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "capwave/multiplier.hpp"

namespace capwave {

enum class VectorField { Partial1, Partial2, Omega, Sigma };

/// Margin diagnostic for coordinate-weighted fields.
struct MarginReport {
    double outer_fraction = 0.0;  // largest share of l2 mass seen in the outer 10% band
    bool warning = false;         // set once any share reaches 1%

    void absorb(double frac) {
        outer_fraction = std::max(outer_fraction, frac);
        if (frac >= 0.01) warning = true;
    }
};

/// Share of the l2 mass of f lying where max(|x1|,|x2|) > 0.4 L.
inline double margin_fraction(const SpectralField& f) {
    const auto& g = f.grid();
    CVec v = to_physical(f);
    double total = 0.0, outer = 0.0;
    for (int a = 0; a < g.n; ++a)
        for (int b = 0; b < g.n; ++b) {
            const double m = std::norm(v[g.idx(a, b)]);
            total += m;
            if (std::max(std::abs(g.coord(a)), std::abs(g.coord(b))) > 0.4 * g.L) outer += m;
        }
    return total > 0.0 ? outer / total : 0.0;
}

namespace detail {

/// x1 * a + x2 * b evaluated pointwise, with (c1, c2) the coordinate weights.
inline SpectralField coordinate_combination(const SpectralField& da, const SpectralField& db, double c1a, double c2a,
                                            double c1b, double c2b) {
    const auto& g = da.grid();
    CVec pa = to_physical(da), pb = to_physical(db);
    for (int a = 0; a < g.n; ++a)
        for (int b = 0; b < g.n; ++b) {
            const double x1 = g.coord(a), x2 = g.coord(b);
            const std::size_t i = g.idx(a, b);
            pa[i] = (c1a * x1 + c2a * x2) * pa[i] + (c1b * x1 + c2b * x2) * pb[i];
        }
    const bool real = da.is_real() && db.is_real();
    if (real)
        for (auto& v : pa) v = v.real();
    return forward_transform(std::span<const cplx>(pa.data(), pa.size()), g, real);
}

} // namespace detail

/// Omega = x1 d2 - x2 d1, Sigma = x1 d1 + x2 d2 on centred coordinates; derivatives are spectral.
inline SpectralField apply_vector_field(const SpectralField& f, VectorField tag, MarginReport* report = nullptr) {
    switch (tag) {
        case VectorField::Partial1: return partial(f, 0);
        case VectorField::Partial2: return partial(f, 1);
        case VectorField::Omega:
        case VectorField::Sigma: break;
    }
    if (report) report->absorb(margin_fraction(f));
    const SpectralField d1 = partial(f, 0), d2 = partial(f, 1);
    if (tag == VectorField::Omega) return detail::coordinate_combination(d1, d2, 0.0, -1.0, 1.0, 0.0);
    return detail::coordinate_combination(d1, d2, 1.0, 0.0, 0.0, 1.0);
}

inline SpectralField apply_power(SpectralField f, VectorField tag, int power, MarginReport* report = nullptr) {
    for (int i = 0; i < power; ++i) f = apply_vector_field(f, tag, report);
    return f;
}

/// ||(1 + Lambda^k) f||_p with p = 2 or p = infinity (encoded as 0). k = 0 is the plain L^p norm.
inline double sobolev_norm(const SpectralField& f, double k, int p) {
    // lambda_pow drops the zero mode, so (1 + 0^k) c_0 = c_0 as required.
    const SpectralField g = (k == 0.0) ? f : f + lambda_pow(f, k);
    return p == 2 ? l2_norm(g) : sup_norm(g);
}

inline constexpr int p_infinity = 0;

/// sum_{|gamma| <= ell} ||Gamma^gamma f||_{W^{k,p}} with Gamma^gamma = S^{g1} Omega^{g2} d^{3 g3}.
/// `scaling_powers[i]` must hold S^i f for i <= ell; S is Sigma here and Sigma + (3/2) t d_t in
/// the evolution diagnostics. Uses [S, d] = -d and [S, Omega] = 0 so that
///   S^{g1} Omega^{g2} d^beta f = Omega^{g2} d^beta (S - |beta|)^{g1} f.
/// Every third-order monomial d1^a d2^b (a + b = 3 g3) is summed.
inline double weighted_norm_from_powers(const std::vector<SpectralField>& scaling_powers, double k, int p, int ell,
                                        MarginReport* report = nullptr) {
    if (static_cast<int>(scaling_powers.size()) < ell + 1)
        throw PreconditionError("weighted norm: need scaling-field powers up to ell");
    double total = 0.0;
    for (int g1 = 0; g1 <= ell; ++g1) {
        for (int g2 = 0; g1 + g2 <= ell; ++g2) {
            for (int g3 = 0; g1 + g2 + g3 <= ell; ++g3) {
                const int order = 3 * g3;
                for (int a = 0; a <= order; ++a) {
                    // (S - order)^{g1} f by the binomial expansion
                    SpectralField w = SpectralField::zeros(scaling_powers[0].grid(), scaling_powers[0].is_real());
                    double binom = 1.0;
                    for (int i = 0; i <= g1; ++i) {
                        if (i > 0) binom = binom * (g1 - i + 1) / i;
                        const double c = binom * std::pow(-static_cast<double>(order), g1 - i);
                        if (c != 0.0) w += c * scaling_powers[i];
                    }
                    w = apply_power(w, VectorField::Partial1, a);
                    w = apply_power(w, VectorField::Partial2, order - a);
                    w = apply_power(w, VectorField::Omega, g2, report);
                    total += sobolev_norm(w, k, p);
                }
            }
        }
    }
    return total;
}

/// Weighted Sobolev norm with the spatial scaling field Sigma standing in for S.
inline double weighted_sobolev_norm(const SpectralField& f, double k, int p, int ell, MarginReport* report = nullptr) {
    if (k < 0.0) throw PreconditionError("weighted_sobolev_norm: k must be >= 0");
    if (ell < 0) throw PreconditionError("weighted_sobolev_norm: ell must be >= 0");
    std::vector<SpectralField> powers{f};
    for (int i = 1; i <= ell; ++i) powers.push_back(apply_vector_field(powers.back(), VectorField::Sigma, report));
    return weighted_norm_from_powers(powers, k, p, ell, report);
}

} // namespace capwave
