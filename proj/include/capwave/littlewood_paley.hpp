#pragma once

#include <cmath>

#include "capwave/grid.hpp"

namespace capwave {

/// C-infinity step: 0 for x <= 0, 1 for x >= 1, built from e^{-1/x}.
inline double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

/// Smooth plateau: 1 on [0, lo], 0 on [hi, inf).
inline double smooth_plateau(double r, double lo, double hi) { return 1.0 - smooth_step((r - lo) / (hi - lo)); }

/// The cutoff rho(a): 1 for a <= 1, 0 for a >= 2.
inline double rho_cutoff(double a) { return smooth_plateau(a, 1.0, 2.0); }

/// Low-pass chi: 1 on |xi| <= 3/4, 0 on |xi| >= 4/3.
inline double lp_chi(double r) { return smooth_plateau(r, 0.75, 4.0 / 3.0); }

/// Dyadic bump theta(r) = chi(r/2) - chi(r), supported in [3/4, 8/3];
/// sum_j theta(r / 2^j) = 1 for r > 0.
inline double lp_theta(double r) { return lp_chi(0.5 * r) - lp_chi(r); }

enum class LpKind { Annulus, Below, AtOrAbove };

/// P_j, P_{<j} = chi(D/2^j), P_{>=j} = 1 - P_{<j}.
inline SpectralField lp_project(const SpectralField& f, int j, LpKind kind) {
    const auto& w = wavenumbers(f.grid());
    const double s = std::ldexp(1.0, -j);
    SpectralField out(f.grid(), f.is_real());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = w.kabs[i] * s;
        double m = 0.0;
        switch (kind) {
            case LpKind::Annulus: m = lp_theta(r); break;
            case LpKind::Below: m = lp_chi(r); break;
            case LpKind::AtOrAbove: m = 1.0 - lp_chi(r); break;
        }
        out[i] = m * f[i];
    }
    return out;
}

/// Dyadic levels j whose annulus meets the nonzero grid modes of g.
inline std::pair<int, int> lp_relevant_range(const GridSpec& g) {
    const auto& w = wavenumbers(g);
    double kmax = 0.0;
    for (double k : w.kabs) kmax = std::max(kmax, k);
    const int jlo = static_cast<int>(std::floor(std::log2(g.dk() / (8.0 / 3.0)))) - 1;
    const int jhi = static_cast<int>(std::ceil(std::log2(kmax / 0.75))) + 1;
    return {jlo, jhi};
}

} // namespace capwave
