#pragma once

#include <cmath>
#include <complex>

#include "capwave/error.hpp"
#include "capwave/grid.hpp"

namespace capwave {

/// Standard Bessel function J_m(s) for integer m (negative orders by J_{-m} = (-1)^m J_m).
/// Backed by the C++17 special functions; accuracy is checked against a multiprecision series.
inline double bessel_j_std(int m, double s) {
    if (s < 0.0) throw PreconditionError("bessel_j: s must be >= 0");
    if (std::abs(m) > 1000) throw PreconditionError("bessel_j: order too large");
    const int am = std::abs(m);
    if (s == 0.0) return am == 0 ? 1.0 : 0.0;
    const double v = std::cyl_bessel_j(static_cast<double>(am), s);
    return (m < 0 && (am % 2)) ? -v : v;
}

/// Circle-integral normalization: int_{S^1} e^{i(s cos(theta) + m theta)} d theta = 2 pi i^m J_m(s).
inline std::complex<double> bessel_j(int m, double s) {
    static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return 2.0 * pi * ipow[((m % 4) + 4) % 4] * bessel_j_std(m, s);
}

struct BesselEnvelope {
    double constant = 0.0;  // max over the scan of |J_m(s)| <s>^{1/2} / <m>^2 (circle normalization)
    int argmax_m = 0;
    double argmax_s = 0.0;
};

/// Envelope scan over 0 <= m <= m_max and s in [0, s_max] with step ds; <x> = (1 + x^2)^{1/2}.
inline BesselEnvelope bessel_envelope(int m_max, double s_max, double ds = 0.05) {
    if (m_max < 0 || !(s_max > 0.0) || !(ds > 0.0)) throw PreconditionError("bessel_envelope: bad scan");
    BesselEnvelope e;
    const long steps = std::lround(s_max / ds);
    for (int m = 0; m <= m_max; ++m) {
        const double jm = 1.0 + double(m) * m;
        for (long k = 0; k <= steps; ++k) {
            const double s = k * ds;
            const double v = std::abs(bessel_j(m, s)) * std::sqrt(std::sqrt(1.0 + s * s)) / jm;
            if (v > e.constant) e = {v, m, s};
        }
    }
    return e;
}

} // namespace capwave
