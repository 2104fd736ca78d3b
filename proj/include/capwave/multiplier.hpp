#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <type_traits>

#include "capwave/grid.hpp"

namespace capwave {

/// What happens to the xi = 0 coefficient under a Fourier multiplier.
enum class ZeroMode {
    Evaluate,  // use symbol(0, 0)
    Zero,      // map to 0 (negative powers of Lambda, Y)
};

/// m(D) f: coefficient-wise product with symbol(k1, k2).
template <class Symbol>
SpectralField apply_multiplier(const SpectralField& f, Symbol&& symbol, ZeroMode zero = ZeroMode::Evaluate,
                               bool preserves_reality = false) {
    const auto& g = f.grid();
    const auto& w = wavenumbers(g);
    SpectralField out(g, f.is_real() && preserves_reality);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const bool origin = w.m1[i] == 0 && w.m2[i] == 0;
        if (origin && zero == ZeroMode::Zero) {
            out[i] = 0.0;
            continue;
        }
        const cplx s = symbol(w.k1[i], w.k2[i]);
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            if (origin) throw PreconditionError("apply_multiplier: symbol singular at xi = 0; declare ZeroMode::Zero");
            throw PreconditionError("apply_multiplier: non-finite symbol at mode (" + std::to_string(w.m1[i]) + "," +
                                    std::to_string(w.m2[i]) + ")");
        }
        out[i] = s * f[i];
    }
    return out;
}

/// Runtime multiplier descriptor used by configs and tests.
struct Multiplier {
    std::function<cplx(double, double)> symbol;
    ZeroMode zero = ZeroMode::Evaluate;
    bool real_symbol_even = true;  // real and even symbols keep real fields real

    SpectralField operator()(const SpectralField& f) const {
        return apply_multiplier(f, symbol, zero, real_symbol_even);
    }
};

// Fast paths for the multipliers used in inner loops.

/// Lambda^alpha = |D|^alpha; zero mode mapped to 0 for alpha <= 0.
namespace detail {
inline std::string exact_key(const char* tag, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%a", tag, v);
    return buf;
}
} // namespace detail

inline SpectralField lambda_pow(const SpectralField& f, double alpha) {
    SpectralField out(f.grid(), f.is_real());
    if (alpha == 0.0) {
        out = f;
        out[0] = 0.0;
        return out;
    }
    const RVec& t = radial_table(f.grid(), detail::exact_key("pow", alpha),
                                 [alpha](double k) { return k > 0.0 ? std::pow(k, alpha) : 0.0; });
    for (std::size_t i = 1; i < f.size(); ++i) out[i] = f[i] * t[i];
    out[0] = 0.0;  // 0^alpha = 0 for alpha > 0; zero-mode rule otherwise
    return out;
}

/// Y(D) = Lambda^iota + Lambda^{-iota}, zero mode dropped.
inline SpectralField apply_Y(const SpectralField& f, double iota = 0.05) {
    SpectralField out(f.grid(), f.is_real());
    const RVec& t = radial_table(f.grid(), detail::exact_key("Y", iota), [iota](double k) {
        if (k == 0.0) return 0.0;
        const double p = std::pow(k, iota);
        return p + 1.0 / p;
    });
    for (std::size_t i = 1; i < f.size(); ++i) out[i] = f[i] * t[i];
    return out;
}

/// d/dx_axis (axis 0 or 1).
inline SpectralField partial(const SpectralField& f, int axis) {
    const auto& w = wavenumbers(f.grid());
    // The Nyquist mode of an odd derivative has no Hermitian partner, so its symbol is zero.
    const RVec& k = axis == 0 ? w.d1 : w.d2;
    SpectralField out(f.grid(), f.is_real());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = cplx(-k[i] * f[i].imag(), k[i] * f[i].real());
    return out;
}

inline SpectralField laplacian(const SpectralField& f) {
    const auto& w = wavenumbers(f.grid());
    SpectralField out(f.grid(), f.is_real());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = -(w.kabs[i] * w.kabs[i]) * f[i];
    return out;
}

/// Divergence of (v1, v2).
inline SpectralField divergence(const SpectralField& v1, const SpectralField& v2) {
    return partial(v1, 0) + partial(v2, 1);
}

/// 2/3-rule truncation.
inline SpectralField dealias(SpectralField f) {
    const auto& w = wavenumbers(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!w.keep[i]) f[i] = 0.0;
    return f;
}

/// Dealiased pointwise product.
inline SpectralField multiply(const SpectralField& f, const SpectralField& g) {
    f.check_same(g);
    CVec a = to_physical(f), b = to_physical(g);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    const bool real = f.is_real() && g.is_real();
    if (real)
        for (auto& v : a) v = v.real();
    return dealias(forward_transform(std::span<const cplx>(a.data(), a.size()), f.grid(), real));
}

/// Transform physical samples (real) back and dealias.
inline SpectralField from_physical_real(const RVec& v, const GridSpec& g) {
    return detail::forward_real(std::span<const double>(v), g, true);
}

// Norms in the continuum normalisation: ||f||_2^2 = int |f|^2 dx = L^2 sum |c_m|^2.

inline double l2_norm(const SpectralField& f) {
    double s = 0.0;
    for (const auto& c : f.coeffs()) s += std::norm(c);
    return f.grid().L * std::sqrt(s);
}

/// <f, g> = int f conj(g) dx.
inline cplx inner(const SpectralField& f, const SpectralField& g) {
    f.check_same(g);
    cplx s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * std::conj(g[i]);
    return s * (f.grid().L * f.grid().L);
}

/// Grid sup norm (no off-grid interpolation).
inline double sup_norm(const SpectralField& f) {
    double m = 0.0;
    for (const auto& v : to_physical(f)) m = std::max(m, std::abs(v));
    return m;
}

/// Grid L^2 norm computed from the samples (Parseval cross-check).
inline double l2_norm_physical(const SpectralField& f) {
    double s = 0.0;
    for (const auto& v : to_physical(f)) s += std::norm(v);
    return std::sqrt(s * f.grid().cell_area());
}

} // namespace capwave
