#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "capwave/error.hpp"

namespace capwave {

using Vec2 = std::array<double, 2>;

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a[0], s * a[1]}; }
inline double dot(Vec2 a, Vec2 b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(Vec2 a) { return std::hypot(a[0], a[1]); }
inline Vec2 rotate(Vec2 a, double th) {
    const double c = std::cos(th), s = std::sin(th);
    return {c * a[0] - s * a[1], s * a[0] + c * a[1]};
}

/// Homogeneity degree and vanishing orders as xi, eta, xi - eta -> 0.
struct SymbolClass {
    double beta = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
};

/// A bilinear Fourier symbol m(xi, eta). Points on the singular rays evaluate to 0.
struct BilinearSymbol {
    std::string name;
    std::function<std::complex<double>(Vec2, Vec2)> eval;
    SymbolClass declared;

    std::complex<double> operator()(Vec2 xi, Vec2 eta) const { return eval(xi, eta); }
};

// ---------------------------------------------------------------------------
// The two basic quadratic symbols

/// xi.(xi - eta) - |xi||xi - eta|
inline double m1_tilde(Vec2 xi, Vec2 eta) {
    const Vec2 d = xi - eta;
    return dot(xi, d) - norm(xi) * norm(d);
}

/// eta.(xi - eta) + |eta||xi - eta|
inline double m2_tilde(Vec2 xi, Vec2 eta) {
    const Vec2 d = xi - eta;
    return dot(eta, d) + norm(eta) * norm(d);
}

/// |xi|^{1/2} |eta|^{-1/2} m1_tilde; zero at eta = 0.
inline double m1(Vec2 xi, Vec2 eta) {
    const double ne = norm(eta);
    if (ne == 0.0) return 0.0;
    return std::sqrt(norm(xi) / ne) * m1_tilde(xi, eta);
}

inline double m2(Vec2 xi, Vec2 eta) { return m2_tilde(xi, eta); }

/// m1(xi, xi - eta)
inline double m1_swapped(Vec2 xi, Vec2 eta) { return m1(xi, xi - eta); }

// ---------------------------------------------------------------------------
// Phases phi_{t1 t2} = |xi|^{3/2} + t1 |eta|^{3/2} + t2 |xi - eta|^{3/2}

struct Signs {
    int t1 = 1;
    int t2 = 1;

    std::string label() const { return std::string(t1 > 0 ? "+" : "-") + (t2 > 0 ? "+" : "-"); }
};

inline Signs parse_signs(const std::string& s) {
    if (s == "++") return {1, 1};
    if (s == "+-") return {1, -1};
    if (s == "-+") return {-1, 1};
    if (s == "--") return {-1, -1};
    throw ConfigError("unknown sign pair '" + s + "' (expected ++, +-, -+ or --)");
}

inline double pow32(double r) { return r * std::sqrt(r); }

inline double phase(Signs s, Vec2 xi, Vec2 eta) {
    return pow32(norm(xi)) + s.t1 * pow32(norm(eta)) + s.t2 * pow32(norm(xi - eta));
}

namespace detail {
/// y |y|^{-1/2}, the gradient of (2/3)|y|^{3/2}; zero at y = 0.
inline Vec2 half_power_direction(Vec2 y) {
    const double r = norm(y);
    if (r == 0.0) return {0.0, 0.0};
    return (1.0 / std::sqrt(r)) * y;
}
} // namespace detail

/// grad_eta phi = t1 (3/2) eta |eta|^{-1/2} - t2 (3/2) (xi - eta) |xi - eta|^{-1/2}.
inline Vec2 grad_eta_phase(Signs s, Vec2 xi, Vec2 eta) {
    const Vec2 a = detail::half_power_direction(eta), b = detail::half_power_direction(xi - eta);
    return (1.5 * s.t1) * a - (1.5 * s.t2) * b;
}

/// Hessian of phi in eta, row-major (h11, h12, h22).
inline std::array<double, 3> hess_eta_phase(Signs s, Vec2 xi, Vec2 eta) {
    auto block = [](Vec2 y) -> std::array<double, 3> {
        const double r = norm(y);
        if (r == 0.0) return {0.0, 0.0, 0.0};
        const double w = 1.0 / std::sqrt(r);
        const double u1 = y[0] / r, u2 = y[1] / r;
        return {w * (1.0 - 0.5 * u1 * u1), -w * 0.5 * u1 * u2, w * (1.0 - 0.5 * u2 * u2)};
    };
    const auto a = block(eta), b = block(xi - eta);
    std::array<double, 3> h{};
    for (int i = 0; i < 3; ++i) h[i] = 1.5 * (s.t1 * a[i] + s.t2 * b[i]);
    return h;
}

// ---------------------------------------------------------------------------
// Quadratic symbols of the complex form. The phase phi_{t1 t2} goes with the pair
// (f_{-t1}(eta), f_{-t2}(xi - eta)), where f_+ = u and f_- = conj(u):
//   m_{--}: (u, u),  m_{++}: (ubar, ubar),  m_{+-}: (ubar, u).

inline std::complex<double> m_mm(Vec2 xi, Vec2 eta) {
    return {0.0, -0.25 * m1(xi, eta) - 0.125 * m2(xi, eta)};
}

inline std::complex<double> m_pp(Vec2 xi, Vec2 eta) {
    return {0.0, 0.25 * m1(xi, eta) - 0.125 * m2(xi, eta)};
}

inline std::complex<double> m_pm(Vec2 xi, Vec2 eta) {
    return {0.0, -0.25 * m1(xi, eta) + 0.25 * m1_swapped(xi, eta) + 0.25 * m2(xi, eta)};
}

inline std::complex<double> m_signs(Signs s, Vec2 xi, Vec2 eta) {
    if (s.t1 > 0 && s.t2 > 0) return m_pp(xi, eta);
    if (s.t1 < 0 && s.t2 < 0) return m_mm(xi, eta);
    if (s.t1 > 0 && s.t2 < 0) return m_pm(xi, eta);
    // (-+) is (+-) with the two inputs exchanged: eta <-> xi - eta.
    return m_pm(xi, xi - eta);
}

// ---------------------------------------------------------------------------
// Gradients in eta, used by the integration-by-parts symbols

namespace detail {

inline Vec2 grad_eta_m1(Vec2 xi, Vec2 eta) {
    const double ne = norm(eta), nx = norm(xi);
    const Vec2 b = xi - eta;
    const double nb = norm(b);
    if (ne == 0.0 || nb == 0.0) return {0.0, 0.0};
    const Vec2 dmt = (nx / nb) * b - xi;  // grad_eta of m1_tilde
    const double mt = m1_tilde(xi, eta);
    return std::sqrt(nx) * ((-0.5 * mt * std::pow(ne, -2.5)) * eta + std::pow(ne, -0.5) * dmt);
}

inline Vec2 grad_eta_m1_swapped(Vec2 xi, Vec2 eta) {
    // m1(xi, xi - eta) = |xi|^{1/2} |b|^{-1/2} (xi.eta - |xi||eta|), b = xi - eta
    const double ne = norm(eta), nx = norm(xi);
    const Vec2 b = xi - eta;
    const double nb = norm(b);
    if (ne == 0.0 || nb == 0.0) return {0.0, 0.0};
    const double core = dot(xi, eta) - nx * ne;
    const Vec2 dcore = xi - (nx / ne) * eta;
    return std::sqrt(nx) * ((0.5 * core * std::pow(nb, -2.5)) * b + std::pow(nb, -0.5) * dcore);
}

inline Vec2 grad_eta_m2(Vec2 xi, Vec2 eta) {
    const double ne = norm(eta);
    const Vec2 b = xi - eta;
    const double nb = norm(b);
    if (ne == 0.0 || nb == 0.0) return {0.0, 0.0};
    return b - eta + (nb / ne) * eta - (ne / nb) * b;
}

} // namespace detail

/// grad_eta of m_{t1 t2}; the (-+) pair is not needed and rejected.
inline std::array<std::complex<double>, 2> grad_eta_m_signs(Signs s, Vec2 xi, Vec2 eta) {
    const Vec2 g1 = detail::grad_eta_m1(xi, eta), g2 = detail::grad_eta_m2(xi, eta);
    Vec2 g{};
    if (s.t1 > 0 && s.t2 > 0) g = 0.25 * g1 - 0.125 * g2;
    else if (s.t1 < 0 && s.t2 < 0) g = -0.25 * g1 - 0.125 * g2;
    else if (s.t1 > 0 && s.t2 < 0) g = -0.25 * g1 + 0.25 * detail::grad_eta_m1_swapped(xi, eta) + 0.25 * g2;
    else throw PreconditionError("grad_eta_m_signs: (-+) is (+-) with swapped inputs");
    return {std::complex<double>(0.0, g[0]), std::complex<double>(0.0, g[1])};
}

// ---------------------------------------------------------------------------
// Named symbols with declared classes

/// Normal-form symbol m / phi; zero where phi vanishes.
inline std::complex<double> normal_form(Signs s, Vec2 xi, Vec2 eta) {
    const double p = phase(s, xi, eta);
    if (p == 0.0) return 0.0;
    return m_signs(s, xi, eta) / p;
}

/// Vector symbol m grad_eta phi / |grad_eta phi|^2; zero where the gradient vanishes.
inline std::array<std::complex<double>, 2> eta_ibp(Signs s, Vec2 xi, Vec2 eta) {
    const Vec2 g = grad_eta_phase(s, xi, eta);
    const double g2 = dot(g, g);
    if (g2 == 0.0) return {0.0, 0.0};
    const std::complex<double> m = m_signs(s, xi, eta);
    return {m * (g[0] / g2), m * (g[1] / g2)};
}

/// div_eta of eta_ibp from the closed forms:
///   grad m . g / |g|^2 + m (tr H / |g|^2 - 2 g.H g / |g|^4).
inline std::complex<double> eta_ibp_div(Signs s, Vec2 xi, Vec2 eta) {
    const Vec2 g = grad_eta_phase(s, xi, eta);
    const double g2 = dot(g, g);
    if (g2 == 0.0 || norm(eta) == 0.0 || norm(xi - eta) == 0.0) return 0.0;
    const auto H = hess_eta_phase(s, xi, eta);
    const auto dm = grad_eta_m_signs(s, xi, eta);
    const std::complex<double> m = m_signs(s, xi, eta);
    const double tr = H[0] + H[2];
    const double gHg = H[0] * g[0] * g[0] + 2.0 * H[1] * g[0] * g[1] + H[2] * g[1] * g[1];
    return (dm[0] * g[0] + dm[1] * g[1]) / g2 + m * (tr / g2 - 2.0 * gHg / (g2 * g2));
}

/// Registry of the named symbols. The eta-IBP entry evaluates the modulus |m| / |grad_eta phi|
/// of the vector symbol, which carries its vanishing orders.
inline BilinearSymbol symbol_by_name(const std::string& name) {
    using C = std::complex<double>;
    if (name == "m1") return {name, [](Vec2 x, Vec2 e) { return C(m1(x, e)); }, {2.0, 1.5, 1.5, 1.0}};
    if (name == "m2") return {name, [](Vec2 x, Vec2 e) { return C(m2(x, e)); }, {2.0, 2.0, 1.0, 1.0}};
    if (name == "m1_swapped")
        return {name, [](Vec2 x, Vec2 e) { return C(m1_swapped(x, e)); }, {2.0, 1.5, 1.0, 1.5}};
    if (name == "m_pp") return {name, m_pp, {2.0, 1.5, 1.0, 1.0}};
    if (name == "m_mm") return {name, m_mm, {2.0, 1.5, 1.0, 1.0}};
    if (name == "m_pm") return {name, m_pm, {2.0, 1.5, 1.0, 1.0}};
    if (name == "nf_pp")
        return {name, [](Vec2 x, Vec2 e) { return normal_form({1, 1}, x, e); }, {0.5, 1.5, 1.0, 1.0}};
    if (name == "ibp_pm")
        return {name,
                [](Vec2 x, Vec2 e) {
                    const auto v = eta_ibp({1, -1}, x, e);
                    return C(std::sqrt(std::norm(v[0]) + std::norm(v[1])));
                },
                {1.5, 0.5, 1.0, 1.0}};
    if (name == "one") return {name, [](Vec2, Vec2) { return C(1.0); }, {0.0, 0.0, 0.0, 0.0}};
    throw ConfigError("unknown symbol '" + name + "'");
}

inline const std::vector<std::string>& certified_symbol_names() {
    static const std::vector<std::string> names{"m1", "m2", "m1_swapped", "m_pp", "m_mm", "m_pm", "nf_pp", "ibp_pm"};
    return names;
}

} // namespace capwave
