#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <boost/math/interpolators/cubic_hermite.hpp>

#include "capwave/bessel.hpp"
#include "capwave/littlewood_paley.hpp"
#include "capwave/multiplier.hpp"
#include "capwave/parallel.hpp"
#include "capwave/pseudo_product.hpp"
#include "capwave/quadrature.hpp"
#include "capwave/symbols.hpp"

// Free evolution e^{it Lambda^{3/2}} on the plane through circular harmonics. Transform convention:
//   f^(xi) = int f(x) e^{-i x.xi} dx,   f(x) = (2 pi)^{-2} int f^(xi) e^{i x.xi} d xi,
//   f^(rho, theta) = sum_m f^_m(rho) e^{i m theta}.

namespace capwave {

/// A radial function rho -> f^(rho) on [rho_min, rho_max], analytic or tabulated (cubic Hermite).
class RadialProfile {
public:
    using Fn = std::function<cplx(double)>;

    static RadialProfile analytic(std::string name, Fn f, Fn df, double rho_max, double rho_min = 0.0) {
        if (!(rho_max > rho_min) || rho_min < 0.0) throw PreconditionError("radial profile: bad range");
        RadialProfile p;
        p.name_ = std::move(name);
        p.f_ = std::move(f);
        p.df_ = std::move(df);
        p.lo_ = rho_min;
        p.hi_ = rho_max;
        return p;
    }

    static RadialProfile tabulated(std::string name, std::vector<double> nodes, const std::vector<cplx>& values,
                                   const std::vector<cplx>& derivs) {
        if (nodes.size() < 2 || values.size() != nodes.size() || derivs.size() != nodes.size())
            throw PreconditionError("radial profile: node/value count mismatch");
        if (!(nodes.front() > 0.0)) throw PreconditionError("radial profile: nodes must be positive");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!(nodes[i] > nodes[i - 1])) throw PreconditionError("radial profile: nodes must increase");
        std::vector<double> re(nodes.size()), im(nodes.size()), dre(nodes.size()), dim(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            re[i] = values[i].real();
            im[i] = values[i].imag();
            dre[i] = derivs[i].real();
            dim[i] = derivs[i].imag();
        }
        RadialProfile p;
        p.name_ = std::move(name);
        p.lo_ = nodes.front();
        p.hi_ = nodes.back();
        auto x2 = nodes;
        using Herm = boost::math::interpolators::cubic_hermite<std::vector<double>>;
        auto hr = std::make_shared<Herm>(std::move(nodes), std::move(re), std::move(dre));
        auto hi = std::make_shared<Herm>(std::move(x2), std::move(im), std::move(dim));
        const double lo = p.lo_, top = p.hi_;
        p.f_ = [hr, hi, lo, top](double r) { return (r < lo || r > top) ? cplx(0.0) : cplx((*hr)(r), (*hi)(r)); };
        p.df_ = [hr, hi, lo, top](double r) {
            return (r < lo || r > top) ? cplx(0.0) : cplx(hr->prime(r), hi->prime(r));
        };
        return p;
    }

    const std::string& name() const { return name_; }
    double rho_min() const { return lo_; }
    double rho_max() const { return hi_; }

    cplx operator()(double rho) const { return (rho < lo_ || rho > hi_) ? cplx(0.0) : f_(rho); }

    /// d/d rho; central differences when no derivative was supplied.
    cplx derivative(double rho) const {
        if (rho < lo_ || rho > hi_) return 0.0;
        if (df_) return df_(rho);
        const double h = 1e-5 * std::max(rho, 1e-3);
        const double a = std::max(lo_, rho - h), b = std::min(hi_, rho + h);
        return (f_(b) - f_(a)) / (b - a);
    }

private:
    std::string name_;
    Fn f_, df_;
    double lo_ = 0.0, hi_ = 0.0;
};

// Built-in radial profiles.

/// f(x) = exp(-|x|^2 / (2 w^2)):  f^ = 2 pi w^2 exp(-w^2 rho^2 / 2).
inline RadialProfile gaussian_profile(double w = 1.0) {
    if (!(w > 0.0)) throw ConfigError("gaussian profile: width must be > 0");
    const double c = 2.0 * pi * w * w;
    return RadialProfile::analytic(
        "gaussian", [=](double r) { return cplx(c * std::exp(-0.5 * w * w * r * r)); },
        [=](double r) { return cplx(-c * w * w * r * std::exp(-0.5 * w * w * r * r)); }, 40.0 / w);
}

/// 2 pi rho^{-a} exp(-rho^2 / 2): a power singularity at the origin, smooth elsewhere.
inline RadialProfile power_gaussian_profile(double a) {
    if (!(a >= 0.0 && a < 2.0)) throw ConfigError("power-gaussian profile: need 0 <= a < 2");
    return RadialProfile::analytic(
        "power_gaussian", [=](double r) { return r > 0.0 ? cplx(2.0 * pi * std::pow(r, -a) * std::exp(-0.5 * r * r)) : 0.0; },
        [=](double r) {
            return r > 0.0 ? cplx(2.0 * pi * std::exp(-0.5 * r * r) * (-a * std::pow(r, -a - 1.0) - std::pow(r, 1.0 - a)))
                           : 0.0;
        },
        40.0);
}

/// Decay test data for the beta-family: the smooth Gaussian for beta = 0, otherwise the profile whose
/// weighted right side is barely finite (a = 1/2 + beta - delta), which saturates the t^{-1+2beta/3} rate.
inline RadialProfile decay_profile_for_beta(double beta, double delta = 0.1) {
    if (beta < 0.0 || beta > 0.5) throw ConfigError("decay profile: beta must lie in [0, 1/2]");
    if (beta == 0.0) return gaussian_profile(1.0);
    return power_gaussian_profile(0.5 + beta - delta);
}

struct HarmonicDecomposition {
    std::map<int, RadialProfile> profiles;
    double horizon = std::numeric_limits<double>::infinity();  // last trustworthy time (grid-derived data)

    int m_max() const {
        int m = 0;
        for (const auto& [k, p] : profiles) m = std::max(m, std::abs(k));
        return m;
    }
    double rho_max() const {
        double r = 0.0;
        for (const auto& [k, p] : profiles) r = std::max(r, p.rho_max());
        return r;
    }
};

inline HarmonicDecomposition radial_decomposition(RadialProfile p) {
    HarmonicDecomposition d;
    d.profiles.emplace(0, std::move(p));
    return d;
}

/// Harmonics of a Fourier transform given on the plane, by the trapezoid rule on circles.
/// Throws NumericalError when the energy beyond m_max exceeds 1e-6 of the total.
inline HarmonicDecomposition circular_harmonics(const std::function<cplx(Vec2)>& fhat, int m_max,
                                                const std::vector<double>& rho_nodes, int n_theta = 0) {
    if (m_max < 0) throw PreconditionError("circular_harmonics: m_max must be >= 0");
    if (rho_nodes.size() < 2) throw PreconditionError("circular_harmonics: need at least two radii");
    if (n_theta == 0) n_theta = std::max(64, 8 * (m_max + 1));
    const int nm = 2 * m_max + 1;
    const std::size_t nr = rho_nodes.size();
    // coefficients at rho, rho - h, rho + h for the Hermite derivative data
    std::vector<std::vector<cplx>> c(3 * nr, std::vector<cplx>(nm));
    std::vector<double> tail(nr, 0.0), total(nr, 0.0);
    parallel_for(3 * nr, [&](std::size_t q) {
        const std::size_t i = q / 3;
        const double rho0 = rho_nodes[i], h = 1e-4 * std::max(rho0, 1e-2);
        const double rho = rho0 + (q % 3 == 0 ? 0.0 : (q % 3 == 1 ? -h : h));
        std::vector<cplx> vals(n_theta);
        for (int k = 0; k < n_theta; ++k) {
            const double th = 2.0 * pi * k / n_theta;
            vals[k] = fhat({rho * std::cos(th), rho * std::sin(th)});
        }
        double all = 0.0, kept = 0.0;
        for (int m = -(n_theta / 2) + 1; m < n_theta / 2; ++m) {
            cplx s = 0.0;
            for (int k = 0; k < n_theta; ++k) s += vals[k] * std::polar(1.0, -2.0 * pi * m * k / n_theta);
            s /= static_cast<double>(n_theta);
            all += std::norm(s);
            if (std::abs(m) <= m_max) {
                kept += std::norm(s);
                c[q][m + m_max] = s;
            }
        }
        if (q % 3 == 0) {
            tail[i] = all - kept;
            total[i] = all;
        }
    });
    double t = 0.0, a = 0.0;
    for (std::size_t i = 0; i < nr; ++i) {
        t += tail[i] * rho_nodes[i];
        a += total[i] * rho_nodes[i];
    }
    if (a > 0.0 && t > 1e-6 * a)
        throw NumericalError("circular_harmonics: angular energy beyond m_max = " + std::to_string(m_max) + " is " +
                                 std::to_string(t / a) + " of the total",
                             t / a);
    HarmonicDecomposition d;
    for (int m = -m_max; m <= m_max; ++m) {
        std::vector<cplx> v(nr), dv(nr);
        for (std::size_t i = 0; i < nr; ++i) {
            const double h = 1e-4 * std::max(rho_nodes[i], 1e-2);
            v[i] = c[3 * i][m + m_max];
            dv[i] = (c[3 * i + 2][m + m_max] - c[3 * i + 1][m + m_max]) / (2.0 * h);
        }
        d.profiles.emplace(m, RadialProfile::tabulated("m=" + std::to_string(m), rho_nodes, v, dv));
    }
    return d;
}

/// Continuous Fourier transform of a localized grid field, f^(xi) ~ dx^2 sum_x f(x) e^{-i x.xi}.
inline std::function<cplx(Vec2)> grid_fourier_transform(const SpectralField& f) {
    const GridSpec g = f.grid();
    auto vals = std::make_shared<CVec>(to_physical(f));
    return [g, vals](Vec2 xi) {
        std::vector<cplx> e1(g.n), e2(g.n);
        for (int a = 0; a < g.n; ++a) {
            e1[a] = std::polar(1.0, -g.coord(a) * xi[0]);
            e2[a] = std::polar(1.0, -g.coord(a) * xi[1]);
        }
        cplx s = 0.0;
        for (int a = 0; a < g.n; ++a) {
            cplx row = 0.0;
            for (int b = 0; b < g.n; ++b) row += (*vals)[g.idx(a, b)] * e2[b];
            s += e1[a] * row;
        }
        return s * g.cell_area();
    };
}

/// Decomposition of a grid field; the horizon is 0.5 L over the largest resolved group speed.
inline HarmonicDecomposition circular_harmonics(const SpectralField& f, int m_max, const std::vector<double>& rho_nodes) {
    const auto& g = f.grid();
    const double kmax = g.dk() * (g.n / 3);
    for (double r : rho_nodes)
        if (r > std::sqrt(2.0) * g.dk() * (g.n / 2)) throw PreconditionError("circular_harmonics: radius beyond the grid band");
    HarmonicDecomposition d = circular_harmonics(grid_fourier_transform(f), m_max, rho_nodes);
    d.horizon = 0.5 * g.L / (1.5 * std::sqrt(kmax));
    return d;
}

// ---------------------------------------------------------------------------
// Point evaluation

struct PointValue {
    cplx value = 0.0;
    double error = 0.0;
    int panels = 0;
};

/// Panel breakpoints of the radial integral: the stationary point, the regime boundaries of the phase
/// rho^{3/2} - R rho (R = r/t), and the low-frequency scales 1/(R t) and t^{-2/3}.
inline std::vector<double> radial_breaks(double t, double r, double lo, double hi) {
    std::vector<double> b{lo, hi};
    if (t > 0.0) {
        const double R = r / t;
        if (R > 0.0) {
            b.push_back(4.0 * R * R / 9.0);
            b.push_back(2.0 * R * R / 9.0);
            b.push_back(10.0 * R * R);
            b.push_back(1.0 / (R * t));
        }
        b.push_back(std::pow(t, -2.0 / 3.0));
    }
    for (double x = 1e-8; x < 1.0; x *= 10.0) b.push_back(x);  // geometric grading toward rho = 0
    std::erase_if(b, [&](double x) { return x < lo || x > hi; });
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

/// e^{it Lambda^{3/2}} f at x = r (cos theta0, sin theta0):
///   (2 pi)^{-2} sum_m e^{i m theta0} int J_m(r rho) e^{i t rho^{3/2}} f^_m(rho) rho d rho
/// with J_m in the circle normalization.
inline PointValue propagate_point(const HarmonicDecomposition& d, double t, double r, double theta0,
                                  const QuadratureOptions& opt = {1e-13, 1e-10, 20000}) {
    if (t < 0.0) throw PreconditionError("propagate_point: t must be >= 0");
    if (r < 0.0) throw PreconditionError("propagate_point: r must be >= 0");
    if (t > d.horizon) throw PreconditionError("propagate_point: t beyond the horizon of the grid data");
    PointValue out;
    for (const auto& [m, prof] : d.profiles) {
        auto integrand = [&, m = m](double rho) {
            return bessel_j(m, r * rho) * std::polar(1.0, t * rho * std::sqrt(rho)) * prof(rho) * rho;
        };
        const auto q = integrate_panels(integrand, radial_breaks(t, r, prof.rho_min(), prof.rho_max()), opt);
        if (!q.converged)
            throw NumericalError("propagate_point: quadrature did not converge for m = " + std::to_string(m) +
                                     " (t = " + std::to_string(t) + ", r = " + std::to_string(r) + ", " +
                                     std::to_string(q.panels) + " panels, worst panel [" + std::to_string(q.worst_left) +
                                     ", " + std::to_string(q.worst_right) + "])",
                                 q.error);
        out.value += std::polar(1.0, m * theta0) * q.value;
        out.error += q.error;
        out.panels += q.panels;
    }
    const double c = 1.0 / (4.0 * pi * pi);
    out.value *= c;
    out.error *= c;
    return out;
}

// ---------------------------------------------------------------------------
// Norms in polar Fourier coordinates

namespace detail {

/// int_0^inf g(rho) rho d rho for a real integrand, on the log variable rho = e^u. Below rho = e^{-200} the
/// integrand is treated as a power of rho and its tail added in closed form.
template <class G>
double radial_moment(G&& g, double lo, double hi) {
    constexpr double ufloor = -200.0;
    const double ulo = lo > 0.0 ? std::max(std::log(lo), ufloor) : ufloor, uhi = std::log(hi);
    auto h = [&](double u) {
        const double rho = std::exp(u);
        return g(rho) * rho * rho;
    };
    std::vector<double> b{ulo, uhi, 0.0};
    for (double u = std::ceil(ulo / 10.0) * 10.0; u < uhi; u += 10.0) b.push_back(u);
    std::sort(b.begin(), b.end());
    const auto q = integrate_panels([&](double u) { return cplx(h(u)); }, b, {1e-300, 1e-11, 20000});
    if (!q.converged || !std::isfinite(q.value.real()))
        throw NumericalError("radial moment: weighted integral does not converge", q.error);
    double tail = 0.0;
    if (ulo == ufloor && !(lo > 0.0 && std::log(lo) >= ufloor)) {
        const double h0 = h(ulo), h1 = h(ulo + 1.0);
        if (h0 > 0.0) {
            const double c = std::log(h1 / h0);
            if (!(c > 0.0)) throw NumericalError("radial moment: integrand not integrable at the origin", c);
            tail = h0 / c;
        }
    }
    return q.value.real() + tail;
}

} // namespace detail

/// ||f||_2^2 = (2 pi)^{-1} sum_m int |f^_m|^2 rho d rho.
inline double plancherel_energy(const HarmonicDecomposition& d) {
    double s = 0.0;
    for (const auto& [m, p] : d.profiles)
        s += detail::radial_moment([&](double r) { return std::norm(p(r)); }, p.rho_min(), p.rho_max());
    return s / (2.0 * pi);
}

/// sum_{j <= 1, k <= 3} ||Y(D) Lambda^{beta - 1/2} Sigma^j Omega^k f||_2 with the vector fields innermost,
/// using Omega -> i m and Sigma -> -(rho d_rho + 2) on harmonic m.
inline double weighted_rhs_norm(const HarmonicDecomposition& d, double beta, double iota = 0.05) {
    if (iota < 0.0) throw PreconditionError("weighted_rhs_norm: iota must be >= 0");
    double total = 0.0;
    for (int j = 0; j <= 1; ++j)
        for (int k = 0; k <= 3; ++k) {
            double s = 0.0;
            for (const auto& [m, p] : d.profiles) {
                if (k > 0 && m == 0) continue;
                const double om = std::pow(static_cast<double>(std::abs(m)), k);
                s += detail::radial_moment(
                    [&, m = m](double r) {
                        (void)m;
                        const cplx v = j == 0 ? p(r) : -(r * p.derivative(r) + 2.0 * p(r));
                        const double w = (std::pow(r, iota) + std::pow(r, -iota)) * std::pow(r, beta - 0.5);
                        return std::norm(w * om * v);
                    },
                    p.rho_min(), p.rho_max());
            }
            total += std::sqrt(s / (2.0 * pi));
        }
    return total;
}

/// int over the disc |x| <= radius of |e^{it Lambda^{3/2}} f|^2, by harmonic orthogonality.
inline double disc_energy(const HarmonicDecomposition& d, double t, double radius, int nodes = 400) {
    std::vector<double> rs(nodes), ws(nodes);
    // composite midpoint in r is enough for a 1% surrogate
    const double h = radius / nodes;
    double s = 0.0;
    for (const auto& [m, p] : d.profiles) {
        HarmonicDecomposition one;
        one.profiles.emplace(m, p);
        one.horizon = d.horizon;
        std::vector<double> vals(nodes);
        parallel_for(nodes, [&](std::size_t i) {
            const double r = (i + 0.5) * h;
            vals[i] = std::norm(propagate_point(one, t, r, 0.0).value) * r;
        });
        for (double v : vals) s += 2.0 * pi * v * h;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Decay measurement

struct RScan {
    int points = 160;
    double factor = 2.5;  // scan r in [0, factor t + offset]
    double offset = 5.0;
    int angles = 0;       // 0: one angle for radial data, 4 m_max + 4 otherwise
};

struct DecayReport {
    double beta = 0.0;
    std::vector<double> times;
    std::vector<double> sup_norms;
    std::vector<double> argmax_r;
    std::vector<double> ratios;  // sup t^{1 - 2 beta/3} / rhs_norm
    double rhs_norm = 0.0;
    double fitted_exponent = 0.0;
    double ratio_max = 0.0;
    bool ratio_monotone_growth = false;  // every consecutive ratio increases
};

/// Sup over an (r, theta0) scan, refined by golden-section search around the best sample.
inline std::pair<double, double> sup_at_time(const HarmonicDecomposition& d, double t, const RScan& scan) {
    const int na = scan.angles > 0 ? scan.angles : (d.m_max() == 0 ? 1 : 4 * d.m_max() + 4);
    const double rmax = scan.factor * t + scan.offset;
    const int np = std::max(scan.points, 8);
    std::vector<double> vals(static_cast<std::size_t>(np) * na);
    parallel_for(vals.size(), [&](std::size_t q) {
        const double r = rmax * (q / na) / (np - 1);
        const double th = 2.0 * pi * (q % na) / na;
        vals[q] = std::abs(propagate_point(d, t, r, th).value);
    });
    const std::size_t best = std::max_element(vals.begin(), vals.end()) - vals.begin();
    double best_v = vals[best], best_r = rmax * (best / na) / (np - 1);
    const double th = 2.0 * pi * (best % na) / na, dr = rmax / (np - 1);
    auto f = [&](double r) { return std::abs(propagate_point(d, t, std::max(r, 0.0), th).value); };
    double a = std::max(0.0, best_r - dr), b = best_r + dr;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a), f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 30; ++it) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    if (std::max(f1, f2) > best_v) {
        best_v = std::max(f1, f2);
        best_r = f1 > f2 ? x1 : x2;
    }
    return {best_v, best_r};
}

inline DecayReport sup_norm_decay(const HarmonicDecomposition& d, const std::vector<double>& times, double beta,
                                  const RScan& scan = {}, double iota = 0.05) {
    if (times.size() < 2) throw PreconditionError("sup_norm_decay: need at least two times");
    for (double t : times) {
        if (!(t > 0.0)) throw PreconditionError("sup_norm_decay: times must be positive");
        if (t > d.horizon) throw PreconditionError("sup_norm_decay: time beyond the horizon of the grid data");
    }
    DecayReport rep;
    rep.beta = beta;
    rep.times = times;
    rep.rhs_norm = weighted_rhs_norm(d, beta, iota);
    std::vector<double> lx, ly;
    for (double t : times) {
        const auto [v, r] = sup_at_time(d, t, scan);
        rep.sup_norms.push_back(v);
        rep.argmax_r.push_back(r);
        rep.ratios.push_back(v * std::pow(t, 1.0 - 2.0 * beta / 3.0) / rep.rhs_norm);
        lx.push_back(std::log(t));
        ly.push_back(std::log(v));
    }
    rep.fitted_exponent = detail::ls_slope(lx, ly);
    rep.ratio_max = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    rep.ratio_monotone_growth = true;
    for (std::size_t i = 1; i < rep.ratios.size(); ++i)
        if (!(rep.ratios[i] > rep.ratios[i - 1])) rep.ratio_monotone_growth = false;
    return rep;
}

// ---------------------------------------------------------------------------
// Hardy-type bound and the regimes of the radial phase

/// A(rho) = rho^{1/2 - eps} for rho <= 1, rho^{1/2 + eps} for rho >= 1.
inline double hardy_weight(double rho, double eps) {
    return rho <= 1.0 ? std::pow(rho, 0.5 - eps) : std::pow(rho, 0.5 + eps);
}

/// The constant the one-dimensional Cauchy-Schwarz argument gives for the ratio below.
inline double hardy_constant(double eps) { return std::sqrt(2.0 / (1.0 - 4.0 * eps * eps) / (2.0 * pi)); }

struct HardyResult {
    double ratio = 0.0;  // max_rho |f^(rho)| A(rho) / ||A d_rho f^||_{L^2(R^2)}
    double argmax_rho = 0.0;
    double weighted_norm = 0.0;
};

inline HardyResult hardy_bound_check(const RadialProfile& p, double eps = 0.05, int samples = 4000) {
    if (!(eps >= 0.0 && eps < 0.5)) throw PreconditionError("hardy_bound_check: eps must lie in [0, 1/2)");
    HardyResult res;
    const double n2 = 2.0 * pi * detail::radial_moment(
                                     [&](double r) {
                                         const double a = hardy_weight(r, eps);
                                         return a * a * std::norm(p.derivative(r));
                                     },
                                     p.rho_min(), p.rho_max());
    if (!std::isfinite(n2)) throw NumericalError("hardy_bound_check: weighted norm diverges", n2);
    res.weighted_norm = std::sqrt(n2);
    if (res.weighted_norm == 0.0) throw PreconditionError("hardy_bound_check: constant profile");
    const double lo = std::max(p.rho_min(), 1e-8), hi = p.rho_max();
    for (int i = 0; i <= samples; ++i) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(i) / samples);
        const double v = std::abs(p(r)) * hardy_weight(r, eps) / res.weighted_norm;
        if (v > res.ratio) {
            res.ratio = v;
            res.argmax_rho = r;
        }
    }
    return res;
}

struct RegimeRow {
    std::string regime;
    double rho_lo = 0.0, rho_hi = 0.0;
    double min_ratio = 0.0, max_ratio = 0.0;    // |phi'| / comparator
    double min_dratio = 0.0, max_dratio = 0.0;  // |d_rho (1/phi')| / comparator
    int samples = 0;
};

/// phi(rho) = rho^{3/2} - R rho. Comparators: |phi'| ~ R, |h|/R, sqrt(rho) and
/// |d(1/phi')| ~ 1/(R^2 sqrt(rho)), R/h^2, rho^{-3/2} on rho < 2R^2/9, [2R^2/9, 10R^2], > 10R^2, h = rho - 4R^2/9.
inline std::vector<RegimeRow> phi_regime_table(double R, int samples = 2000) {
    if (!(R > 0.0)) throw PreconditionError("phi_regime_table: R must be > 0");
    const double b1 = 2.0 * R * R / 9.0, b2 = 10.0 * R * R, rs = 4.0 * R * R / 9.0;
    auto dphi = [&](double r) { return 1.5 * std::sqrt(r) - R; };
    auto dinv = [&](double r) {
        const double p = dphi(r);
        return 0.75 / std::sqrt(r) / (p * p);
    };
    struct Spec {
        const char* name;
        double lo, hi;
        std::function<double(double)> c, dc;
    };
    const std::vector<Spec> specs{
        {"rho<2R^2/9", b1 * 1e-6, b1, [&](double) { return R; }, [&](double r) { return 1.0 / (R * R * std::sqrt(r)); }},
        {"2R^2/9<=rho<=10R^2", b1, b2, [&](double r) { return std::abs(r - rs) / R; },
         [&](double r) { return R / ((r - rs) * (r - rs)); }},
        {"rho>10R^2", b2, b2 * 1e4, [&](double r) { return std::sqrt(r); }, [&](double r) { return std::pow(r, -1.5); }},
    };
    std::vector<RegimeRow> out;
    for (const auto& s : specs) {
        RegimeRow row{s.name, s.lo, s.hi, 1e300, 0.0, 1e300, 0.0, 0};
        for (int i = 0; i <= samples; ++i) {
            const double r = s.lo * std::pow(s.hi / s.lo, static_cast<double>(i) / samples);
            if (std::abs(r - rs) <= 1e-9 * rs) continue;  // phi' = 0 exactly
            const double q = std::abs(dphi(r)) / s.c(r), dq = std::abs(dinv(r)) / s.dc(r);
            row.min_ratio = std::min(row.min_ratio, q);
            row.max_ratio = std::max(row.max_ratio, q);
            row.min_dratio = std::min(row.min_dratio, dq);
            row.max_dratio = std::max(row.max_dratio, dq);
            ++row.samples;
        }
        out.push_back(row);
    }
    return out;
}

} // namespace capwave
