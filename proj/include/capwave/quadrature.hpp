#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "capwave/error.hpp"

namespace capwave {

struct QuadratureResult {
    std::complex<double> value = 0.0;
    double error = 0.0;   // sum of |K15 - G7| over the final panels
    int panels = 0;
    bool converged = false;
    double worst_left = 0.0;  // panel with the largest remaining error
    double worst_right = 0.0;
};

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_panels = 20000;
};

namespace detail {

struct Panel {
    double a, b;
    std::complex<double> value;
    double error;
    bool operator<(const Panel& o) const {
        // Ties broken by position so the refinement order is reproducible.
        return error != o.error ? error < o.error : a > o.a;
    }
};

template <class F>
Panel gk15_panel(F& f, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    // Kronrod nodes: x = 0, then +-xk[i]; the even-indexed ones are also the Gauss nodes.
    const std::complex<double> f0 = f(c);
    std::complex<double> k = wk[0] * f0, g = wg[0] * f0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const std::complex<double> s = f(c - h * xk[i]) + f(c + h * xk[i]);
        k += wk[i] * s;
        if (i % 2 == 0) g += wg[i / 2] * s;
    }
    return {a, b, h * k, std::abs(h * (k - g))};
}

} // namespace detail

/// Globally adaptive G7-K15 quadrature of a complex integrand over [breaks.front(), breaks.back()].
/// Interior breakpoints become forced panel boundaries; points outside the range are ignored.
template <class F>
QuadratureResult integrate_panels(F&& f, std::vector<double> breaks, const QuadratureOptions& opt = {}) {
    if (breaks.size() < 2) throw PreconditionError("integrate_panels: need at least two breakpoints");
    const double lo = breaks.front(), hi = breaks.back();
    if (!(hi > lo)) throw PreconditionError("integrate_panels: empty interval");
    std::vector<double> pts;
    for (double x : breaks)
        if (x >= lo && x <= hi && std::isfinite(x)) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(), [](double a, double b) { return b - a <= 1e-14 * std::max(1.0, std::abs(a)); }),
              pts.end());

    std::priority_queue<detail::Panel> queue;
    std::complex<double> total = 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto p = detail::gk15_panel(f, pts[i], pts[i + 1]);
        total += p.value;
        err += p.error;
        queue.push(p);
    }
    QuadratureResult r;
    while (true) {
        const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
        if (err <= target) {
            r.converged = true;
            break;
        }
        if (static_cast<int>(queue.size()) >= opt.max_panels) break;
        const detail::Panel worst = queue.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // panel below resolution
        queue.pop();
        auto l = detail::gk15_panel(f, worst.a, mid), rr = detail::gk15_panel(f, mid, worst.b);
        total += l.value + rr.value - worst.value;
        err += l.error + rr.error - worst.error;
        queue.push(l);
        queue.push(rr);
    }
    // Recompute the sums from the final panels to shed the running-update roundoff.
    r.panels = static_cast<int>(queue.size());
    r.worst_left = queue.top().a;
    r.worst_right = queue.top().b;
    r.value = 0.0;
    r.error = 0.0;
    std::vector<detail::Panel> fin;
    while (!queue.empty()) {
        fin.push_back(queue.top());
        queue.pop();
    }
    std::sort(fin.begin(), fin.end(), [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
    for (const auto& p : fin) {
        r.value += p.value;
        r.error += p.error;
    }
    return r;
}

} // namespace capwave
