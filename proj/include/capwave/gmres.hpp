#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "capwave/grid.hpp"

namespace capwave {

struct GmresResult {
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
};

namespace detail {
inline double norm2(const CVec& v) {
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    return std::sqrt(s);
}
inline cplx dot(const CVec& a, const CVec& b) {  // conj(a) . b
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}
} // namespace detail

/// Restarted GMRES(m) for A x = b, starting from x. Modified Gram-Schmidt, Givens rotations.
template <class Apply>
GmresResult gmres(Apply&& apply, const CVec& b, CVec& x, int restart, int max_iter, double tol) {
    GmresResult out;
    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), cplx(0.0));
        out.converged = true;
        return out;
    }
    const std::size_t n = b.size();
    while (out.iterations < max_iter) {
        CVec r = apply(x);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        double beta = detail::norm2(r);
        out.relative_residual = beta / bnorm;
        if (out.relative_residual <= tol) {
            out.converged = true;
            return out;
        }
        std::vector<CVec> V;
        V.reserve(restart + 1);
        for (auto& v : r) v /= beta;
        V.push_back(std::move(r));
        std::vector<std::vector<cplx>> H(restart + 1, std::vector<cplx>(restart, 0.0));
        std::vector<cplx> cs(restart), sn(restart), g(restart + 1, 0.0);
        g[0] = beta;
        int k = 0;
        for (; k < restart && out.iterations < max_iter; ++k, ++out.iterations) {
            CVec w = apply(V[k]);
            for (int i = 0; i <= k; ++i) {
                H[i][k] = detail::dot(V[i], w);
                for (std::size_t p = 0; p < n; ++p) w[p] -= H[i][k] * V[i][p];
            }
            const double hn = detail::norm2(w);
            H[k + 1][k] = hn;
            for (int i = 0; i < k; ++i) {
                const cplx t = std::conj(cs[i]) * H[i][k] + std::conj(sn[i]) * H[i + 1][k];
                H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
                H[i][k] = t;
            }
            const double den = std::sqrt(std::norm(H[k][k]) + hn * hn);
            cs[k] = H[k][k] / den;
            sn[k] = hn / den;
            H[k][k] = den;
            H[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = std::conj(cs[k]) * g[k];
            out.relative_residual = std::abs(g[k + 1]) / bnorm;
            if (hn > 0.0) {
                for (auto& v : w) v /= hn;
                V.push_back(std::move(w));
            }
            if (out.relative_residual <= tol || hn == 0.0) {
                ++k;
                ++out.iterations;
                break;
            }
        }
        // Back substitution for the Krylov coefficients.
        std::vector<cplx> y(k);
        for (int i = k - 1; i >= 0; --i) {
            cplx s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
            y[i] = s / H[i][i];
        }
        for (int i = 0; i < k; ++i)
            for (std::size_t p = 0; p < n; ++p) x[p] += y[i] * V[i][p];
        if (out.relative_residual <= tol) {
            // confirm with the true residual on the next pass
            CVec rr = apply(x);
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += std::norm(b[i] - rr[i]);
            out.relative_residual = std::sqrt(s) / bnorm;
            out.converged = out.relative_residual <= 10.0 * tol;
            return out;
        }
    }
    return out;
}

} // namespace capwave
