#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "capwave/dno.hpp"
#include "capwave/gmres.hpp"

namespace capwave {

/// Diagnostics of one oracle evaluation.
struct OracleReport {
    double residual = 0.0;  // final relative preconditioned residual of the finest solve
    int iterations = 0;     // summed over all Richardson levels
    int finest_layers = 0;
};

namespace detail {

/// Laplace problem below z = h(x) on the slab [-D, h], pulled back to tau in [-1, 0] by
///   z = Z(x, tau) = S(tau) + h(x) w(tau),  w = 1 + S / D,
/// where S maps [-1, 0] onto [-D, 0] (optionally clustering layers near the surface).
/// In these coordinates the Laplacian is the divergence of
///   F^x   = Z_tau grad Phi - grad Z d_tau Phi,
///   F^tau = -grad Z . grad Phi + (1 + |grad Z|^2) / Z_tau d_tau Phi,
/// and F^tau at tau = 0 equals G(h) f. Horizontal derivatives are spectral, tau is discretised by
/// second-order central differences on the layers tau_j = -1 + j / M, with a ghost layer above
/// the surface (closed by the equation at the surface node) and even reflection at the bottom.
class FlattenedLaplace {
public:
    FlattenedLaplace(const SpectralField& h, double depth, int layers, double stretch)
        : g_(h.grid()), D_(depth), M_(layers), gamma_(stretch), dtau_(1.0 / layers) {
        const RVec hp = to_physical_real(h);
        h_ = hp;
        h1_ = to_physical_real(partial(h, 0));
        h2_ = to_physical_real(partial(h, 1));
        build_flat_factors();
    }

    double S(double tau) const {
        if (gamma_ == 0.0) return D_ * tau;
        return -D_ * std::expm1(-gamma_ * tau) / std::expm1(gamma_);
    }
    double dS(double tau) const {
        if (gamma_ == 0.0) return D_;
        return D_ * gamma_ * std::exp(-gamma_ * tau) / std::expm1(gamma_);
    }
    double w(double tau) const { return 1.0 + S(tau) / D_; }
    double tau(double j) const { return -1.0 + j * dtau_; }

    std::size_t N() const { return g_.size(); }
    /// Unknown vector: layers 0..M-1 followed by the ghost layer M+1.
    std::size_t unknowns() const { return (M_ + 1) * N(); }

    /// Full residual rows 0..M for the layer values (unknowns x, top trace f).
    CVec residual(const CVec& x, const SpectralField* top) const {
        const std::size_t n2 = N();
        // Physical Phi, d1 Phi, d2 Phi for layers 0..M+1.
        std::vector<CVec> phi(M_ + 2), p1(M_ + 2), p2(M_ + 2);
        for (int j = 0; j <= M_ + 1; ++j) {
            SpectralField layer(g_, false);
            if (j == M_) {
                if (top) layer = *top;
            } else {
                const std::size_t off = slot(j) * n2;
                for (std::size_t i = 0; i < n2; ++i) layer[i] = x[off + i];
            }
            phi[j] = to_physical(layer);
            p1[j] = to_physical(partial(layer, 0));
            p2[j] = to_physical(partial(layer, 1));
        }
        CVec out((M_ + 1) * n2);
        CVec f1(n2), f2(n2), rest(n2);
        const double it2 = 1.0 / (dtau_ * dtau_), i2t = 0.5 / dtau_;
        for (int j = 0; j <= M_; ++j) {
            const double tj = tau(j), wj = w(tj), sj = dS(tj);
            const double tp = tau(j + 0.5), tm = tau(j - 0.5);
            // Bottom node: even reflection Phi_{-1} = Phi_1, w odd, B_{-1/2} = B_{1/2}.
            const int jm = (j == 0) ? 1 : j - 1;
            const double wm = (j == 0) ? -w(tau(1)) : w(tau(j - 1));
            const double wp = w(tau(j + 1));
            const double wtp = w(tp), stp = dS(tp);
            const double wtm = (j == 0) ? wtp : w(tm), stm = (j == 0) ? stp : dS(tm);
            for (std::size_t i = 0; i < n2; ++i) {
                const double a = sj * (1.0 + h_[i] / D_);
                const double gh2 = h1_[i] * h1_[i] + h2_[i] * h2_[i];
                const cplx dphi = (j == 0) ? cplx(0.0) : (phi[j + 1][i] - phi[jm][i]) * i2t;
                f1[i] = a * p1[j][i] - wj * h1_[i] * dphi;
                f2[i] = a * p2[j][i] - wj * h2_[i] * dphi;
                const cplx qp = wp * (h1_[i] * p1[j + 1][i] + h2_[i] * p2[j + 1][i]);
                const cplx qm = wm * (h1_[i] * p1[jm][i] + h2_[i] * p2[jm][i]);
                const double bp = (1.0 + wtp * wtp * gh2) / (stp * (1.0 + h_[i] / D_));
                const double bm = (1.0 + wtm * wtm * gh2) / (stm * (1.0 + h_[i] / D_));
                rest[i] = -(qp - qm) * i2t + (bp * (phi[j + 1][i] - phi[j][i]) - bm * (phi[j][i] - phi[jm][i])) * it2;
            }
            SpectralField div = divergence(forward_transform(std::span<const cplx>(f1.data(), n2), g_),
                                           forward_transform(std::span<const cplx>(f2.data(), n2), g_));
            const SpectralField r = forward_transform(std::span<const cplx>(rest.data(), n2), g_);
            const std::size_t off = static_cast<std::size_t>(j) * n2;
            for (std::size_t i = 0; i < n2; ++i) out[off + i] = div[i] + r[i];
        }
        return out;
    }

    /// Inverse of the flat-surface operator (h = 0) on the unknowns.
    void precondition(CVec& r) const {
        const std::size_t n2 = N();
        const auto& wn = wavenumbers(g_);
        const double it2 = 1.0 / (dtau_ * dtau_);
        std::vector<cplx> rhs(M_);
        std::vector<double> c(M_);
        std::vector<cplx> d(M_);
        for (std::size_t i = 0; i < n2; ++i) {
            const double k2 = wn.kabs[i] * wn.kabs[i];
            for (int j = 0; j < M_; ++j) rhs[j] = r[static_cast<std::size_t>(j) * n2 + i];
            // Thomas algorithm; row j: lo * Phi_{j-1} + di * Phi_j + up * Phi_{j+1}.
            for (int j = 0; j < M_; ++j) {
                const double lo = (j == 0) ? 0.0 : bflat_[j] * it2;  // bflat_[j] = B at j - 1/2
                const double up = ((j == 0) ? 2.0 * bflat_[1] : bflat_[j + 1]) * it2;
                const double di = -k2 * dS(tau(j)) - ((j == 0) ? 2.0 * bflat_[1] : bflat_[j] + bflat_[j + 1]) * it2;
                const double denom = di - lo * (j > 0 ? c[j - 1] : 0.0);
                c[j] = (j + 1 < M_) ? up / denom : 0.0;
                d[j] = (rhs[j] - lo * (j > 0 ? d[j - 1] : cplx(0.0))) / denom;
            }
            for (int j = M_ - 2; j >= 0; --j) d[j] -= c[j] * d[j + 1];
            for (int j = 0; j < M_; ++j) r[static_cast<std::size_t>(j) * n2 + i] = d[j];
            // Surface row closes the ghost (Phi_M = 0 in the homogeneous problem).
            const double bp = bflat_[M_ + 1] * it2, bm = bflat_[M_] * it2;
            const cplx rm = r[static_cast<std::size_t>(M_) * n2 + i];
            r[static_cast<std::size_t>(M_) * n2 + i] = (rm - bm * d[M_ - 1]) / bp;
        }
    }

    /// F^tau at the surface node.
    SpectralField surface_flux(const CVec& x, const SpectralField& f) const {
        const std::size_t n2 = N();
        SpectralField ghost(g_, false), below(g_, false);
        for (std::size_t i = 0; i < n2; ++i) {
            ghost[i] = x[slot(M_ + 1) * n2 + i];
            below[i] = x[slot(M_ - 1) * n2 + i];
        }
        const CVec gp = to_physical(ghost), bp = to_physical(below);
        const CVec f1 = to_physical(partial(f, 0)), f2 = to_physical(partial(f, 1));
        CVec out(n2);
        const double s0 = dS(0.0);
        for (std::size_t i = 0; i < n2; ++i) {
            const double gh2 = h1_[i] * h1_[i] + h2_[i] * h2_[i];
            const double B = (1.0 + gh2) / (s0 * (1.0 + h_[i] / D_));
            out[i] = -(h1_[i] * f1[i] + h2_[i] * f2[i]) + B * (gp[i] - bp[i]) * (0.5 / dtau_);
        }
        return forward_transform(std::span<const cplx>(out.data(), n2), g_);
    }

private:
    std::size_t slot(int j) const { return j == M_ + 1 ? static_cast<std::size_t>(M_) : static_cast<std::size_t>(j); }

    void build_flat_factors() {
        // bflat_[j] = 1 / S'(tau_{j - 1/2}) for j = 1..M+1 (index 0 unused).
        bflat_.assign(M_ + 2, 0.0);
        for (int j = 1; j <= M_ + 1; ++j) bflat_[j] = 1.0 / dS(tau(j - 0.5));
    }

    GridSpec g_;
    double D_;
    int M_;
    double gamma_;
    double dtau_;
    RVec h_, h1_, h2_;
    std::vector<double> bflat_;
};

inline SpectralField oracle_single(const SpectralField& h, const SpectralField& f, const DnoConfig& cfg, int layers,
                                   OracleReport& report) {
    FlattenedLaplace op(h, cfg.oracle_depth, layers, cfg.oracle_stretch);
    // Affine map x -> A x + b; solve A x = -b with the flat operator as left preconditioner.
    CVec b = op.residual(CVec(op.unknowns()), &f);
    for (auto& v : b) v = -v;
    op.precondition(b);
    auto apply = [&](const CVec& x) {
        CVec y = op.residual(x, nullptr);
        op.precondition(y);
        return y;
    };
    CVec x(op.unknowns());
    GmresResult res = gmres(apply, b, x, 30, cfg.solver_max_iter, cfg.solver_tol);
    report.iterations += res.iterations;
    report.residual = res.relative_residual;
    report.finest_layers = layers;
    if (!res.converged && res.relative_residual > 1e-9)
        throw NumericalError("dno_oracle: GMRES stalled at relative residual " + std::to_string(res.relative_residual),
                             res.relative_residual);
    return op.surface_flux(x, f);
}

} // namespace detail

/// Dirichlet-Neumann operator by direct solution of the flattened Laplace problem.
inline SpectralField dno_oracle(const SpectralField& h, const SpectralField& f, const DnoConfig& cfg,
                                OracleReport* report = nullptr) {
    h.check_same(f);
    cfg.validate(h.grid());
    require_slope(h, "dno_oracle");
    OracleReport local;
    OracleReport& rep = report ? *report : local;
    // Romberg table over layer doublings; the scheme's error expands in even powers of the spacing.
    std::vector<SpectralField> row;
    for (int level = 0; level <= cfg.richardson_levels; ++level) {
        std::vector<SpectralField> next{detail::oracle_single(h, f, cfg, cfg.oracle_layers << level, rep)};
        double factor = 4.0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            SpectralField e = next[k] - row[k];
            e *= 1.0 / (factor - 1.0);
            next.push_back(next[k] + e);
            factor *= 4.0;
        }
        row = std::move(next);
    }
    SpectralField out = dealias(row.back());
    out.set_real(f.is_real());
    if (out.is_real()) out.symmetrize();
    return out;
}

// ---------------------------------------------------------------------------
// Series against oracle on a Gaussian surface of prescribed slope

struct ConvergenceRow {
    double epsilon = 0.0;  // max |grad h|
    int order = 0;
    double rel_err = 0.0;  // ||series - oracle|| / ||oracle||
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    std::vector<std::pair<int, double>> slopes;  // (order, log-log slope of rel_err against epsilon)
};

/// h = a exp(-|x|^2 / w^2) scaled so that max |grad h| = epsilon, f = exp(-|x|^2 / wf^2).
inline SpectralField gaussian_with_slope(const GridSpec& g, double epsilon, double width) {
    SpectralField h = dealias(sample(g, [&](double x, double y) { return std::exp(-(x * x + y * y) / (width * width)); }));
    h *= epsilon / max_slope(h);
    return h;
}

inline ConvergenceStudy dno_convergence_study(const GridSpec& g, const std::vector<double>& epsilons,
                                              const std::vector<int>& orders, const DnoConfig& cfg,
                                              double width = 1.0, double f_width = 0.8) {
    if (epsilons.size() < 2) throw PreconditionError("dno_convergence_study: need at least two slopes");
    const SpectralField f = dealias(sample(g, [&](double x, double y) { return std::exp(-(x * x + y * y) / (f_width * f_width)); }));
    ConvergenceStudy out;
    std::vector<std::vector<double>> errs(orders.size());
    for (double eps : epsilons) {
        const SpectralField h = gaussian_with_slope(g, eps, width);
        const SpectralField ref = dno_oracle(h, f, cfg);
        const double scale = l2_norm(ref);
        for (std::size_t k = 0; k < orders.size(); ++k) {
            const double e = l2_norm(dno_series(h, f, orders[k]) - ref) / scale;
            out.rows.push_back({eps, orders[k], e});
            errs[k].push_back(e);
        }
    }
    std::vector<double> lx;
    for (double eps : epsilons) lx.push_back(std::log(eps));
    for (std::size_t k = 0; k < orders.size(); ++k) {
        std::vector<double> ly;
        for (double e : errs[k]) ly.push_back(std::log(e));
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        out.slopes.emplace_back(orders[k], (n * sxy - sx * sy) / (n * sxx - sx * sx));
    }
    return out;
}

} // namespace capwave
