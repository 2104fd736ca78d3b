#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <numbers>
#include <span>
#include <tuple>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "capwave/error.hpp"

namespace capwave {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// 64-byte aligned storage so every buffer can be handed to the cached FFTW plans.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
    T* allocate(std::size_t count) {
        std::size_t bytes = ((count * sizeof(T) + 63) / 64) * 64;
        void* p = std::aligned_alloc(64, bytes == 0 ? 64 : bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { std::free(p); }
    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using CVec = std::vector<cplx, AlignedAllocator<cplx>>;
using RVec = std::vector<double>;

/// Periodic box [-L/2, L/2)^2 sampled with n points per axis.
struct GridSpec {
    int n = 64;
    double L = 2.0 * pi;
    double dealias_fraction = 2.0 / 3.0;

    GridSpec() = default;
    GridSpec(int n_, double L_, double frac = 2.0 / 3.0) : n(n_), L(L_), dealias_fraction(frac) { validate(); }

    void validate() const {
        if (n < 8 || n % 2 != 0) throw PreconditionError("grid: n must be even and >= 8, got " + std::to_string(n));
        if (!(L > 0.0) || !std::isfinite(L)) throw PreconditionError("grid: box length must be positive");
        if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
            throw PreconditionError("grid: dealias fraction must lie in (0,1]");
    }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    double dx() const { return L / n; }
    double cell_area() const { return dx() * dx(); }
    double dk() const { return 2.0 * pi / L; }
    /// Signed integer wavenumber of FFT index a.
    int mode(int a) const { return a < n / 2 ? a : a - n; }
    /// FFT index of signed mode m.
    int index_of_mode(int m) const { return ((m % n) + n) % n; }
    double coord(int i) const { return -0.5 * L + i * dx(); }
    std::size_t idx(int a, int b) const { return static_cast<std::size_t>(a) * n + b; }

    bool operator==(const GridSpec& o) const {
        return n == o.n && L == o.L && dealias_fraction == o.dealias_fraction;
    }
};

/// Wavenumber tables for one grid, built once and shared.
struct Wavenumbers {
    RVec k1, k2, kabs;
    RVec d1, d2;  // derivative symbols: k with the unpaired Nyquist mode zeroed
    std::vector<int> m1, m2;
    std::vector<unsigned char> keep;  // 2/3-rule mask
    RVec sign;                        // (-1)^(m1+m2): shift to the centred box
    std::vector<std::size_t> neg;     // index of -m
};

namespace detail {

struct GridKey {
    int n;
    double L, frac;
    bool operator<(const GridKey& o) const {
        return std::tie(n, L, frac) < std::tie(o.n, o.L, o.frac);
    }
};

inline std::shared_ptr<const Wavenumbers> build_wavenumbers(const GridSpec& g) {
    auto w = std::make_shared<Wavenumbers>();
    const std::size_t N = g.size();
    w->k1.resize(N); w->k2.resize(N); w->kabs.resize(N); w->d1.resize(N); w->d2.resize(N);
    w->m1.resize(N); w->m2.resize(N); w->keep.resize(N); w->sign.resize(N); w->neg.resize(N);
    const double cutoff = g.dealias_fraction * g.n / 2.0;
    for (int a = 0; a < g.n; ++a) {
        for (int b = 0; b < g.n; ++b) {
            const std::size_t i = g.idx(a, b);
            const int ma = g.mode(a), mb = g.mode(b);
            w->m1[i] = ma;
            w->m2[i] = mb;
            w->k1[i] = g.dk() * ma;
            w->k2[i] = g.dk() * mb;
            w->kabs[i] = std::hypot(w->k1[i], w->k2[i]);
            w->d1[i] = (ma == -g.n / 2) ? 0.0 : w->k1[i];
            w->d2[i] = (mb == -g.n / 2) ? 0.0 : w->k2[i];
            // The Nyquist row/column has no partner mode and is always dropped.
            const bool nyq = (ma == -g.n / 2) || (mb == -g.n / 2);
            w->keep[i] = (!nyq && std::abs(ma) < cutoff && std::abs(mb) < cutoff) ? 1 : 0;
            w->sign[i] = ((ma + mb) % 2 == 0) ? 1.0 : -1.0;
            w->neg[i] = g.idx(g.index_of_mode(-ma), g.index_of_mode(-mb));
        }
    }
    return w;
}

struct FftPlans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    fftw_plan forward_real = nullptr;   // r2c, n x (n/2 + 1) half spectrum
    fftw_plan backward_real = nullptr;  // c2r
};

inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

inline const FftPlans& plans_for(int n) {
    static std::map<int, FftPlans> cache;
    std::lock_guard lock(fftw_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    CVec a(static_cast<std::size_t>(n) * n), b(static_cast<std::size_t>(n) * n);
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    // FFTW_ESTIMATE keeps the algorithm choice (and hence round-off) identical run to run.
    FftPlans p;
    p.forward = fftw_plan_dft_2d(n, n, pa, pb, FFTW_FORWARD, FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_2d(n, n, pa, pb, FFTW_BACKWARD, FFTW_ESTIMATE);
    auto* ra = reinterpret_cast<double*>(a.data());
    p.forward_real = fftw_plan_dft_r2c_2d(n, n, ra, pb, FFTW_ESTIMATE);
    p.backward_real = fftw_plan_dft_c2r_2d(n, n, pb, ra, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
    return cache.emplace(n, p).first->second;
}

} // namespace detail

inline const Wavenumbers& wavenumbers(const GridSpec& g) {
    static std::map<detail::GridKey, std::shared_ptr<const Wavenumbers>> cache;
    static std::mutex m;
    std::lock_guard lock(m);
    detail::GridKey key{g.n, g.L, g.dealias_fraction};
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, detail::build_wavenumbers(g)).first;
    return *it->second;
}

/// Cached per-grid table of a radial symbol s(|k|), e.g. |k|^alpha. The key identifies the symbol.
template <class Fn>
const RVec& radial_table(const GridSpec& g, const std::string& key, Fn&& fn) {
    static std::map<std::pair<detail::GridKey, std::string>, std::shared_ptr<const RVec>> cache;
    static std::mutex m;
    std::lock_guard lock(m);
    auto k = std::make_pair(detail::GridKey{g.n, g.L, g.dealias_fraction}, key);
    auto it = cache.find(k);
    if (it == cache.end()) {
        const auto& w = wavenumbers(g);
        auto t = std::make_shared<RVec>(g.size());
        for (std::size_t i = 0; i < t->size(); ++i) (*t)[i] = fn(w.kabs[i]);
        it = cache.emplace(k, std::move(t)).first;
    }
    return *it->second;
}

/// Fourier coefficients of a field on the box. Convention:
///   f(x) = sum_m c_m e^{i k_m . x},  c_m = N^{-2} sum_x f(x) e^{-i k_m . x},
/// with x ranging over the centred grid and k_m = 2 pi m / L.
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(GridSpec g, bool is_real) : grid_(g), coeffs_(g.size(), cplx(0.0)), real_(is_real) {}
    SpectralField(GridSpec g, CVec coeffs, bool is_real) : grid_(g), coeffs_(std::move(coeffs)), real_(is_real) {
        if (coeffs_.size() != grid_.size()) throw PreconditionError("spectral field: coefficient count mismatch");
    }

    static SpectralField zeros(const GridSpec& g, bool is_real = true) { return SpectralField(g, is_real); }

    const GridSpec& grid() const { return grid_; }
    bool is_real() const { return real_; }
    void set_real(bool r) { real_ = r; }
    std::size_t size() const { return coeffs_.size(); }

    CVec& coeffs() { return coeffs_; }
    const CVec& coeffs() const { return coeffs_; }
    cplx& operator[](std::size_t i) { return coeffs_[i]; }
    const cplx& operator[](std::size_t i) const { return coeffs_[i]; }

    /// Coefficient at signed mode (m1, m2).
    cplx& at(int m1, int m2) { return coeffs_[grid_.idx(grid_.index_of_mode(m1), grid_.index_of_mode(m2))]; }
    cplx at(int m1, int m2) const { return coeffs_[grid_.idx(grid_.index_of_mode(m1), grid_.index_of_mode(m2))]; }

    SpectralField& operator+=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        real_ = real_ && o.real_;
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        real_ = real_ && o.real_;
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    SpectralField& operator*=(cplx s) {
        for (auto& c : coeffs_) c *= s;
        if (s.imag() != 0.0) real_ = false;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
    friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }
    SpectralField operator-() const {
        SpectralField r = *this;
        r *= -1.0;
        return r;
    }

    /// Largest |c_m - conj(c_{-m})| relative to max |c|; zero for exactly real fields.
    double hermitian_defect() const {
        const auto& w = wavenumbers(grid_);
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            scale = std::max(scale, std::abs(coeffs_[i]));
            if (!w.keep[i] && (w.m1[i] == -grid_.n / 2 || w.m2[i] == -grid_.n / 2)) continue;
            worst = std::max(worst, std::abs(coeffs_[i] - std::conj(coeffs_[w.neg[i]])));
        }
        return scale > 0.0 ? worst / scale : 0.0;
    }

    /// Projects onto Hermitian-symmetric coefficients and returns the size of the correction.
    double symmetrize() {
        const auto& w = wavenumbers(grid_);
        double corr = 0.0;
        CVec out(coeffs_.size());
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            out[i] = 0.5 * (coeffs_[i] + std::conj(coeffs_[w.neg[i]]));
            corr = std::max(corr, std::abs(out[i] - coeffs_[i]));
        }
        coeffs_ = std::move(out);
        real_ = true;
        return corr;
    }

    /// Real part / imaginary part of the physical field, as spectral fields.
    SpectralField real_part() const {
        const auto& w = wavenumbers(grid_);
        SpectralField r(grid_, true);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) r[i] = 0.5 * (coeffs_[i] + std::conj(coeffs_[w.neg[i]]));
        return r;
    }
    SpectralField imag_part() const {
        const auto& w = wavenumbers(grid_);
        SpectralField r(grid_, true);
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            r[i] = (coeffs_[i] - std::conj(coeffs_[w.neg[i]])) / cplx(0.0, 2.0);
        return r;
    }

    void check_same(const SpectralField& o) const {
        if (!(grid_ == o.grid_)) throw PreconditionError("spectral field: grid mismatch");
    }

private:
    GridSpec grid_;
    CVec coeffs_;
    bool real_ = true;
};

/// Physical samples -> coefficients. Values are row-major with the x1 index outermost.
inline SpectralField forward_transform(std::span<const cplx> values, const GridSpec& g, bool is_real = false) {
    g.validate();
    if (values.size() != g.size())
        throw PreconditionError("forward_transform: expected " + std::to_string(g.size()) + " samples, got " +
                                std::to_string(values.size()));
    const auto& plans = detail::plans_for(g.n);
    CVec in(values.begin(), values.end()), out(g.size());
    fftw_execute_dft(plans.forward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const auto& w = wavenumbers(g);
    const double scale = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale * w.sign[i];
    return SpectralField(g, std::move(out), is_real);
}

namespace detail {

/// Per-thread work arrays for the real transforms of one grid size.
struct RealScratch {
    CVec in, half;
};

inline RealScratch& real_scratch(int n) {
    thread_local std::map<int, RealScratch> cache;
    RealScratch& r = cache[n];
    if (r.half.empty()) {
        r.in.resize(static_cast<std::size_t>(n) * n / 2 + 1);
        r.half.resize(static_cast<std::size_t>(n) * (n / 2 + 1));
    }
    return r;
}

/// r2c transform, expanded to the full coefficient array; optionally applies the 2/3 mask on the way.
inline SpectralField forward_real(std::span<const double> values, const GridSpec& g, bool truncate) {
    g.validate();
    if (values.size() != g.size())
        throw PreconditionError("forward_transform: expected " + std::to_string(g.size()) + " samples, got " +
                                std::to_string(values.size()));
    const int n = g.n, nh = n / 2 + 1;
    RealScratch& sc = real_scratch(n);
    auto* rin = reinterpret_cast<double*>(sc.in.data());
    std::copy(values.begin(), values.end(), rin);
    fftw_execute_dft_r2c(plans_for(n).forward_real, rin, reinterpret_cast<fftw_complex*>(sc.half.data()));
    const auto& w = wavenumbers(g);
    const double scale = 1.0 / static_cast<double>(g.size());
    CVec out(g.size());
    for (int a = 0; a < n; ++a) {
        const std::size_t row = g.idx(a, 0);
        const cplx* h = sc.half.data() + static_cast<std::size_t>(a) * nh;
        const cplx* hn = sc.half.data() + static_cast<std::size_t>((n - a) % n) * nh;
        for (int b = 0; b < n; ++b) {
            const std::size_t i = row + b;
            if (truncate && !w.keep[i]) continue;
            const cplx c = b < nh ? h[b] : std::conj(hn[n - b]);
            out[i] = c * (scale * w.sign[i]);
        }
    }
    return SpectralField(g, std::move(out), true);
}

} // namespace detail

inline SpectralField forward_transform(std::span<const double> values, const GridSpec& g) {
    return detail::forward_real(values, g, false);
}

/// Coefficients -> complex physical samples.
inline CVec to_physical(const SpectralField& f) {
    const auto& g = f.grid();
    const auto& w = wavenumbers(g);
    CVec in(g.size()), out(g.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = f[i] * w.sign[i];
    fftw_execute_dft(detail::plans_for(g.n).backward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

/// Real part of the physical samples (the field itself when is_real()).
inline RVec to_physical_real(const SpectralField& f) {
    if (f.is_real()) {
        const auto& g = f.grid();
        const auto& w = wavenumbers(g);
        const int n = g.n, nh = n / 2 + 1;
        detail::RealScratch& sc = detail::real_scratch(n);
        for (int a = 0; a < n; ++a) {
            cplx* h = sc.half.data() + static_cast<std::size_t>(a) * nh;
            const std::size_t row = g.idx(a, 0);
            for (int b = 0; b < nh; ++b) h[b] = f[row + b] * w.sign[row + b];
        }
        auto* rout = reinterpret_cast<double*>(sc.in.data());
        fftw_execute_dft_c2r(detail::plans_for(n).backward_real, reinterpret_cast<fftw_complex*>(sc.half.data()), rout);
        return RVec(rout, rout + g.size());
    }
    CVec c = to_physical(f);
    RVec r(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) r[i] = c[i].real();
    return r;
}

/// Physical samples of m(D) f for a real field, with the symbol applied while packing the half spectrum.
/// m(i) is the multiplier at coefficient index i and must satisfy m(-k) = conj(m(k)).
template <class Sym>
RVec to_physical_real_with(const SpectralField& f, Sym&& m) {
    const auto& g = f.grid();
    const auto& w = wavenumbers(g);
    const int n = g.n, nh = n / 2 + 1;
    if (!f.is_real()) throw PreconditionError("to_physical_real_with: field must be real");
    detail::RealScratch& sc = detail::real_scratch(n);
    for (int a = 0; a < n; ++a) {
        cplx* h = sc.half.data() + static_cast<std::size_t>(a) * nh;
        const std::size_t row = g.idx(a, 0);
        for (int b = 0; b < nh; ++b) h[b] = f[row + b] * (w.sign[row + b] * cplx(m(row + b)));
    }
    auto* rout = reinterpret_cast<double*>(sc.in.data());
    fftw_execute_dft_c2r(detail::plans_for(n).backward_real, reinterpret_cast<fftw_complex*>(sc.half.data()), rout);
    return RVec(rout, rout + g.size());
}

/// Dealiased coefficients of sum_j m(j, i) * transform(v_j) for real sample arrays v_j, in a single output pass.
template <class Sym>
SpectralField forward_real_combined(const std::vector<const RVec*>& vs, const GridSpec& g, Sym&& m) {
    const int n = g.n, nh = n / 2 + 1;
    const std::size_t hs = static_cast<std::size_t>(n) * nh;
    thread_local std::vector<CVec> halves;
    if (halves.size() < vs.size()) halves.resize(vs.size());
    detail::RealScratch& sc = detail::real_scratch(n);
    auto* rin = reinterpret_cast<double*>(sc.in.data());
    for (std::size_t j = 0; j < vs.size(); ++j) {
        if (vs[j]->size() != g.size()) throw PreconditionError("forward_real_combined: sample count mismatch");
        if (halves[j].size() != hs) halves[j].assign(hs, cplx(0.0));
        std::copy(vs[j]->begin(), vs[j]->end(), rin);
        fftw_execute_dft_r2c(detail::plans_for(n).forward_real, rin, reinterpret_cast<fftw_complex*>(halves[j].data()));
    }
    const auto& w = wavenumbers(g);
    const double scale = 1.0 / static_cast<double>(g.size());
    CVec out(g.size());
    for (int a = 0; a < n; ++a) {
        const std::size_t row = g.idx(a, 0);
        const std::size_t ra = static_cast<std::size_t>(a) * nh, rn = static_cast<std::size_t>((n - a) % n) * nh;
        for (int b = 0; b < n; ++b) {
            const std::size_t i = row + b;
            if (!w.keep[i]) continue;
            cplx acc = 0.0;
            for (std::size_t j = 0; j < vs.size(); ++j) {
                const cplx c = b < nh ? halves[j][ra + b] : std::conj(halves[j][rn + (n - b)]);
                acc += cplx(m(j, i)) * c;
            }
            out[i] = acc * (scale * w.sign[i]);
        }
    }
    return SpectralField(g, std::move(out), true);
}

/// Physical samples of two real fields with a single complex transform.
inline std::pair<RVec, RVec> to_physical_pair(const SpectralField& a, const SpectralField& b) {
    a.check_same(b);
    const auto& g = a.grid();
    const auto& w = wavenumbers(g);
    CVec in(g.size()), out(g.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = (a[i] + cplx(0.0, 1.0) * b[i]) * w.sign[i];
    fftw_execute_dft(detail::plans_for(g.n).backward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    std::pair<RVec, RVec> r{RVec(g.size()), RVec(g.size())};
    for (std::size_t i = 0; i < out.size(); ++i) {
        r.first[i] = out[i].real();
        r.second[i] = out[i].imag();
    }
    return r;
}

/// Coefficients of two real sample arrays with a single complex transform.
inline std::pair<SpectralField, SpectralField> forward_pair(const RVec& a, const RVec& b, const GridSpec& g) {
    if (a.size() != g.size() || b.size() != g.size()) throw PreconditionError("forward_pair: sample count mismatch");
    CVec in(g.size()), out(g.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = cplx(a[i], b[i]);
    fftw_execute_dft(detail::plans_for(g.n).forward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const auto& w = wavenumbers(g);
    const double scale = 1.0 / static_cast<double>(g.size());
    std::pair<SpectralField, SpectralField> r{SpectralField(g, true), SpectralField(g, true)};
    for (std::size_t i = 0; i < out.size(); ++i) {
        const cplx c = out[i], cn = std::conj(out[w.neg[i]]);
        r.first[i] = 0.5 * (c + cn) * scale * w.sign[i];
        r.second[i] = cplx(0.0, -0.5) * (c - cn) * scale * w.sign[i];
    }
    return r;
}

/// Samples a function f(x1, x2) on the centred grid.
template <class Fn>
SpectralField sample(const GridSpec& g, Fn&& fn) {
    using R = decltype(fn(0.0, 0.0));
    if constexpr (std::is_same_v<R, double>) {
        RVec v(g.size());
        for (int a = 0; a < g.n; ++a)
            for (int b = 0; b < g.n; ++b) v[g.idx(a, b)] = fn(g.coord(a), g.coord(b));
        return forward_transform(std::span<const double>(v), g);
    } else {
        std::vector<cplx> v(g.size());
        for (int a = 0; a < g.n; ++a)
            for (int b = 0; b < g.n; ++b) v[g.idx(a, b)] = fn(g.coord(a), g.coord(b));
        return forward_transform(std::span<const cplx>(v), g, false);
    }
}

} // namespace capwave
