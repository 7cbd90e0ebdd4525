#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "grid_ops.hpp"

namespace carleman_lab {

// The fixed low-pass profile m: 1 on |s| <= 3/4, supported in |s| < 1.
inline const SmoothCutoff& lowpass_profile() {
    static const SmoothCutoff m(CutoffSpec{-1.0, -0.75, 0.75, 1.0});
    return m;
}

// m_λ = e^{-D²/λ} m, the profile convolved with the heat kernel
// (λ/4π)^{1/2} e^{-λ s²/4}.
inline double regularized_profile(double s, double lambda) {
    const double c = 0.5 * std::sqrt(lambda);
    double v = 0.5 * (std::erf(c * (s + 0.75)) - std::erf(c * (s - 0.75)));
    const double norm = std::sqrt(lambda / (4.0 * std::numbers::pi));
    auto band = [&](double x) {
        const double d = s - x;
        return lowpass_profile()(x) * norm * std::exp(-0.25 * lambda * d * d);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    // the kernel is below 1e-18 of its peak beyond this distance
    const double reach = std::sqrt(4.0 * 41.5 / lambda);
    const double as = std::abs(s);
    if (as + reach > 0.75 && as - reach < 1.0) {
        v += GK::integrate(band, -1.0, -0.75, 8, 1e-11);
        v += GK::integrate(band, 0.75, 1.0, 8, 1e-11);
    }
    return std::clamp(v, 0.0, 1.0);
}

struct MultiplierSpec {
    enum class Kind { GaussianWeight, Regularizer, LowPass, LowPassReg };
    Kind kind = Kind::LowPass;
    double eps = 0.0, tau = 1.0, lambda = 1.0, mu = 1.0;

    static MultiplierSpec gaussian_weight(double eps, double tau) {
        return {Kind::GaussianWeight, eps, tau, 1.0, 1.0};
    }
    static MultiplierSpec regularizer(double lambda) { return {Kind::Regularizer, 0.0, 1.0, lambda, 1.0}; }
    static MultiplierSpec lowpass(double mu) { return {Kind::LowPass, 0.0, 1.0, 1.0, mu}; }
    static MultiplierSpec lowpass_reg(double mu, double lambda) {
        return {Kind::LowPassReg, 0.0, 1.0, lambda, mu};
    }

    void validate() const {
        const bool ok = kind == Kind::GaussianWeight ? (eps > 0 && tau > 0)
                        : kind == Kind::Regularizer  ? lambda > 0
                        : kind == Kind::LowPass      ? mu > 0
                                                     : (mu > 0 && lambda > 0);
        if (!ok) throw ConfigError("multiplier parameters must be positive");
    }

    // symbol at angular time frequency xi
    double symbol(double xi) const {
        switch (kind) {
        case Kind::GaussianWeight: return std::exp(-eps * xi * xi / (2.0 * tau));
        case Kind::Regularizer: return std::exp(-xi * xi / lambda);
        case Kind::LowPass: return lowpass_profile()(xi / mu);
        case Kind::LowPassReg: return regularized_profile(xi / mu, lambda);
        }
        return 0.0;
    }
};

struct MultiplierOptions {
    int pad_factor = 2;
    bool periodic = false;       // transform the nt-1 samples as one period, no padding
    double edge_fraction = 0.1;  // SupportTooWide margin
    double support_tol = 1e-10;  // relative amplitude counted as support
};

namespace detail {

inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

inline int nice_size(int n) {
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

// angular frequency of bin k for a transform of length P with spacing dt
inline double bin_frequency(int k, int P, double dt) {
    const int kk = k <= P / 2 ? k : k - P;
    return 2.0 * std::numbers::pi * kk / (P * dt);
}

} // namespace detail

// first and last time index carrying amplitude above tol·max|u|; (-1, -1) for zero fields
template <typename T>
std::pair<int, int> time_support(const Field<T>& u, double tol = 1e-10) {
    double peak = 0.0;
    for (const auto& a : u.v) peak = std::max(peak, std::abs(a));
    if (peak == 0.0) return {-1, -1};
    int lo = -1, hi = -1;
    for (int i = 0; i < u.grid.nt; ++i) {
        double row = 0.0;
        for (int j = 0; j < u.grid.nx; ++j) row = std::max(row, std::abs(u(i, j)));
        if (row > tol * peak) {
            if (lo < 0) lo = i;
            hi = i;
        }
    }
    return {lo, hi};
}

template <typename T>
void check_time_support(const Field<T>& u, const MultiplierOptions& opt) {
    auto [lo, hi] = time_support(u, opt.support_tol);
    if (lo < 0) return;
    const double margin = opt.edge_fraction * (u.grid.nt - 1);
    if (lo < margin || (u.grid.nt - 1 - hi) < margin)
        throw SupportTooWide("time support [" + std::to_string(u.grid.t(lo)) + ", " +
                             std::to_string(u.grid.t(hi)) +
                             "] reaches within 10% of the grid edge");
}

// Multiply the time Fourier transform of every spatial column by symbol(ξ).
inline ComplexField apply_symbol(const ComplexField& u, const std::function<double(double)>& symbol,
                                 const MultiplierOptions& opt = {}) {
    const auto& g = u.grid;
    if (opt.periodic) {
        if (g.nt < 3) throw GridTooSmall("periodic transform needs nt >= 3");
    } else {
        check_time_support(u, opt);
    }
    const int P = opt.periodic ? g.nt - 1 : detail::nice_size(std::max(2, opt.pad_factor) * g.nt);
    const int ncols = g.nx;
    std::vector<std::complex<double>> buf(std::size_t(P) * ncols, 0.0);
    for (int i = 0; i < std::min(P, g.nt); ++i)
        for (int j = 0; j < ncols; ++j) buf[std::size_t(j) * P + i] = u(i, j);

    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fwd = fftw_plan_many_dft(1, &P, ncols, data, nullptr, 1, P, data, nullptr, 1, P,
                                 FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_many_dft(1, &P, ncols, data, nullptr, 1, P, data, nullptr, 1, P,
                                 FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    std::vector<double> sym(P);
    for (int k = 0; k < P; ++k) sym[k] = symbol(detail::bin_frequency(k, P, g.dt())) / P;
    for (int j = 0; j < ncols; ++j)
        for (int k = 0; k < P; ++k) buf[std::size_t(j) * P + k] *= sym[k];
    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    ComplexField out(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < ncols; ++j)
            out(i, j) = buf[std::size_t(j) * P + (opt.periodic ? i % P : i)];
    return out;
}

inline ComplexField apply(const MultiplierSpec& spec, const ComplexField& u,
                          const MultiplierOptions& opt = {}) {
    spec.validate();
    return apply_symbol(u, [&](double xi) { return spec.symbol(xi); }, opt);
}

// Real input: every symbol is real and even, so the output is real.
inline ScalarField apply(const MultiplierSpec& spec, const ScalarField& u,
                         const MultiplierOptions& opt = {}) {
    return real_part(apply(spec, to_complex(u), opt));
}

inline ScalarField apply_symbol(const ScalarField& u, const std::function<double(double)>& symbol,
                                const MultiplierOptions& opt = {}) {
    return real_part(apply_symbol(to_complex(u), symbol, opt));
}

// dt·Σ|u|² computed from the padded transform: dt/P·Σ|U_k|²
inline double parseval_norm_sq(const ScalarField& u, const MultiplierOptions& opt = {}) {
    const auto& g = u.grid;
    check_time_support(u, opt);
    int P = detail::nice_size(std::max(2, opt.pad_factor) * g.nt);
    std::vector<std::complex<double>> in(P), out(P);
    fftw_plan p;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        p = fftw_plan_dft_1d(P, reinterpret_cast<fftw_complex*>(in.data()),
                             reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                             FFTW_ESTIMATE);
    }
    const ScalarField w = cell_volumes(g);
    double total = 0.0;
    for (int j = 0; j < g.nx; ++j) {
        std::fill(in.begin(), in.end(), 0.0);
        for (int i = 0; i < g.nt; ++i) in[i] = u(i, j);
        fftw_execute(p);
        double s = 0.0;
        for (auto& c : out) s += std::norm(c);
        total += s / P * (w(g.nt / 2, j) / g.dt());
    }
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(p);
    }
    return total * g.dt();
}

// ‖W(tu) - (t + ε∂_t/τ)Wu‖ / ‖u‖ with W = e^{-εD_t²/2τ}
inline double conjugation_residual(const ScalarField& u, double eps, double tau,
                                   const MultiplierOptions& opt = {}) {
    const double nu = norm(u);
    if (nu == 0.0) return 0.0;
    const auto W = MultiplierSpec::gaussian_weight(eps, tau);
    const auto& g = u.grid;
    ScalarField tu(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) tu(i, j) = g.t(i) * u(i, j);
    const ScalarField lhs = apply(W, tu, opt);
    const ScalarField wu = apply(W, u, opt);
    const ScalarField wu_t = d_t(wu);
    ScalarField diff(g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            diff(i, j) = lhs(i, j) - (g.t(i) * wu(i, j) + eps / tau * wu_t(i, j));
    return norm(diff) / nu;
}

} // namespace carleman_lab
