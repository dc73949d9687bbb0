#pragma once

// Special-function kernels: integer-order Bessel J, complex log-gamma on the
// right half-plane, the Landau-Zener Stokes phase and zeros of J0.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "lzs/types.hpp"

namespace lzs {

inline constexpr int max_bessel_order = 200;

namespace detail {

// Σ (-1)^k (x/2)^{2k+n} / (k! (k+n)!) for x >= 0, n >= 0.
inline double bessel_jn_series(int n, double x) {
    const double half = 0.5 * x;
    double term = 1.0;
    for (int j = 1; j <= n; ++j) term *= half / j;
    if (term == 0.0) return 0.0;
    const double q = -half * half;
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= q / (double(k) * double(k + n));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// Miller's downward recurrence normalized by J0 + 2 Σ J_{2k} = 1; x > 0, n >= 0.
inline double bessel_jn_miller(int n, double x) {
    const int scale_ref = std::max(n, static_cast<int>(x));
    int start = scale_ref + 30 + static_cast<int>(std::sqrt(40.0 * scale_ref));
    start += start % 2;

    constexpr double big = 1e250;
    constexpr double rescale = 1e-250;
    const double two_over_x = 2.0 / x;

    double f_next = 0.0;    // f_{k+1}
    double f_k = 1e-300;    // f_k, arbitrary seed at k = start
    double sum = 2.0 * f_k; // start is even
    double result = (n == start) ? f_k : 0.0;

    for (int k = start; k >= 1; --k) {
        const double f_prev = double(k) * two_over_x * f_k - f_next;
        f_next = f_k;
        f_k = f_prev;
        const int idx = k - 1;
        if (idx == n) result = f_k;
        if (idx > 0 && idx % 2 == 0) sum += 2.0 * f_k;
        if (std::abs(f_k) > big) {
            f_k *= rescale;
            f_next *= rescale;
            sum *= rescale;
            result *= rescale;
        }
    }
    sum += f_k;  // f_0
    return result / sum;
}

}  // namespace detail

/// Bessel function of the first kind J_n(x), integer order |n| <= 200.
/// Power series below |x| = 12, Miller recurrence above.
inline double bessel_jn(int n, double x) {
    if (!std::isfinite(x)) throw std::domain_error("bessel_jn: argument must be finite");
    if (std::abs(n) > max_bessel_order)
        throw std::domain_error("bessel_jn: |n| exceeds " + std::to_string(max_bessel_order));

    double sign = 1.0;
    if (n < 0) {
        n = -n;
        if (n % 2) sign = -sign;
    }
    if (x < 0.0) {
        x = -x;
        if (n % 2) sign = -sign;
    }
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;

    const double value = x < 12.0 ? detail::bessel_jn_series(n, x) : detail::bessel_jn_miller(n, x);
    return sign * value;
}

/// k-th positive zero of J0 for 1 <= k <= 20.
inline double bessel_j0_zero(int k) {
    if (k < 1 || k > 20) throw std::out_of_range("bessel_j0_zero: k must be in [1, 20]");

    const double guess = (k - 0.25) * pi;
    double lo = guess - 0.5 * pi;
    double hi = guess + 0.5 * pi;
    double f_lo = bessel_jn(0, lo);
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = bessel_jn(0, mid);
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    // Newton with J0' = -J1, kept inside the bracket.
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 20; ++it) {
        const double step = bessel_jn(0, x) / bessel_jn(1, x);
        const double next = std::clamp(x + step, lo, hi);
        if (std::abs(next - x) < 1e-15 * x) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

/// log Γ(z) for Re z > 0, continuous branch (Lanczos, g = 7, 9 terms).
inline complex log_gamma_complex(complex z) {
    if (std::isnan(z.real()) || std::isnan(z.imag()))
        throw std::domain_error("log_gamma_complex: NaN argument");
    if (z.real() <= 0.0)
        throw std::domain_error("log_gamma_complex: requires Re(z) > 0");

    static constexpr std::array<double, 9> coeff = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double g = 7.0;
    const double half_log_two_pi = 0.5 * std::log(2.0 * pi);

    const complex w = z - 1.0;
    complex series = coeff[0];
    for (std::size_t i = 1; i < coeff.size(); ++i) series += coeff[i] / (w + double(i));
    const complex t = w + g + 0.5;
    return half_log_two_pi + (w + 0.5) * std::log(t) - t + std::log(series);
}

/// θ_Stokes(δ) = π/4 + arg Γ(1 - iδ) + δ(ln δ - 1), with δ = Δ²/(4v).
/// Tends to π/4 for fast crossings and to 0 for adiabatic ones.
inline double stokes_phase(double delta_adiab) {
    if (!(delta_adiab > 0.0) || !std::isfinite(delta_adiab))
        throw std::domain_error("stokes_phase: adiabaticity parameter must be positive");
    const double arg_gamma = log_gamma_complex(complex{1.0, -delta_adiab}).imag();
    return 0.25 * pi + arg_gamma + delta_adiab * (std::log(delta_adiab) - 1.0);
}

}  // namespace lzs
