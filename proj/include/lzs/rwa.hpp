#pragma once

// Rotating-frame (Bessel sideband) predictors and the weak-driving Rabi limit.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lzs/specfun.hpp"
#include "lzs/types.hpp"

namespace lzs {

enum class Validity { valid, marginal, invalid };

inline const char* to_string(Validity v) {
    switch (v) {
        case Validity::valid: return "valid";
        case Validity::marginal: return "marginal";
        case Validity::invalid: return "invalid";
    }
    return "invalid";
}

struct RwaPrediction {
    int n = 0;                     // resonant sideband; photon number is |n|
    double detuning = 0.0;         // nω + ε₀
    double omega_osc = 0.0;        // Ω = Δ|J_n(A/ω)|
    std::optional<double> width;   // Ω/|n|; empty for n = 0
    Validity validity = Validity::valid;
    std::string reason;
};

/// RWA needs ω ≫ Δ: invalid below ω/Δ = 1, marginal below 3.
struct RwaThresholds {
    double invalid_below = 1.0;
    double marginal_below = 3.0;
};

namespace detail {

// Nearest integer to x >= 0, exact half-integers go down.
inline long nearest_index_tie_down(double x) {
    const double base = std::floor(x);
    return static_cast<long>(x - base > 0.5 ? base + 1.0 : base);
}

}  // namespace detail

/// Integer n minimizing |nω + ε₀|. For ε₀, ω > 0 this is -round(ε₀/ω); ties
/// go to the smaller |n|.
inline int rwa_resonant_index(const DriveParams& p) {
    if (!(p.omega > 0.0)) throw config_error("rwa_resonant_index: omega must be positive");
    const double x = p.epsilon0 / p.omega;
    const long k = detail::nearest_index_tie_down(std::abs(x));
    return static_cast<int>(x >= 0.0 ? -k : k);
}

inline double rwa_frequency(const DriveParams& p, int n) {
    return p.delta * std::abs(bessel_jn(n, p.amplitude / p.omega));
}

/// Resonance width scale Ω/|n|; undefined for n = 0.
inline double rwa_width(double omega_osc, int n) {
    if (n == 0) throw std::domain_error("rwa_width: not applicable for n = 0");
    return omega_osc / std::abs(n);
}

inline Validity rwa_validity(const DriveParams& p, const RwaThresholds& th = {}) {
    const double ratio = p.omega / p.delta;
    if (ratio < th.invalid_below) return Validity::invalid;
    if (ratio < th.marginal_below) return Validity::marginal;
    return Validity::valid;
}

inline RwaPrediction rwa_predict(const DriveParams& p, const RwaThresholds& th = {}) {
    RwaPrediction r;
    r.n = rwa_resonant_index(p);
    r.detuning = r.n * p.omega + p.epsilon0;
    r.omega_osc = rwa_frequency(p, r.n);
    if (r.n != 0) r.width = rwa_width(r.omega_osc, r.n);
    r.validity = rwa_validity(p, th);
    switch (r.validity) {
        case Validity::invalid: r.reason = "omega/delta < 1: sidebands overlap"; break;
        case Validity::marginal: r.reason = "omega/delta < 3: sidebands not well separated"; break;
        case Validity::valid: r.reason = "omega >> delta"; break;
    }
    return r;
}

/// Drive amplitudes A_k = ω·j_{0,k} at which the n = 0 coupling vanishes.
inline std::vector<double> cdt_amplitudes(double omega, int k_max) {
    if (!(omega > 0.0)) throw config_error("cdt_amplitudes: omega must be positive");
    if (k_max < 1 || k_max > 20) throw std::out_of_range("cdt_amplitudes: k_max must be in [1, 20]");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) out.push_back(omega * bessel_j0_zero(k));
    return out;
}

struct RabiPrediction {
    double omega_res = 0.0;   // √(Δ² + ε₀²)
    double omega_rabi = 0.0;  // (A sin α)/2, tan α = Δ/ε₀
    bool valid = true;        // A ≤ 0.2·√(Δ² + ε₀²)
};

inline RabiPrediction rabi_weak_driving(const DriveParams& p) {
    RabiPrediction r;
    r.omega_res = std::hypot(p.delta, p.epsilon0);
    const double sin_alpha = p.delta / r.omega_res;  // α = atan2(Δ, ε₀)
    r.omega_rabi = 0.5 * p.amplitude * sin_alpha;
    r.valid = p.amplitude <= 0.2 * r.omega_res;
    return r;
}

}  // namespace lzs
