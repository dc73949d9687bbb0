#pragma once

// Transfer-matrix picture of strong driving: each drive period is two
// Landau-Zener crossings separated by free phase evolution,
//
//     G_cycle = G_LZ,2 · G_2 · G_LZ,1 · G_1,
//
// where region 1 is the ε > 0 stretch (it ends at the downward crossing k=1)
// and region 2 is the ε < 0 stretch (it ends at the upward crossing k=2).
// Phases use the boundary-independent forms θ̃ together with
// θ̃_LZ,1 = π - θ_Stokes and θ̃_LZ,2 = θ_Stokes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "lzs/quadrature.hpp"
#include "lzs/rwa.hpp"
#include "lzs/specfun.hpp"
#include "lzs/types.hpp"

namespace lzs {

struct CrossingTimes {
    double t_c1 = 0.0;  // ε goes + → -
    double t_c2 = 0.0;  // ε goes - → +
};

struct LzCrossing {
    double chi = 0.0;          // sin²(χ/2) = 1 - exp(-πΔ²/2v)
    double theta_lz_1 = 0.0;   // π - θ_Stokes
    double theta_lz_2 = 0.0;   // θ_Stokes
    double sweep_rate = 0.0;   // v = ω√(A² - ε₀²)
    double delta_adiab = 0.0;  // Δ²/(4v)
};

/// Between-crossing phases. theta1/theta2 are the boundary-dependent values for
/// crossing windows of half-width tau; theta_tilde_* are boundary independent.
struct CyclePhases {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double theta_tilde_1 = 0.0;
    double theta_tilde_2 = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
    double tau = 0.0;
};

/// U = R(ζ, φ) · diag(e^{-iθ/2}, e^{iθ/2}) with R an xy-axis rotation.
struct FullCycleDecomposition {
    double zeta_fc = 0.0;   // [0, π]
    double theta_fc = 0.0;  // [-2π, 2π)
    double phi_fc = 0.0;    // (-π, π]

    Unitary2 reconstruct() const {
        const double c = std::cos(0.5 * zeta_fc);
        const double s = std::sin(0.5 * zeta_fc);
        const Unitary2 rot{complex{c}, s * std::polar(1.0, phi_fc), -s * std::polar(1.0, -phi_fc),
                           complex{c}};
        return rot * Unitary2::z_phase(0.5 * theta_fc);
    }
};

/// Crossing-speed thresholds on Aω/Δ². Between them the crossings are of
/// intermediate speed.
struct CrossingSpeedThresholds {
    double fast_at_least = 10.0;
    double slow_at_most = 0.1;
};

inline bool has_crossings(const DriveParams& p) { return p.amplitude > p.epsilon0; }

inline void require_crossings(const DriveParams& p) {
    if (!has_crossings(p))
        throw regime_error("transfer-matrix picture needs A > eps0 (the bias never crosses zero)");
}

inline double crossing_speed(const DriveParams& p) {
    return p.amplitude * p.omega / (p.delta * p.delta);
}

namespace detail {

inline double wrap_to_period(double t, double period) {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    return r;
}

inline double wrap_angle(double x) {
    double r = std::remainder(x, 2.0 * pi);  // [-π, π]
    if (r <= -pi) r += 2.0 * pi;
    return r;
}

// Drive phase u = ωt + φ at which the downward crossing happens: cos u = -ε₀/A.
inline double crossing_phase(const DriveParams& p) { return std::acos(-p.epsilon0 / p.amplitude); }

// ½(√(ε² + Δ²) - |ε|), written without cancellation.
inline double adiabatic_excess(double eps, double delta) {
    return 0.5 * delta * delta / (std::hypot(eps, delta) + std::abs(eps));
}

}  // namespace detail

inline CrossingTimes crossing_times(const DriveParams& p) {
    require_crossings(p);
    const double a = detail::crossing_phase(p);
    const double period = p.period();
    return {detail::wrap_to_period((a - p.phi) / p.omega, period),
            detail::wrap_to_period((2.0 * pi - a - p.phi) / p.omega, period)};
}

/// Linearized sweep rate |dε/dt| at either crossing.
inline double sweep_rate(const DriveParams& p) {
    require_crossings(p);
    return p.omega * std::sqrt((p.amplitude - p.epsilon0) * (p.amplitude + p.epsilon0));
}

inline double lz_transition_probability(double delta, double v) {
    return -std::expm1(-pi * delta * delta / (2.0 * v));
}

inline double lz_mixing_angle(const DriveParams& p) {
    const double prob = lz_transition_probability(p.delta, sweep_rate(p));
    return 2.0 * std::asin(std::sqrt(prob));
}

inline LzCrossing lz_crossing(const DriveParams& p) {
    LzCrossing c;
    c.sweep_rate = sweep_rate(p);
    c.chi = 2.0 * std::asin(std::sqrt(lz_transition_probability(p.delta, c.sweep_rate)));
    c.delta_adiab = p.delta * p.delta / (4.0 * c.sweep_rate);
    const double stokes = stokes_phase(c.delta_adiab);
    c.theta_lz_1 = pi - stokes;
    c.theta_lz_2 = stokes;
    return c;
}

/// [[cos χ/2, sin χ/2 e^{iθ}], [-sin χ/2 e^{-iθ}, cos χ/2]]
inline Unitary2 lz_transfer_matrix(double chi, double theta) {
    const double c = std::cos(0.5 * chi);
    const double s = std::sin(0.5 * chi);
    return {complex{c}, s * std::polar(1.0, theta), -s * std::polar(1.0, -theta), complex{c}};
}

inline Unitary2 lz_transfer_matrix(const LzCrossing& crossing, int k) {
    if (k != 1 && k != 2) throw std::invalid_argument("lz_transfer_matrix: k must be 1 or 2");
    return lz_transfer_matrix(crossing.chi, k == 1 ? crossing.theta_lz_1 : crossing.theta_lz_2);
}

/// Between-crossing phases. tau is the crossing-window half-width used for
/// the boundary-dependent theta1/theta2; by default one tenth of the shorter
/// between-crossing interval.
inline CyclePhases theta_tildes(const DriveParams& p, std::optional<double> tau = std::nullopt) {
    require_crossings(p);
    const double w = p.omega;
    const double e0 = p.epsilon0;
    const double amp = p.amplitude;
    const double root = std::sqrt((amp - e0) * (amp + e0));
    const double acos_ratio = std::acos(e0 / amp);
    const double a = detail::crossing_phase(p);  // region 1 is |u| < a
    const double b = acos_ratio;                  // region 2 is |u - π| < b

    // Integrands in drive phase u = ωt (φ only shifts time and drops out).
    // Region 2 uses s = π - u with ε = (ε₀ - A) + 2A sin²(s/2), which stays
    // accurate when the bias barely reaches zero.
    auto eps1 = [&](double u) { return e0 + amp * std::cos(u); };
    auto eps2 = [&](double s) {
        const double h = std::sin(0.5 * s);
        return (e0 - amp) + 2.0 * amp * h * h;
    };
    auto excess1 = [&](double u) { return detail::adiabatic_excess(eps1(u), p.delta); };
    auto excess2 = [&](double s) { return detail::adiabatic_excess(eps2(s), p.delta); };

    CyclePhases ph;
    // Both regions are symmetric about u = 0 and u = π respectively.
    ph.f1 = 2.0 / w * integrate(excess1, 0.0, a);
    ph.f2 = 2.0 / w * integrate(excess2, 0.0, b);
    ph.theta_tilde_1 = -root / w + (e0 / w) * acos_ratio - pi * e0 / w - ph.f1;
    ph.theta_tilde_2 = root / w - (e0 / w) * acos_ratio + ph.f2;

    const double shorter = std::min(2.0 * a, 2.0 * b) / w;
    ph.tau = tau.value_or(0.1 * shorter);
    if (!(ph.tau > 0.0) || 2.0 * ph.tau >= shorter)
        throw config_error("crossing window half-width must be positive and below half the "
                           "between-crossing interval");
    const double du = w * ph.tau;
    ph.theta1 = -2.0 / w * integrate([&](double u) { return 0.5 * std::hypot(eps1(u), p.delta); }, 0.0, a - du);
    ph.theta2 = 2.0 / w * integrate([&](double s) { return 0.5 * std::hypot(eps2(s), p.delta); }, 0.0, b - du);
    return ph;
}

/// ∫₀^τ √(Δ² + v²s²) ds: relative phase accrued inside half a linear-ramp window.
inline double lz_window_phase(double delta, double v, double tau) {
    const double vt = v * tau;
    return 0.5 * tau * std::hypot(delta, vt) + delta * delta / (2.0 * v) * std::asinh(vt / delta);
}

namespace detail {

inline Unitary2 compose_cycle(double chi, double theta_lz_1, double theta_lz_2, double theta1,
                              double theta2) {
    return lz_transfer_matrix(chi, theta_lz_2) * Unitary2::z_phase(theta2) *
           lz_transfer_matrix(chi, theta_lz_1) * Unitary2::z_phase(theta1);
}

}  // namespace detail

/// G_LZ,2 · G_2 · G_LZ,1 · G_1 with boundary-independent phases.
inline Unitary2 full_cycle_matrix(const DriveParams& p) {
    const LzCrossing c = lz_crossing(p);
    const CyclePhases ph = theta_tildes(p);
    return detail::compose_cycle(c.chi, c.theta_lz_1, c.theta_lz_2, ph.theta_tilde_1,
                                 ph.theta_tilde_2);
}

/// Same product built from boundary-dependent phases for crossing windows of
/// half-width tau: the LZ phases carry the linear-ramp window phase and θ_j
/// the exact drive outside the windows. The product starts at the edge of a
/// window, so it is re-referenced to the crossing centre to be comparable
/// with full_cycle_matrix.
inline Unitary2 full_cycle_matrix_windowed(const DriveParams& p, double tau) {
    const LzCrossing c = lz_crossing(p);
    const CyclePhases ph = theta_tildes(p, tau);
    const double window = lz_window_phase(p.delta, c.sweep_rate, ph.tau);
    const Unitary2 edge_to_edge = detail::compose_cycle(c.chi, c.theta_lz_1 - window,
                                                        c.theta_lz_2 + window, ph.theta1, ph.theta2);
    return Unitary2::z_phase(0.5 * window) * edge_to_edge * Unitary2::z_phase(-0.5 * window);
}

/// Factor an SU(2) matrix as R(ζ, φ) · diag(e^{-iθ/2}, e^{iθ/2}).
/// φ is set to 0 when |u12| = 0 and θ is read off u12 when |u11| = 0.
inline FullCycleDecomposition decompose_full_cycle(const Unitary2& u) {
    if (u.unitarity_defect() > 1e-10 || std::abs(u.det() - 1.0) > 1e-10)
        throw std::domain_error("decompose_full_cycle: matrix is not in SU(2)");

    const double a = std::abs(u.u11());
    const double b = std::abs(u.u12());
    FullCycleDecomposition d;
    d.zeta_fc = 2.0 * std::atan2(b, a);
    if (a == 0.0) {
        d.theta_fc = 2.0 * std::arg(u.u12());
        d.phi_fc = 0.0;
    } else {
        d.theta_fc = -2.0 * std::arg(u.u11());
        d.phi_fc = b == 0.0 ? 0.0 : detail::wrap_angle(std::arg(u.u12()) + std::arg(u.u11()));
    }
    if (d.theta_fc >= 2.0 * pi) d.theta_fc -= 4.0 * pi;
    return d;
}

/// Stroboscopic P_up at t = k·2π/ω, k = 0..n_cycles. The initial state is
/// taken at the drive maximum (ωt + φ = 0); samples are aligned to it.
inline TimeSeries propagate_tm(const DriveParams& p, const QubitState& psi0, int n_cycles) {
    p.validate();
    if (n_cycles < 1) throw config_error("propagate_tm: n_cycles must be at least 1");
    require_crossings(p);

    const LzCrossing c = lz_crossing(p);
    const CyclePhases ph = theta_tildes(p);
    const Unitary2 cycle = detail::compose_cycle(c.chi, c.theta_lz_1, c.theta_lz_2,
                                                 ph.theta_tilde_1, ph.theta_tilde_2);
    // The cycle starts at the upward crossing, half of region 1 before t = 0.
    QubitState psi = Unitary2::z_phase(-0.5 * ph.theta_tilde_1) * psi0;

    TimeSeries ts;
    ts.t0 = -p.phi / p.omega;
    ts.dt = p.period();
    ts.values.reserve(static_cast<std::size_t>(n_cycles) + 1);
    ts.values.push_back(psi0.p_up());
    for (int k = 0; k < n_cycles; ++k) {
        psi = cycle * psi;
        ts.values.push_back(psi.p_up());
    }
    return ts;
}

/// Closed-form fast-crossing frequency
///   Ω ≈ (2ω/π) √(πΔ² / (2ω√(A² - ε₀²))) |cos(θ̃₂ - π/4)|
/// with θ̃₂ ≈ √(A² - ε₀²)/ω - (ε₀/ω) cos⁻¹(ε₀/A), i.e. f₂ dropped and the Stokes
/// phase at its fast limit. Requires Aω ≥ Δ².
inline double tm_fast_frequency(const DriveParams& p) {
    require_crossings(p);
    if (crossing_speed(p) < 1.0)
        throw regime_error("fast-crossing formula needs A*omega >= delta^2");
    const double root = std::sqrt((p.amplitude - p.epsilon0) * (p.amplitude + p.epsilon0));
    const double theta2 = root / p.omega - (p.epsilon0 / p.omega) * std::acos(p.epsilon0 / p.amplitude);
    const double sin_half_chi = std::sqrt(pi * p.delta * p.delta / (2.0 * p.omega * root));
    return 2.0 * p.omega / pi * sin_half_chi * std::abs(std::cos(theta2 - 0.25 * pi));
}

struct ResonanceCheck {
    int n = 0;
    double deviation = 0.0;
};

/// Fast-crossing resonance ε₀/ω = n: nearest n (ties down) and |ε₀/ω - n|.
inline ResonanceCheck tm_fast_resonance_check(const DriveParams& p) {
    require_crossings(p);
    const double x = p.epsilon0 / p.omega;
    const long n = detail::nearest_index_tie_down(x);
    return {static_cast<int>(n), std::abs(x - static_cast<double>(n))};
}

/// Width scale δω = ω²ζ_FC/(2πε₀) of the n-th fast-crossing resonance.
inline double tm_resonance_width(const DriveParams& p, double zeta_fc, int n) {
    if (n < 1) throw std::domain_error("tm_resonance_width: not applicable for n < 1");
    if (!(p.epsilon0 > 0.0)) throw std::domain_error("tm_resonance_width: not applicable for eps0 = 0");
    return p.omega * p.omega * zeta_fc / (2.0 * pi * p.epsilon0);
}

struct SlowResonance {
    double lhs = 0.0;               // ε₀/ω + 2√(A²-ε₀²)/(πω) - (2ε₀/πω) cos⁻¹(ε₀/A)
    long nearest_integer = 0;
    double residual = 0.0;          // |lhs - nearest_integer|
    double theta_fc_refined = 0.0;  // slow-limit θ_FC = 2(θ̃₁ - θ̃₂), f₁ and f₂ included
    bool slow_regime = false;       // Aω ≤ Δ²
};

inline SlowResonance tm_slow_resonance_lhs(const DriveParams& p) {
    require_crossings(p);
    const double w = p.omega;
    const double e0 = p.epsilon0;
    const double root = std::sqrt((p.amplitude - e0) * (p.amplitude + e0));
    const double acos_ratio = std::acos(e0 / p.amplitude);

    SlowResonance r;
    r.lhs = e0 / w + 2.0 * root / (pi * w) - 2.0 * e0 / (pi * w) * acos_ratio;
    r.nearest_integer = detail::nearest_index_tie_down(r.lhs);
    r.residual = std::abs(r.lhs - static_cast<double>(r.nearest_integer));
    r.slow_regime = crossing_speed(p) <= 1.0;

    // With χ → π the cycle matrix is diagonal and θ_FC follows from g₁₁ alone.
    // This equals -2π - T with T = -2π + 2πε₀/ω + 4√(A²-ε₀²)/ω
    // - 4(ε₀/ω)cos⁻¹(ε₀/A) + 2(f₁+f₂); the sign is the one decompose_full_cycle
    // produces, and θ_FC = 2πn holds at the same points for both.
    const CyclePhases ph = theta_tildes(p);
    r.theta_fc_refined = 2.0 * (ph.theta_tilde_1 - ph.theta_tilde_2);
    return r;
}

/// Ω = ωζ_FC/(2π) from the composed cycle matrix. Holds for any crossing speed.
inline double tm_slow_frequency(const DriveParams& p) {
    return p.omega * decompose_full_cycle(full_cycle_matrix(p)).zeta_fc / (2.0 * pi);
}

}  // namespace lzs
