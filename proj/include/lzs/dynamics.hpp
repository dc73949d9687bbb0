#pragma once

// Exact (up to the second-order exponential-midpoint rule) propagation of the
// driven two-level Hamiltonian.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "lzs/types.hpp"

namespace lzs {

inline constexpr int min_steps_per_period = 16;
inline constexpr int default_steps_per_period = 256;

inline double drive_epsilon(double t, const DriveParams& p) {
    return p.epsilon0 + p.amplitude * std::cos(p.omega * t + p.phi);
}

/// Traceless Hermitian 2x2 matrix x·σx + z·σz.
struct TracelessHermitian2 {
    double x = 0.0;
    double z = 0.0;

    complex entry(int row, int col) const {
        if (row == col) return row == 0 ? complex{z} : complex{-z};
        return complex{x};
    }
    /// Non-negative eigenvalue; the spectrum is {-r, +r}.
    double half_gap() const { return std::hypot(x, z); }
};

/// H(t) = -(Δ/2)σx - (ε(t)/2)σz.
inline TracelessHermitian2 hamiltonian(double t, const DriveParams& p) {
    return {-0.5 * p.delta, -0.5 * drive_epsilon(t, p)};
}

/// exp(-i h H) for a constant traceless Hermitian H, in closed form.
inline Unitary2 exp_minus_i(const TracelessHermitian2& h_mat, double h) {
    const double r = h_mat.half_gap();
    const double c = std::cos(h * r);
    const double s_over_r = r > 0.0 ? std::sin(h * r) / r : h;
    const complex mi{0.0, -s_over_r};
    return {complex{c} + mi * h_mat.z, mi * h_mat.x, mi * h_mat.x, complex{c} - mi * h_mat.z};
}

/// One exponential-midpoint step exp(-i h H(t + h/2)).
inline Unitary2 step_unitary(double t, double h, const DriveParams& p) {
    return exp_minus_i(hamiltonian(t + 0.5 * h, p), h);
}

/// Substep length for a given resolution of the drive period.
inline double substep(const DriveParams& p, int steps_per_period) {
    if (steps_per_period < min_steps_per_period)
        throw config_error("steps_per_period must be at least " +
                           std::to_string(min_steps_per_period));
    return p.period() / steps_per_period;
}

/// Smallest resolution (at least `floor`) keeping the relative phase accrued
/// per substep, h·√(Δ² + ε_max²), below max_step_phase.
inline int recommended_steps_per_period(const DriveParams& p, double max_step_phase = 0.1,
                                        int floor = default_steps_per_period) {
    if (!(max_step_phase > 0.0)) throw config_error("max_step_phase must be positive");
    const double gap = std::hypot(p.delta, p.epsilon0 + p.amplitude);
    const double needed = std::ceil(p.period() * gap / max_step_phase);
    return std::max(floor, static_cast<int>(std::min(needed, 1e8)));
}

inline std::size_t steps_to_cover(double t_end, double h) {
    return static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
}

/// Evolve psi0 from t = 0 through n_steps substeps of length h, calling
/// visit(step_index, state) after each step. Returns the final state.
template <class Visitor>
QubitState evolve(const DriveParams& p, QubitState psi, double h, std::size_t n_steps,
                  Visitor&& visit) {
    for (std::size_t k = 0; k < n_steps; ++k) {
        psi = step_unitary(static_cast<double>(k) * h, h, p) * psi;
        visit(k + 1, psi);
    }
    return psi;
}

/// Composed propagator U(n_steps·h, 0).
inline Unitary2 propagator(const DriveParams& p, double h, std::size_t n_steps) {
    Unitary2 u;
    for (std::size_t k = 0; k < n_steps; ++k) u = step_unitary(static_cast<double>(k) * h, h, p) * u;
    return u;
}

/// P_up(t) sampled at t = 0 and after every substep up to (at least) t_end.
inline TimeSeries propagate_exact(const DriveParams& p, const QubitState& psi0, double t_end,
                                  int steps_per_period = default_steps_per_period) {
    p.validate();
    if (!(t_end > 0.0)) throw config_error("t_end must be positive");
    const double h = substep(p, steps_per_period);
    const std::size_t n = steps_to_cover(t_end, h);

    TimeSeries ts;
    ts.t0 = 0.0;
    ts.dt = h;
    ts.values.reserve(n + 1);
    ts.values.push_back(psi0.p_up());
    evolve(p, psi0, h, n, [&](std::size_t, const QubitState& s) { ts.values.push_back(s.p_up()); });
    return ts;
}

/// Final state only; same stepping as propagate_exact.
inline QubitState propagate_state(const DriveParams& p, const QubitState& psi0, double t_end,
                                  int steps_per_period = default_steps_per_period) {
    p.validate();
    const double h = substep(p, steps_per_period);
    return evolve(p, psi0, h, steps_to_cover(t_end, h), [](std::size_t, const QubitState&) {});
}

/// Lower eigenstate of H for bias eps; |down> for eps ≪ -Δ, |up> for eps ≫ Δ.
inline QubitState adiabatic_ground_state(double delta, double eps) {
    const double theta = std::atan2(delta, eps);
    return QubitState(complex{std::cos(0.5 * theta)}, complex{std::sin(0.5 * theta)});
}

inline double overlap_probability(const QubitState& a, const QubitState& b) {
    return std::norm(std::conj(a.up()) * b.up() + std::conj(a.down()) * b.down());
}

inline constexpr std::size_t min_sweep_steps = 1000;

/// Evolve under ε(t) = v·t from ε = -span to ε = +span. The span should be
/// many times Δ for the result to approximate an isolated crossing.
inline QubitState propagate_linear_sweep(double delta, double v, double span,
                                         const QubitState& psi0, std::size_t steps) {
    if (steps < min_sweep_steps)
        throw config_error("linear sweep needs at least " + std::to_string(min_sweep_steps) +
                           " steps");
    if (!(v > 0.0) || !(span > 0.0) || delta < 0.0)
        throw config_error("linear sweep needs v > 0, span > 0, delta >= 0");

    const double t_start = -span / v;
    const double h = 2.0 * span / v / static_cast<double>(steps);
    QubitState psi = psi0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t_mid = t_start + (static_cast<double>(k) + 0.5) * h;
        psi = exp_minus_i({-0.5 * delta, -0.5 * v * t_mid}, h) * psi;
    }
    return psi;
}

}  // namespace lzs
