#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lzs {

using complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// Error taxonomy. The CLI maps these onto exit codes 2/3/4.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Requested physics is outside the validity domain of a method (e.g. no
// level crossing for the transfer-matrix picture).
struct regime_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parameters of H(t) = -(Δ/2)σx - (ε(t)/2)σz with ε(t) = ε₀ + A cos(ωt + φ).
/// Energies are angular frequencies (ħ = 1).
struct DriveParams {
    double delta = 1.0;
    double epsilon0 = 0.0;
    double amplitude = 0.0;
    double omega = 1.0;
    double phi = 0.0;

    double period() const { return 2.0 * pi / omega; }

    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(delta) || !finite(epsilon0) || !finite(amplitude) || !finite(omega) ||
            !finite(phi))
            throw config_error("drive parameters must be finite");
        if (delta <= 0.0) throw config_error("delta must be positive");
        if (omega <= 0.0) throw config_error("omega must be positive");
        if (amplitude < 0.0) throw config_error("amplitude must be non-negative");
        if (epsilon0 < 0.0) throw config_error("epsilon0 must be non-negative");
    }
};

/// Normalized amplitude pair in the {|up>, |down>} basis.
class QubitState {
public:
    static constexpr double norm_tolerance = 1e-12;

    QubitState(complex up, complex down) : up_(up), down_(down) {
        if (std::abs(norm2() - 1.0) > norm_tolerance)
            throw std::domain_error("QubitState: amplitudes are not normalized");
    }

    static QubitState spin_up() { return {complex{1.0, 0.0}, complex{0.0, 0.0}}; }
    static QubitState spin_down() { return {complex{0.0, 0.0}, complex{1.0, 0.0}}; }

    // Skips the normalization check; for propagated states whose norm drifts
    // by rounding only.
    static QubitState unchecked(complex up, complex down) {
        QubitState s;
        s.up_ = up;
        s.down_ = down;
        return s;
    }

    complex up() const { return up_; }
    complex down() const { return down_; }
    double p_up() const { return std::norm(up_); }
    double p_down() const { return std::norm(down_); }
    double norm2() const { return std::norm(up_) + std::norm(down_); }

private:
    QubitState() = default;
    complex up_{1.0, 0.0};
    complex down_{0.0, 0.0};
};

/// 2x2 complex matrix used for evolution operators. Row-major entries.
class Unitary2 {
public:
    Unitary2() : m_{complex{1.0}, complex{0.0}, complex{0.0}, complex{1.0}} {}
    Unitary2(complex u11, complex u12, complex u21, complex u22) : m_{u11, u12, u21, u22} {}

    static Unitary2 identity() { return {}; }
    static Unitary2 z_phase(double beta) {
        // diag(e^{-iβ}, e^{iβ})
        return {std::polar(1.0, -beta), complex{0.0}, complex{0.0}, std::polar(1.0, beta)};
    }

    complex u11() const { return m_[0]; }
    complex u12() const { return m_[1]; }
    complex u21() const { return m_[2]; }
    complex u22() const { return m_[3]; }

    Unitary2 operator*(const Unitary2& r) const {
        return {m_[0] * r.m_[0] + m_[1] * r.m_[2], m_[0] * r.m_[1] + m_[1] * r.m_[3],
                m_[2] * r.m_[0] + m_[3] * r.m_[2], m_[2] * r.m_[1] + m_[3] * r.m_[3]};
    }
    Unitary2& operator*=(const Unitary2& r) { return *this = *this * r; }

    QubitState operator*(const QubitState& s) const {
        return QubitState::unchecked(m_[0] * s.up() + m_[1] * s.down(),
                                     m_[2] * s.up() + m_[3] * s.down());
    }

    Unitary2 adjoint() const {
        return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
    }
    complex det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

    /// Largest entrywise deviation of U†U from the identity.
    double unitarity_defect() const {
        const Unitary2 p = adjoint() * *this;
        return std::max({std::abs(p.m_[0] - 1.0), std::abs(p.m_[1]), std::abs(p.m_[2]),
                         std::abs(p.m_[3] - 1.0)});
    }
    bool is_unitary(double tol = 1e-12) const {
        return unitarity_defect() <= tol && std::abs(std::abs(det()) - 1.0) <= tol;
    }

    double max_abs_diff(const Unitary2& o) const {
        double d = 0.0;
        for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(m_[i] - o.m_[i]));
        return d;
    }

private:
    std::array<complex, 4> m_;
};

/// Uniformly sampled occupation probability P_up(t).
struct TimeSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double duration() const { return values.empty() ? 0.0 : dt * double(values.size() - 1); }
};

}  // namespace lzs
