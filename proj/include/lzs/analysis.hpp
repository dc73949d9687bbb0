#pragma once

// Observables extracted from simulated traces, parameter scans, and the
// classification of parameter points by which approximation applies.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "lzs/dynamics.hpp"
#include "lzs/rwa.hpp"
#include "lzs/transfer_matrix.hpp"
#include "lzs/types.hpp"

namespace lzs {

struct insufficient_data_error : numerical_error {
    using numerical_error::numerical_error;
};

// Grid does not bracket the feature being measured.
struct bracket_error : config_error {
    using config_error::config_error;
};

struct FrequencyEstimate {
    double omega_est = 0.0;   // dominant angular frequency of the coarse-grained trace
    double amplitude = 0.0;   // peak-to-peak of the coarse-grained trace
    double confidence = 0.0;  // spectral peak over median background
    bool suppressed = false;  // amplitude below the suppression threshold
    bool ambiguous = false;   // another peak within 3 dB
    bool below_resolution = false;  // fewer than two cycles of omega_est in the record
};

struct FrequencyOptions {
    double coarse_window = 0.0;  // boxcar length in time units; 0 disables
    std::optional<std::pair<double, double>> band;
    double suppressed_below = 0.02;
    int zero_pad = 16;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// |FFT| of a real sequence, zero-padded to n_fft.
inline std::vector<double> real_fft_magnitude(const std::vector<double>& x, std::size_t n_fft) {
    struct Free {
        void operator()(void* p) const { fftw_free(p); }
    };
    std::unique_ptr<double, Free> in(static_cast<double*>(fftw_malloc(sizeof(double) * n_fft)));
    const std::size_t n_out = n_fft / 2 + 1;
    std::unique_ptr<fftw_complex, Free> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_out)));
    if (!in || !out) throw std::bad_alloc();

    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), in.get(), out.get(), FFTW_ESTIMATE);
    }
    std::fill(in.get(), in.get() + n_fft, 0.0);
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    std::vector<double> mag(n_out);
    for (std::size_t k = 0; k < n_out; ++k) mag[k] = std::hypot(out.get()[k][0], out.get()[k][1]);
    return mag;
}

struct CoarseTrace {
    std::vector<double> values;
    double dt = 0.0;
};

// Boxcar average over `window` samples, decimated to about eight samples per
// window.
inline CoarseTrace coarse_grain(const TimeSeries& ts, std::size_t window) {
    CoarseTrace out;
    if (window <= 1) {
        out.values = ts.values;
        out.dt = ts.dt;
        return out;
    }
    if (ts.size() < window) return out;
    const std::size_t stride = std::max<std::size_t>(1, window / 8);
    std::vector<double> prefix(ts.size() + 1, 0.0);
    for (std::size_t i = 0; i < ts.size(); ++i) prefix[i + 1] = prefix[i] + ts.values[i];
    const double inv = 1.0 / static_cast<double>(window);
    for (std::size_t j = 0; j + window <= ts.size(); j += stride)
        out.values.push_back((prefix[j + window] - prefix[j]) * inv);
    out.dt = ts.dt * static_cast<double>(stride);
    return out;
}

}  // namespace detail

/// Dominant slow frequency of P_up(t): boxcar coarse-graining, Hann-windowed
/// zero-padded FFT, and quadratic interpolation around the spectral peak.
/// Frequencies below one cycle per record are excluded from the search.
inline FrequencyEstimate extract_frequency(const TimeSeries& ts, const FrequencyOptions& opt = {}) {
    if (!(ts.dt > 0.0)) throw config_error("extract_frequency: dt must be positive");
    const auto window = static_cast<std::size_t>(std::llround(opt.coarse_window / ts.dt));
    const detail::CoarseTrace coarse = detail::coarse_grain(ts, window);
    const std::size_t n = coarse.values.size();
    if (n < 32) throw insufficient_data_error("extract_frequency: trace too short after coarse-graining");

    FrequencyEstimate est;
    const auto [lo_it, hi_it] = std::minmax_element(coarse.values.begin(), coarse.values.end());
    est.amplitude = std::clamp(*hi_it - *lo_it, 0.0, 1.0);
    est.suppressed = est.amplitude < opt.suppressed_below;

    // Hann window; subtracting the window-weighted mean zeroes the DC bin.
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * pi * double(i) / double(n - 1));
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += w[i] * coarse.values[i];
    mean /= wsum;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (coarse.values[i] - mean) * w[i];

    std::size_t n_fft = 1;
    while (n_fft < n * static_cast<std::size_t>(std::max(1, opt.zero_pad))) n_fft <<= 1;
    const std::vector<double> mag = detail::real_fft_magnitude(x, n_fft);
    const double d_omega = 2.0 * pi / (double(n_fft) * coarse.dt);

    std::size_t k_lo = static_cast<std::size_t>(std::ceil(double(n_fft) / double(n)));
    std::size_t k_hi = mag.size() - 2;
    if (opt.band) {
        k_lo = std::max(k_lo, static_cast<std::size_t>(std::ceil(opt.band->first / d_omega)));
        k_hi = std::min(k_hi, static_cast<std::size_t>(std::floor(opt.band->second / d_omega)));
    }
    k_lo = std::max<std::size_t>(k_lo, 1);
    if (k_lo >= k_hi) throw insufficient_data_error("extract_frequency: empty search band");

    std::size_t k_peak = k_lo;
    for (std::size_t k = k_lo; k <= k_hi; ++k)
        if (mag[k] > mag[k_peak]) k_peak = k;

    double offset = 0.0;
    const double y0 = mag[k_peak - 1], y1 = mag[k_peak], y2 = mag[k_peak + 1];
    const double curv = y0 - 2.0 * y1 + y2;
    if (curv < 0.0) offset = std::clamp(0.5 * (y0 - y2) / curv, -0.5, 0.5);
    est.omega_est = std::max(0.0, (double(k_peak) + offset) * d_omega);
    const double record = double(n) * coarse.dt;
    est.below_resolution = est.omega_est * record < 2.0 * 2.0 * pi;

    std::vector<double> band_mag(mag.begin() + long(k_lo), mag.begin() + long(k_hi) + 1);
    auto mid = band_mag.begin() + long(band_mag.size() / 2);
    std::nth_element(band_mag.begin(), mid, band_mag.end());
    est.confidence = *mid > 0.0 ? y1 / *mid : std::numeric_limits<double>::infinity();

    // Another local maximum within 3 dB (power) of the main one, outside its
    // main lobe.
    const double lobe = 2.0 * double(n_fft) / double(n);
    const double threshold = y1 / std::sqrt(2.0);
    for (std::size_t k = k_lo + 1; k < k_hi; ++k) {
        if (std::abs(double(k) - double(k_peak)) <= lobe) continue;
        if (mag[k] >= mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] >= threshold) {
            est.ambiguous = true;
            break;
        }
    }
    return est;
}

// ---------------------------------------------------------------------------
// Regime classification

enum class Regime { rabi, rwa, tm_fast, tm_slow, tm_intermediate, outside };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::rabi: return "RABI";
        case Regime::rwa: return "RWA";
        case Regime::tm_fast: return "TM_FAST";
        case Regime::tm_slow: return "TM_SLOW";
        case Regime::tm_intermediate: return "TM_INTERMEDIATE";
        case Regime::outside: return "OUTSIDE";
    }
    return "OUTSIDE";
}

struct RegimeLabel {
    Regime label = Regime::outside;
    bool rabi = false;
    bool rwa = false;
    bool tm = false;
    double a_over_delta = 0.0;
    double omega_over_delta = 0.0;
    double crossing_speed = 0.0;  // Aω/Δ²
};

/// Rabi: A/Δ < 1. RWA: ω/Δ > 1. TM: A/Δ > 1 and A > ε₀, split by Aω/Δ².
/// The label is the most specific applicable region (TM sub-region, then
/// Rabi, then RWA); all applicable flags are set.
inline RegimeLabel classify_regime(const DriveParams& p, const CrossingSpeedThresholds& th = {}) {
    RegimeLabel r;
    r.a_over_delta = p.amplitude / p.delta;
    r.omega_over_delta = p.omega / p.delta;
    r.crossing_speed = p.amplitude * p.omega / (p.delta * p.delta);
    r.rabi = r.a_over_delta < 1.0;
    r.rwa = r.omega_over_delta > 1.0;
    r.tm = r.a_over_delta > 1.0 && p.amplitude > p.epsilon0;

    if (r.tm) {
        if (r.crossing_speed >= th.fast_at_least)
            r.label = Regime::tm_fast;
        else if (r.crossing_speed <= th.slow_at_most)
            r.label = Regime::tm_slow;
        else
            r.label = Regime::tm_intermediate;
    } else if (r.rabi) {
        r.label = Regime::rabi;
    } else if (r.rwa) {
        r.label = Regime::rwa;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Simulation sizing and per-point measurement

struct SimConfig {
    int steps_per_period = default_steps_per_period;
    double max_step_phase = 0.0;  // > 0 raises steps_per_period to keep the per-step phase below it
    double slow_periods = 5.0;
    int min_drive_periods = 50;
    int max_drive_periods = 5000;
};

struct RunSize {
    int drive_periods = 0;
    bool capped = false;
};

/// max(slow_periods predicted slow periods, min_drive_periods), capped at
/// max_drive_periods.
inline RunSize size_run(const DriveParams& p, double predicted_omega, const SimConfig& sim) {
    RunSize r;
    const double wanted = predicted_omega > 0.0
                              ? std::ceil(sim.slow_periods * p.omega / predicted_omega)
                              : std::numeric_limits<double>::infinity();
    if (wanted > sim.max_drive_periods) {
        r.drive_periods = sim.max_drive_periods;
        r.capped = true;
    } else {
        r.drive_periods = std::max(sim.min_drive_periods, static_cast<int>(wanted));
    }
    return r;
}

struct Predictions {
    double omega_rwa = 0.0;
    std::optional<double> omega_tm;  // ωζ_FC/2π when the bias crosses zero
    std::optional<double> slow_lhs;
};

inline Predictions predict_all(const DriveParams& p) {
    Predictions pr;
    pr.omega_rwa = rwa_frequency(p, rwa_resonant_index(p));
    if (has_crossings(p)) {
        try {
            pr.omega_tm = tm_slow_frequency(p);
            pr.slow_lhs = tm_slow_resonance_lhs(p).lhs;
        } catch (const numerical_error&) {
        }
    }
    return pr;
}

/// Smallest available predicted slow frequency; used to size runs.
inline double sizing_frequency(const Predictions& pr) {
    double w = pr.omega_rwa;
    if (pr.omega_tm) w = std::min(w, *pr.omega_tm);
    return w;
}

struct Measurement {
    FrequencyEstimate estimate;
    RunSize size;
};

/// Exact run from |down> sized by predicted_omega, followed by frequency
/// extraction on the drive-period coarse-grained trace.
inline Measurement measure_point(const DriveParams& p, double predicted_omega, const SimConfig& sim) {
    Measurement m;
    m.size = size_run(p, predicted_omega, sim);
    const int spp = sim.max_step_phase > 0.0
                        ? recommended_steps_per_period(p, sim.max_step_phase, sim.steps_per_period)
                        : sim.steps_per_period;
    const TimeSeries ts =
        propagate_exact(p, QubitState::spin_down(), m.size.drive_periods * p.period(), spp);
    FrequencyOptions opt;
    opt.coarse_window = p.period();
    m.estimate = extract_frequency(ts, opt);
    return m;
}

// ---------------------------------------------------------------------------
// Scans

enum class Axis { amplitude, epsilon0, omega };

inline const char* to_string(Axis a) {
    switch (a) {
        case Axis::amplitude: return "amp";
        case Axis::epsilon0: return "eps0";
        case Axis::omega: return "omega";
    }
    return "amp";
}

inline Axis parse_axis(const std::string& s) {
    if (s == "amp") return Axis::amplitude;
    if (s == "eps0") return Axis::epsilon0;
    if (s == "omega") return Axis::omega;
    throw config_error("unknown scan axis '" + s + "' (expected amp, eps0 or omega)");
}

inline void set_axis(DriveParams& p, Axis a, double v) {
    switch (a) {
        case Axis::amplitude: p.amplitude = v; break;
        case Axis::epsilon0: p.epsilon0 = v; break;
        case Axis::omega: p.omega = v; break;
    }
}

struct ScanGrid {
    Axis axis = Axis::amplitude;
    std::vector<double> values;
};

/// count points from first to last inclusive.
inline std::vector<double> linspace(double first, double last, int count) {
    if (count < 1) throw config_error("grid needs at least one point");
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = first;
        return v;
    }
    const double step = (last - first) / (count - 1);
    for (int i = 0; i < count; ++i) v[std::size_t(i)] = first + step * i;
    v.back() = last;
    return v;
}

struct ScanConfig {
    DriveParams base;  // supplies the parameter not on either axis
    ScanGrid axis1;
    ScanGrid axis2;
    SimConfig sim;
    unsigned threads = 1;
};

struct ScanCell {
    double x1 = 0.0;
    double x2 = 0.0;
    std::optional<FrequencyEstimate> estimate;
    Predictions predictions;
    bool capped = false;
    std::string error;  // empty on success

    std::string flags() const {
        std::string f;
        auto add = [&](const char* s) {
            if (!f.empty()) f += ';';
            f += s;
        };
        if (!error.empty()) add("error");
        if (estimate && estimate->suppressed) add("suppressed");
        if (estimate && estimate->ambiguous) add("ambiguous");
        if (estimate && estimate->below_resolution) add("below_resolution");
        if (capped) add("capped");
        return f.empty() ? "ok" : f;
    }
};

struct ScanResult {
    ScanGrid axis1;
    ScanGrid axis2;
    std::vector<ScanCell> cells;  // axis1-major

    const ScanCell& at(std::size_t i1, std::size_t i2) const {
        return cells[i1 * axis2.values.size() + i2];
    }
};

inline constexpr std::size_t max_scan_cells = 1000000;

inline void validate_grid(const ScanGrid& g, const char* name) {
    if (g.values.empty()) throw config_error(std::string(name) + " grid is empty");
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (!std::isfinite(g.values[i])) throw config_error(std::string(name) + " grid has non-finite values");
        if (i > 0 && !(g.values[i] > g.values[i - 1]))
            throw config_error(std::string(name) + " grid must be strictly increasing");
    }
}

/// Simulate every grid cell and attach analytic predictions. Cells are
/// independent; failures are recorded per cell. Results are stored by cell
/// index, so the outcome does not depend on the thread count.
inline ScanResult scan_resonance_map(const ScanConfig& cfg) {
    validate_grid(cfg.axis1, "axis1");
    validate_grid(cfg.axis2, "axis2");
    if (cfg.axis1.axis == cfg.axis2.axis) throw config_error("scan axes must differ");
    const std::size_t n1 = cfg.axis1.values.size();
    const std::size_t n2 = cfg.axis2.values.size();
    if (n1 * n2 > max_scan_cells) throw config_error("scan exceeds the cell limit");

    ScanResult result;
    result.axis1 = cfg.axis1;
    result.axis2 = cfg.axis2;
    result.cells.resize(n1 * n2);

    auto run_cell = [&](std::size_t idx) {
        ScanCell& cell = result.cells[idx];
        cell.x1 = cfg.axis1.values[idx / n2];
        cell.x2 = cfg.axis2.values[idx % n2];
        DriveParams p = cfg.base;
        set_axis(p, cfg.axis1.axis, cell.x1);
        set_axis(p, cfg.axis2.axis, cell.x2);
        try {
            p.validate();
            cell.predictions = predict_all(p);
            const Measurement m = measure_point(p, sizing_frequency(cell.predictions), cfg.sim);
            cell.estimate = m.estimate;
            cell.capped = m.size.capped;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(cfg.threads, unsigned(n1 * n2)));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < result.cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < result.cells.size(); i = next++) run_cell(i);
            });
        for (auto& th : pool) th.join();
    }
    return result;
}

// ---------------------------------------------------------------------------
// Resonance width

struct WidthMeasurement {
    double hwhm = 0.0;
    double omega_peak = 0.0;
    double amplitude_peak = 0.0;
    double omega_left = 0.0;   // half-maximum crossings
    double omega_right = 0.0;
    std::vector<double> omegas;
    std::vector<double> amplitudes;
};

/// Half-width at half-maximum of the envelope amplitude versus ω around the
/// |n|-photon resonance ε₀ = nω. Each run is sized by the RWA frequency
/// Δ|J_n(A/ω)| at that ω.
inline WidthMeasurement measure_resonance_width(const DriveParams& p, int n,
                                                const std::vector<double>& omega_grid,
                                                const SimConfig& sim = {}) {
    if (n < 1) throw std::domain_error("measure_resonance_width: n must be at least 1");
    validate_grid({Axis::omega, omega_grid}, "omega");
    if (omega_grid.size() < 3) throw config_error("omega grid needs at least three points");
    if (!(omega_grid.front() > 0.0)) throw config_error("omega grid must be positive");

    WidthMeasurement w;
    w.omegas = omega_grid;
    w.amplitudes.reserve(omega_grid.size());
    for (double om : omega_grid) {
        DriveParams q = p;
        q.omega = om;
        q.validate();
        w.amplitudes.push_back(measure_point(q, rwa_frequency(q, n), sim).estimate.amplitude);
    }

    const auto peak_it = std::max_element(w.amplitudes.begin(), w.amplitudes.end());
    const std::size_t ip = static_cast<std::size_t>(peak_it - w.amplitudes.begin());
    if (ip == 0 || ip + 1 == w.amplitudes.size())
        throw bracket_error("resonance peak lies on the edge of the omega grid");
    w.omega_peak = omega_grid[ip];
    w.amplitude_peak = *peak_it;
    const double half = 0.5 * w.amplitude_peak;

    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double a0 = w.amplitudes[inside], a1 = w.amplitudes[outside];
        const double frac = (a0 - half) / (a0 - a1);
        return omega_grid[inside] + frac * (omega_grid[outside] - omega_grid[inside]);
    };

    std::optional<double> left, right;
    for (std::size_t i = ip; i > 0; --i)
        if (w.amplitudes[i - 1] < half) {
            left = crossing(i, i - 1);
            break;
        }
    for (std::size_t i = ip; i + 1 < w.amplitudes.size(); ++i)
        if (w.amplitudes[i + 1] < half) {
            right = crossing(i, i + 1);
            break;
        }
    if (!left || !right) throw bracket_error("omega grid does not reach half maximum on both sides");
    w.omega_left = *left;
    w.omega_right = *right;
    w.hwhm = 0.5 * (*right - *left);
    return w;
}

}  // namespace lzs
