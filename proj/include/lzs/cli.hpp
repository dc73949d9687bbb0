#pragma once

// Command-line front end: simulate, predict, scan, classify, cdt, width.
// Inputs are in units of Δ (Δ = 1 internally); --delta rescales outputs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lzs/analysis.hpp"
#include "lzs/dynamics.hpp"
#include "lzs/rwa.hpp"
#include "lzs/transfer_matrix.hpp"
#include "lzs/types.hpp"

namespace lzs::cli {

inline constexpr const char* generated_by = "lzs 0.1.0";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_regime = 3, exit_numerical = 4 };

using json = nlohmann::json;

/// %.17g; round-trips every finite double.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string{};
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Options {
    double eps0 = 0.0;
    double amp = 0.0;
    double omega = 1.0;
    double phi = 0.0;
    double delta = 1.0;  // output scale only
    std::string out;
    std::string format;
    std::string config;

    // simulate
    int cycles = 20;
    int steps_per_period = default_steps_per_period;
    bool tm = false;

    // scan
    std::string axis1 = "amp";
    double axis1_min = 0.0, axis1_max = 0.0;
    int axis1_count = 1;
    std::string axis2 = "eps0";
    double axis2_min = 0.0, axis2_max = 0.0;
    int axis2_count = 1;
    unsigned threads = 1;
    double max_step_phase = 0.0;

    // cdt
    int kmax = 5;

    // width
    int n = 1;
    double omega_min = 0.0, omega_max = 0.0;
    int omega_count = 41;

    DriveParams drive() const {
        DriveParams p;
        p.delta = 1.0;
        p.epsilon0 = eps0;
        p.amplitude = amp;
        p.omega = omega;
        p.phi = phi;
        return p;
    }

    SimConfig sim() const {
        SimConfig s;
        s.steps_per_period = steps_per_period;
        s.max_step_phase = max_step_phase;
        return s;
    }
};

namespace detail {

inline void check_output_scale(const Options& o) {
    if (!(o.delta > 0.0) || !std::isfinite(o.delta)) throw config_error("--delta must be positive");
}

inline std::string resolved_format(const Options& o, const char* fallback) {
    return o.format.empty() ? fallback : o.format;
}

inline json meta_block(const Options& o, const char* command) {
    json m;
    m["generated_by"] = generated_by;
    m["command"] = command;
    m["units"] = {{"delta", o.delta}};
    m["params"] = {{"eps0", o.eps0}, {"amp", o.amp}, {"omega", o.omega}, {"phi", o.phi}};
    return m;
}

// Flat JSON object whose keys are flag names of the active subcommand.
// Values fill options not given on the command line.
inline void apply_config_file(CLI::App& sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw config_error("config file must hold a JSON object");

    for (const auto& [key, value] : j.items()) {
        CLI::Option* opt = key == "config" || key == "help" ? nullptr : sub.get_option_no_throw("--" + key);
        if (!opt) throw config_error("unknown config key '" + key + "' for " + sub.get_name());
        if (opt->count() > 0) continue;
        std::string text;
        if (value.is_string())
            text = value.get<std::string>();
        else if (value.is_boolean())
            text = value.get<bool>() ? "true" : "false";
        else if (value.is_number())
            text = value.dump();
        else
            throw config_error("config key '" + key + "' must be a string, number or boolean");
        opt->add_result(text);
        opt->run_callback();
    }
}

inline void emit(const Options& o, const std::string& text, std::ostream& out) {
    if (o.out.empty() || o.out == "-") {
        out << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw config_error("cannot open output file '" + o.out + "'");
    f << text;
    if (!f) throw config_error("failed writing output file '" + o.out + "'");
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each returns the text to emit.

inline std::string cmd_simulate(const Options& o) {
    detail::check_output_scale(o);
    const DriveParams p = o.drive();
    p.validate();
    if (o.cycles < 1) throw config_error("--cycles must be at least 1");
    const std::string format = detail::resolved_format(o, "csv");

    std::optional<TimeSeries> tm;
    if (o.tm) tm = propagate_tm(p, QubitState::spin_down(), o.cycles);
    const TimeSeries ts =
        propagate_exact(p, QubitState::spin_down(), o.cycles * p.period(), o.steps_per_period);
    const auto spp = static_cast<std::size_t>(o.steps_per_period);

    if (format == "json") {
        json j;
        j["meta"] = detail::meta_block(o, "simulate");
        j["meta"]["integrator"] = {{"scheme", "exponential-midpoint"},
                                   {"steps_per_period", o.steps_per_period},
                                   {"cycles", o.cycles},
                                   {"initial_state", "down"}};
        std::vector<double> t(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) t[i] = ts.time(i) / o.delta;
        j["t"] = t;
        j["P_up"] = ts.values;
        if (tm) {
            std::vector<double> t_tm(tm->size());
            for (std::size_t k = 0; k < tm->size(); ++k) t_tm[k] = ts.time(k * spp) / o.delta;
            j["t_tm"] = t_tm;
            j["P_up_tm"] = tm->values;
        }
        return detail::dump_json(j);
    }

    std::string s = tm ? "t,P_up,P_up_tm\n" : "t,P_up\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        s += format_number(ts.time(i) / o.delta);
        s += ',';
        s += format_number(ts.values[i]);
        if (tm) {
            s += ',';
            if (i % spp == 0 && i / spp < tm->size()) s += format_number(tm->values[i / spp]);
        }
        s += '\n';
    }
    return s;
}

inline json predict_json(const Options& o) {
    const DriveParams p = o.drive();
    p.validate();
    const double scale = o.delta;

    json j;
    j["meta"] = detail::meta_block(o, "predict");
    const RegimeLabel label = classify_regime(p);
    j["regime"] = to_string(label.label);

    const RwaPrediction rwa = rwa_predict(p);
    j["rwa"] = {{"n", rwa.n},
                {"omega_osc", rwa.omega_osc * scale},
                {"width", rwa.width ? json(*rwa.width * scale) : json(nullptr)},
                {"valid", rwa.validity == Validity::valid},
                {"validity", to_string(rwa.validity)},
                {"reason", rwa.reason}};

    if (has_crossings(p)) {
        const FullCycleDecomposition d = decompose_full_cycle(full_cycle_matrix(p));
        const ResonanceCheck rc = tm_fast_resonance_check(p);
        std::optional<double> fast;
        if (crossing_speed(p) >= 1.0) fast = tm_fast_frequency(p) * scale;
        j["tm"] = {{"zeta_fc", d.zeta_fc},
                   {"theta_fc", d.theta_fc},
                   {"phi_fc", d.phi_fc},
                   {"omega_osc", p.omega * d.zeta_fc / (2.0 * pi) * scale},
                   {"omega_fast", optional_json(fast)},
                   {"resonance_n", rc.n},
                   {"resonance_residual", rc.deviation}};
        const SlowResonance slow = tm_slow_resonance_lhs(p);
        j["slow"] = {{"lhs", slow.lhs},
                     {"nearest_integer", slow.nearest_integer},
                     {"residual", slow.residual},
                     {"theta_fc_refined", slow.theta_fc_refined}};
    } else {
        j["tm"] = nullptr;
        j["slow"] = nullptr;
    }
    return j;
}

inline std::string cmd_predict(const Options& o) {
    detail::check_output_scale(o);
    if (detail::resolved_format(o, "json") != "json") throw config_error("predict writes JSON only");
    return detail::dump_json(predict_json(o));
}

inline std::string cmd_classify(const Options& o) {
    detail::check_output_scale(o);
    const DriveParams p = o.drive();
    p.validate();
    const RegimeLabel r = classify_regime(p);
    if (detail::resolved_format(o, "json") == "csv") {
        auto b = [](bool v) { return v ? "true" : "false"; };
        return std::string("label,rabi,rwa,tm,a_over_delta,omega_over_delta,crossing_speed\n") +
               to_string(r.label) + ',' + b(r.rabi) + ',' + b(r.rwa) + ',' + b(r.tm) + ',' +
               format_number(r.a_over_delta) + ',' + format_number(r.omega_over_delta) + ',' +
               format_number(r.crossing_speed) + '\n';
    }
    json j;
    j["meta"] = detail::meta_block(o, "classify");
    j["label"] = to_string(r.label);
    j["rabi"] = r.rabi;
    j["rwa"] = r.rwa;
    j["tm"] = r.tm;
    j["a_over_delta"] = r.a_over_delta;
    j["omega_over_delta"] = r.omega_over_delta;
    j["crossing_speed"] = r.crossing_speed;
    return detail::dump_json(j);
}

inline std::string cmd_cdt(const Options& o) {
    detail::check_output_scale(o);
    const std::vector<double> amps = cdt_amplitudes(o.omega, o.kmax);
    if (detail::resolved_format(o, "csv") == "json") {
        json j;
        j["meta"] = detail::meta_block(o, "cdt");
        std::vector<double> scaled;
        for (double a : amps) scaled.push_back(a * o.delta);
        j["amp"] = scaled;
        return detail::dump_json(j);
    }
    std::string s = "k,amp\n";
    for (std::size_t k = 0; k < amps.size(); ++k)
        s += std::to_string(k + 1) + ',' + format_number(amps[k] * o.delta) + '\n';
    return s;
}

inline ScanGrid grid_from(const std::string& axis, double lo, double hi, int count, const char* name) {
    if (count < 1) throw config_error(std::string("--") + name + "-count must be at least 1");
    if (count > 1 && !(hi > lo))
        throw config_error(std::string("--") + name + "-max must exceed --" + name + "-min");
    return {parse_axis(axis), linspace(lo, hi, count)};
}

inline ScanResult run_scan(const Options& o) {
    ScanConfig cfg;
    cfg.base = o.drive();
    cfg.axis1 = grid_from(o.axis1, o.axis1_min, o.axis1_max, o.axis1_count, "axis1");
    cfg.axis2 = grid_from(o.axis2, o.axis2_min, o.axis2_max, o.axis2_count, "axis2");
    cfg.sim = o.sim();
    if (o.threads < 1) throw config_error("--threads must be at least 1");
    cfg.threads = o.threads;
    return scan_resonance_map(cfg);
}

inline const char* scan_csv_header = "axis1,axis2,omega_est,amplitude,omega_rwa,omega_tm,slow_lhs,flags";

inline std::string cmd_scan(const Options& o) {
    detail::check_output_scale(o);
    const std::string format = detail::resolved_format(o, "csv");
    const ScanResult r = run_scan(o);
    const double s = o.delta;
    auto scaled = [s](const std::optional<double>& v) { return v ? std::optional<double>(*v * s) : v; };

    if (format == "json") {
        json j;
        j["meta"] = detail::meta_block(o, "scan");
        j["meta"]["integrator"] = {{"steps_per_period", o.steps_per_period},
                                   {"max_step_phase", o.max_step_phase}};
        j["axis1"] = {{"name", to_string(r.axis1.axis)}, {"values", r.axis1.values}};
        j["axis2"] = {{"name", to_string(r.axis2.axis)}, {"values", r.axis2.values}};
        json cells = json::array();
        for (const ScanCell& c : r.cells) {
            json cj;
            cj["axis1"] = c.x1 * s;
            cj["axis2"] = c.x2 * s;
            cj["omega_est"] = c.estimate ? json(c.estimate->omega_est * s) : json(nullptr);
            cj["amplitude"] = c.estimate ? json(c.estimate->amplitude) : json(nullptr);
            cj["omega_rwa"] = c.error.empty() ? json(c.predictions.omega_rwa * s) : json(nullptr);
            cj["omega_tm"] = optional_json(scaled(c.predictions.omega_tm));
            cj["slow_lhs"] = optional_json(c.predictions.slow_lhs);
            cj["flags"] = c.flags();
            if (!c.error.empty()) cj["error"] = c.error;
            cells.push_back(std::move(cj));
        }
        j["cells"] = std::move(cells);
        return detail::dump_json(j);
    }

    std::string out = std::string(scan_csv_header) + '\n';
    for (const ScanCell& c : r.cells) {
        out += format_number(c.x1 * s) + ',' + format_number(c.x2 * s) + ',';
        out += (c.estimate ? format_number(c.estimate->omega_est * s) : "") + ',';
        out += (c.estimate ? format_number(c.estimate->amplitude) : "") + ',';
        out += (c.error.empty() ? format_number(c.predictions.omega_rwa * s) : "") + ',';
        out += format_optional(scaled(c.predictions.omega_tm)) + ',';
        out += format_optional(c.predictions.slow_lhs) + ',';
        out += c.flags() + '\n';
    }
    return out;
}

inline std::string cmd_width(const Options& o) {
    detail::check_output_scale(o);
    const DriveParams p = o.drive();
    if (o.omega_count < 3) throw config_error("--omega-count must be at least 3");
    if (!(o.omega_max > o.omega_min)) throw config_error("--omega-max must exceed --omega-min");
    const WidthMeasurement w =
        measure_resonance_width(p, o.n, linspace(o.omega_min, o.omega_max, o.omega_count), o.sim());
    const double s = o.delta;

    if (detail::resolved_format(o, "json") == "csv") {
        std::string out = "omega,amplitude\n";
        for (std::size_t i = 0; i < w.omegas.size(); ++i)
            out += format_number(w.omegas[i] * s) + ',' + format_number(w.amplitudes[i]) + '\n';
        return out;
    }
    json j;
    j["meta"] = detail::meta_block(o, "width");
    j["n"] = o.n;
    j["hwhm"] = w.hwhm * s;
    j["omega_peak"] = w.omega_peak * s;
    j["amplitude_peak"] = w.amplitude_peak;
    j["omega_left"] = w.omega_left * s;
    j["omega_right"] = w.omega_right * s;
    std::vector<double> om;
    for (double v : w.omegas) om.push_back(v * s);
    j["omega"] = om;
    j["amplitude"] = w.amplitudes;
    return detail::dump_json(j);
}

// ---------------------------------------------------------------------------

/// Parse arguments, run one subcommand and return the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    Options o;
    CLI::App app{"Landau-Zener-Stückelberg interferometry: simulation and predictors", "lzs"};
    app.set_version_flag("--version", generated_by);
    app.require_subcommand(1);

    auto drive_flags = [&](CLI::App* s, bool with_phi) {
        s->add_option("--eps0", o.eps0, "static bias ε₀ / Δ")->capture_default_str();
        s->add_option("--amp", o.amp, "drive amplitude A / Δ")->capture_default_str();
        s->add_option("--omega", o.omega, "drive frequency ω / Δ")->capture_default_str();
        if (with_phi) s->add_option("--phi", o.phi, "drive phase φ")->capture_default_str();
    };
    auto io_flags = [&](CLI::App* s) {
        s->add_option("--delta", o.delta, "Δ in output units; rescales reported times and frequencies")
            ->capture_default_str();
        s->add_option("--out", o.out, "output file (default stdout)");
        s->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--config", o.config, "JSON object of flag values; flags override it");
    };
    auto sim_flags = [&](CLI::App* s) {
        s->add_option("--steps-per-period", o.steps_per_period, "integrator substeps per drive period")
            ->capture_default_str();
        s->add_option("--max-step-phase", o.max_step_phase,
                      "raise steps per period so each substep accrues at most this phase (0 = off)")
            ->capture_default_str();
    };

    CLI::App* simulate = app.add_subcommand("simulate", "exact propagation of P_up(t) from |down>");
    drive_flags(simulate, true);
    io_flags(simulate);
    simulate->add_option("--cycles", o.cycles, "drive periods to simulate")->capture_default_str();
    simulate->add_option("--steps-per-period", o.steps_per_period, "integrator substeps per drive period")
        ->capture_default_str();
    simulate->add_flag("--tm", o.tm, "add the stroboscopic transfer-matrix column P_up_tm");

    CLI::App* predict = app.add_subcommand("predict", "analytic predictions (JSON)");
    drive_flags(predict, false);
    io_flags(predict);

    CLI::App* classify = app.add_subcommand("classify", "regime of validity of each approximation");
    drive_flags(classify, false);
    io_flags(classify);

    CLI::App* cdt = app.add_subcommand("cdt", "drive amplitudes of coherent destruction of tunnelling");
    cdt->add_option("--omega", o.omega, "drive frequency ω / Δ")->capture_default_str();
    cdt->add_option("--kmax", o.kmax, "number of J0 zeros (1..20)")->capture_default_str();
    io_flags(cdt);

    CLI::App* scan = app.add_subcommand("scan", "resonance map over two of amp, eps0, omega");
    drive_flags(scan, true);
    io_flags(scan);
    sim_flags(scan);
    scan->add_option("--axis1", o.axis1, "first axis: amp, eps0 or omega")->capture_default_str();
    scan->add_option("--axis1-min", o.axis1_min)->capture_default_str();
    scan->add_option("--axis1-max", o.axis1_max)->capture_default_str();
    scan->add_option("--axis1-count", o.axis1_count)->capture_default_str();
    scan->add_option("--axis2", o.axis2, "second axis: amp, eps0 or omega")->capture_default_str();
    scan->add_option("--axis2-min", o.axis2_min)->capture_default_str();
    scan->add_option("--axis2-max", o.axis2_max)->capture_default_str();
    scan->add_option("--axis2-count", o.axis2_count)->capture_default_str();
    scan->add_option("--threads", o.threads, "worker threads")->capture_default_str();

    CLI::App* width = app.add_subcommand("width", "half-width of the n-photon resonance versus omega");
    width->add_option("--eps0", o.eps0, "static bias ε₀ / Δ")->capture_default_str();
    width->add_option("--amp", o.amp, "drive amplitude A / Δ")->capture_default_str();
    width->add_option("--phi", o.phi, "drive phase φ")->capture_default_str();
    width->add_option("--n", o.n, "photon number of the resonance")->capture_default_str();
    width->add_option("--omega-min", o.omega_min, "lower end of the omega grid");
    width->add_option("--omega-max", o.omega_max, "upper end of the omega grid");
    width->add_option("--omega-count", o.omega_count)->capture_default_str();
    io_flags(width);
    sim_flags(width);

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? exit_ok : exit_config;
        }
        CLI::App* active = app.get_subcommands().front();
        if (!o.config.empty()) detail::apply_config_file(*active, o.config);

        std::string text;
        const std::string name = active->get_name();
        if (name == "simulate")
            text = cmd_simulate(o);
        else if (name == "predict")
            text = cmd_predict(o);
        else if (name == "classify")
            text = cmd_classify(o);
        else if (name == "cdt")
            text = cmd_cdt(o);
        else if (name == "scan")
            text = cmd_scan(o);
        else
            text = cmd_width(o);
        detail::emit(o, text, out);
        return exit_ok;
    } catch (const CLI::Error& e) {
        err << "lzs: error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::invalid_argument& e) {
        err << "lzs: error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::out_of_range& e) {
        err << "lzs: error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::domain_error& e) {
        err << "lzs: regime error: " << e.what() << '\n';
        return exit_regime;
    } catch (const std::exception& e) {
        err << "lzs: numerical error: " << e.what() << '\n';
        return exit_numerical;
    }
}

}  // namespace lzs::cli
