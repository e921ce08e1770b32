#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <string>

#include "flexwing/aero.hpp"
#include "flexwing/beam.hpp"
#include "flexwing/csv.hpp"
#include "flexwing/errors.hpp"
#include "flexwing/modal_riccati.hpp"
#include "flexwing/sim.hpp"

namespace flexwing {

// Flat key=value run configuration. Presets expand first, then file values,
// then explicit overrides; unknown keys are rejected with their line number.
struct RunConfig {
    std::string preset = "example16";

    // beam.*
    BeamParameters beam;
    // modal.n
    int modal_n = 4;
    // weights.*
    double weights_q = 1.0;
    double weights_r_exp_bend = 0.0;
    double weights_r_exp_twist = 0.0;
    double weights_r11 = 1.0;
    double weights_r22 = 1.0;
    // noise.*
    double noise_d11 = 1.0;
    double noise_d22 = 1.0;
    double noise_intensity = 1.0;
    // aero.*
    AeroParameters aero;
    AeroCoupling aero_coupling = AeroCoupling::OneWay;
    // sim.*
    double sim_t_final = 20.0;
    double sim_dt = 0.0;
    unsigned long sim_seed = 12345;
    int sim_grid = 33;
    std::string sim_initial = "mixed";
    std::string sim_feedback = "full-state";

    WeightSpec weights() const {
        Eigen::Matrix2d R = Eigen::Vector2d(weights_r11, weights_r22).asDiagonal();
        return power_law_weights(weights_q, weights_r_exp_bend, weights_r_exp_twist, modal_n, R);
    }

    NoiseSpec noise() const {
        return default_noise(modal_n, noise_d11, noise_d22, noise_intensity);
    }

    SimConfig sim() const {
        SimConfig s;
        s.t_final = sim_t_final;
        s.dt = sim_dt;
        s.seed = sim_seed;
        s.y_grid = sim_grid;
        s.initial = sim_initial;
        s.feedback = feedback_from_string(sim_feedback);
        return s;
    }

    void set(const std::string& key, const std::string& value, int line = -1);
    std::string serialize() const;
    static RunConfig from_preset(const std::string& name);
    void parse_text(const std::string& text);
};

inline RunConfig RunConfig::from_preset(const std::string& name) {
    RunConfig cfg;
    cfg.preset = name;
    if (name == "example16") {
        cfg.beam = BeamParameters{1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0};
        cfg.modal_n = 4;
        cfg.sim_t_final = 20.0;
    } else if (name == "wing32") {
        cfg.beam = BeamParameters{1.0, 1.0, 1.0, 0.5, 1.0, 15.0, 1.0, 1.0};
        cfg.modal_n = 4;
        cfg.aero = AeroParameters{0.5, 0.0, 0.0889, 45.0};
        cfg.sim_t_final = 120.0;
    } else {
        throw ConfigError(-1, "unknown preset '" + name + "'");
    }
    return cfg;
}

namespace detail {
inline double to_double(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(line, "invalid numeric value '" + v + "' for key " + key);
    }
}
inline long to_long(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(line, "invalid integer value '" + v + "' for key " + key);
    }
}
inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}
}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value, int line) {
    using detail::to_double;
    using detail::to_long;
    if (key == "preset") {
        *this = from_preset(value);
    } else if (key == "beam.mu") beam.mu = to_double(value, key, line);
    else if (key == "beam.ei") beam.EI = to_double(value, key, line);
    else if (key == "beam.gj") beam.GJ = to_double(value, key, line);
    else if (key == "beam.sy") beam.S_y = to_double(value, key, line);
    else if (key == "beam.iy") beam.I_y = to_double(value, key, line);
    else if (key == "beam.span") beam.L = to_double(value, key, line);
    else if (key == "beam.b1") beam.B1 = to_double(value, key, line);
    else if (key == "beam.b2") beam.B2 = to_double(value, key, line);
    else if (key == "modal.n") modal_n = static_cast<int>(to_long(value, key, line));
    else if (key == "weights.q") weights_q = to_double(value, key, line);
    else if (key == "weights.r_exp_bend") weights_r_exp_bend = to_double(value, key, line);
    else if (key == "weights.r_exp_twist") weights_r_exp_twist = to_double(value, key, line);
    else if (key == "weights.r11") weights_r11 = to_double(value, key, line);
    else if (key == "weights.r22") weights_r22 = to_double(value, key, line);
    else if (key == "noise.d11") noise_d11 = to_double(value, key, line);
    else if (key == "noise.d22") noise_d22 = to_double(value, key, line);
    else if (key == "noise.intensity") noise_intensity = to_double(value, key, line);
    else if (key == "aero.b") aero.b = to_double(value, key, line);
    else if (key == "aero.a") aero.a = to_double(value, key, line);
    else if (key == "aero.rho") aero.rho_inf = to_double(value, key, line);
    else if (key == "aero.u_inf") aero.U_inf = to_double(value, key, line);
    else if (key == "aero.coupling") {
        if (value == "one-way") aero_coupling = AeroCoupling::OneWay;
        else if (value == "two-way") aero_coupling = AeroCoupling::TwoWay;
        else throw ConfigError(line, "aero.coupling must be one-way or two-way");
    }
    else if (key == "sim.t_final") sim_t_final = to_double(value, key, line);
    else if (key == "sim.dt") sim_dt = to_double(value, key, line);
    else if (key == "sim.seed") sim_seed = static_cast<unsigned long>(to_long(value, key, line));
    else if (key == "sim.grid") sim_grid = static_cast<int>(to_long(value, key, line));
    else if (key == "sim.initial") sim_initial = value;
    else if (key == "sim.feedback") sim_feedback = value;
    else throw ConfigError(line, "unknown configuration key '" + key + "'");
}

inline void RunConfig::parse_text(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    // presets expand before overrides apply: scan for a preset key first
    {
        std::istringstream scan(text);
        std::string l;
        int ln = 0;
        while (std::getline(scan, l)) {
            ++ln;
            const auto hash = l.find('#');
            if (hash != std::string::npos) l = l.substr(0, hash);
            l = detail::trim(l);
            if (l.empty()) continue;
            const auto eq = l.find('=');
            if (eq == std::string::npos) throw ConfigError(ln, "expected key=value: '" + l + "'");
            if (detail::trim(l.substr(0, eq)) == "preset")
                *this = from_preset(detail::trim(l.substr(eq + 1)));
        }
    }
    while (std::getline(in, raw)) {
        ++line_no;
        std::string l = raw;
        const auto hash = l.find('#');
        if (hash != std::string::npos) l = l.substr(0, hash);
        l = detail::trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line_no, "expected key=value: '" + l + "'");
        const std::string key = detail::trim(l.substr(0, eq));
        const std::string value = detail::trim(l.substr(eq + 1));
        if (key == "preset") continue;  // already expanded
        set(key, value, line_no);
    }
}

inline std::string RunConfig::serialize() const {
    std::ostringstream out;
    out << "preset=" << preset << "\n";
    out << "beam.mu=" << csv_num(beam.mu) << "\n";
    out << "beam.ei=" << csv_num(beam.EI) << "\n";
    out << "beam.gj=" << csv_num(beam.GJ) << "\n";
    out << "beam.sy=" << csv_num(beam.S_y) << "\n";
    out << "beam.iy=" << csv_num(beam.I_y) << "\n";
    out << "beam.span=" << csv_num(beam.L) << "\n";
    out << "beam.b1=" << csv_num(beam.B1) << "\n";
    out << "beam.b2=" << csv_num(beam.B2) << "\n";
    out << "modal.n=" << modal_n << "\n";
    out << "weights.q=" << csv_num(weights_q) << "\n";
    out << "weights.r_exp_bend=" << csv_num(weights_r_exp_bend) << "\n";
    out << "weights.r_exp_twist=" << csv_num(weights_r_exp_twist) << "\n";
    out << "weights.r11=" << csv_num(weights_r11) << "\n";
    out << "weights.r22=" << csv_num(weights_r22) << "\n";
    out << "noise.d11=" << csv_num(noise_d11) << "\n";
    out << "noise.d22=" << csv_num(noise_d22) << "\n";
    out << "noise.intensity=" << csv_num(noise_intensity) << "\n";
    out << "aero.b=" << csv_num(aero.b) << "\n";
    out << "aero.a=" << csv_num(aero.a) << "\n";
    out << "aero.rho=" << csv_num(aero.rho_inf) << "\n";
    out << "aero.u_inf=" << csv_num(aero.U_inf) << "\n";
    out << "aero.coupling=" << (aero_coupling == AeroCoupling::OneWay ? "one-way" : "two-way")
        << "\n";
    out << "sim.t_final=" << csv_num(sim_t_final) << "\n";
    out << "sim.dt=" << csv_num(sim_dt) << "\n";
    out << "sim.seed=" << sim_seed << "\n";
    out << "sim.grid=" << sim_grid << "\n";
    out << "sim.initial=" << sim_initial << "\n";
    out << "sim.feedback=" << sim_feedback << "\n";
    return out.str();
}

}  // namespace flexwing
