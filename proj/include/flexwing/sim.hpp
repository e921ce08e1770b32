#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>

#include "flexwing/errors.hpp"
#include "flexwing/modal.hpp"
#include "flexwing/riccati.hpp"
#include "flexwing/statespace.hpp"

namespace flexwing {

enum class FeedbackMode { None, FullState, Lqg };

inline FeedbackMode feedback_from_string(const std::string& s) {
    if (s == "none") return FeedbackMode::None;
    if (s == "full-state") return FeedbackMode::FullState;
    if (s == "lqg") return FeedbackMode::Lqg;
    throw ParameterError("unknown feedback mode '" + s + "'");
}

struct SimConfig {
    double t_final = 10.0;
    double dt = 0.0;          // 0: choose 0.05 / max|eigenvalue|
    unsigned long seed = 12345;
    FeedbackMode feedback = FeedbackMode::None;
    bool noise = false;
    int y_grid = 33;
    std::string initial = "mixed";
    double amplitude = 1.0;

    void validate() const {
        if (t_final <= 0.0) throw ParameterError("sim: t_final must be positive");
        if (dt < 0.0) throw ParameterError("sim: dt must be nonnegative");
        if (y_grid < 2) throw ParameterError("sim: y_grid must be at least 2");
        if (dt > 0.0 && t_final < dt) throw ParameterError("sim: t_final must be >= dt");
    }
};

// Everything integrate() needs about the assembled linear model. For
// FeedbackMode::Lqg the simulated state is [plant; estimate] with the
// estimate initialized to zero.
struct SimModel {
    Eigen::MatrixXd A;        // plant drift
    Eigen::MatrixXd B;        // plant input
    Eigen::MatrixXd C;        // 2 x n measurement
    Eigen::MatrixXd K;        // regulator gain (FullState / Lqg)
    Eigen::MatrixXd K_filt;   // filter gain (Lqg)
    Eigen::MatrixXd B_noise;  // n x 2 process-noise input
    Eigen::Matrix2d D_meas = Eigen::Matrix2d::Identity();
    Eigen::VectorXd x0_estimate;  // LQG initial estimate; empty means zero
    int beam_N = 0;           // leading 4*beam_N plant states are beam modes
};

struct SimulationTrace {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;        // rows: time, cols: plant state
    Eigen::MatrixXd estimates;     // empty unless LQG
    Eigen::MatrixXd controls;      // u(t), 2 columns
    Eigen::MatrixXd measurements;  // psi(t), 2 columns
    Eigen::MatrixXd innovations;   // empty unless LQG
    Eigen::VectorXd y_grid;
    Eigen::MatrixXd w, w_t, theta, theta_t;  // fields on y_grid (beam runs)
    double dt_used = 0.0;

    bool finite() const {
        return states.allFinite() && controls.allFinite() && measurements.allFinite();
    }
};

// Named initial conditions. mode1-bend / mode1-twist put `amplitude` on the
// first bending / torsion position coefficient; mixed puts amplitude/2 on each.
inline Eigen::VectorXd initial_state(const std::string& name, double amplitude, int n_states,
                                     int beam_N) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_states);
    if (beam_N <= 0) throw ParameterError("initial_state: model has no beam modes");
    if (name == "mode1-bend") {
        x[0] = amplitude;
    } else if (name == "mode1-twist") {
        x[2 * beam_N] = amplitude;
    } else if (name == "mixed") {
        x[0] = 0.5 * amplitude;
        x[2 * beam_N] = 0.5 * amplitude;
    } else {
        throw ParameterError("initial_state: unknown initial condition '" + name + "'");
    }
    return x;
}

// Classical fixed-step RK4 on the assembled linear drift; noise (if enabled)
// is added after each step as an Euler-Maruyama increment. Deterministic for
// a fixed (model, config) pair.
inline SimulationTrace integrate(const SimModel& model, const SimConfig& config,
                                 const ModalBasis* basis = nullptr) {
    config.validate();
    const int n = static_cast<int>(model.A.rows());
    const bool lqg = model.K_filt.size() > 0;
    if (lqg && model.K.size() == 0)
        throw ParameterError("integrate: LQG model needs a regulator gain");

    // Full simulated drift.
    Eigen::MatrixXd F;
    if (lqg) {
        F = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        F.topLeftCorner(n, n) = model.A;
        F.topRightCorner(n, n) = -model.B * model.K;
        F.bottomLeftCorner(n, n) = model.K_filt * model.C;
        F.bottomRightCorner(n, n) =
            model.A - model.B * model.K - model.K_filt * model.C;
    } else if (model.K.size() > 0) {
        F = model.A - model.B * model.K;
    } else {
        F = model.A;
    }

    const double rho = spectral_radius(F);
    double dt = config.dt;
    if (dt == 0.0) dt = (rho > 1e-12) ? 0.05 / rho : config.t_final / 1000.0;
    if (rho > 1e-12 && dt > 0.1 / rho)
        throw ParameterError("integrate: dt exceeds the 0.1/max|eigenvalue| stability bound");

    const long steps = std::lround(std::ceil(config.t_final / dt - 1e-12));
    const int dim = static_cast<int>(F.rows());

    Eigen::VectorXd X = Eigen::VectorXd::Zero(dim);
    X.head(n) = initial_state(config.initial, config.amplitude, n, model.beam_N);
    if (lqg && model.x0_estimate.size() == n) X.tail(n) = model.x0_estimate;
    const double x0_norm = X.norm();

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const bool noise = config.noise && model.B_noise.size() > 0;
    const double sqdt = std::sqrt(dt);

    SimulationTrace trace;
    trace.dt_used = dt;
    trace.times.resize(steps + 1);
    trace.states.resize(steps + 1, n);
    trace.controls.resize(steps + 1, 2);
    trace.measurements.resize(steps + 1, 2);
    if (lqg) {
        trace.estimates.resize(steps + 1, n);
        trace.innovations.resize(steps + 1, 2);
    }
    const bool fields = basis != nullptr && model.beam_N > 0;
    if (fields) {
        trace.y_grid = Eigen::VectorXd::LinSpaced(config.y_grid, 0.0, basis->span());
        trace.w.resize(steps + 1, config.y_grid);
        trace.w_t.resize(steps + 1, config.y_grid);
        trace.theta.resize(steps + 1, config.y_grid);
        trace.theta_t.resize(steps + 1, config.y_grid);
    }

    for (long k = 0; k <= steps; ++k) {
        const auto x = X.head(n);
        trace.times[k] = k * dt;
        trace.states.row(k) = x.transpose();

        Eigen::Vector2d u = Eigen::Vector2d::Zero();
        if (model.K.size() > 0)
            u = lqg ? Eigen::Vector2d(-model.K * X.tail(n)) : Eigen::Vector2d(-model.K * x);
        trace.controls.row(k) = u.transpose();

        Eigen::Vector2d meas_draw = Eigen::Vector2d::Zero();
        Eigen::Vector2d proc_draw_a = Eigen::Vector2d::Zero();
        if (noise) {
            proc_draw_a = Eigen::Vector2d(gauss(rng), gauss(rng));
            meas_draw = Eigen::Vector2d(gauss(rng), gauss(rng));
        }
        Eigen::Vector2d psi = model.C * x;
        if (noise) psi += model.D_meas * meas_draw / sqdt;
        trace.measurements.row(k) = psi.transpose();
        if (lqg) {
            trace.estimates.row(k) = X.tail(n).transpose();
            trace.innovations.row(k) = (psi - (model.C * X.tail(n)).eval()).transpose();
        }
        if (fields) {
            for (int g = 0; g < config.y_grid; ++g) {
                const double y = trace.y_grid[g];
                double w = 0, wt = 0, th = 0, tht = 0;
                for (int i = 0; i < model.beam_N; ++i) {
                    const double phi = eval_phi(basis->bending[static_cast<std::size_t>(i)], y, 0);
                    w += phi * x[i];
                    wt += phi * x[model.beam_N + i];
                    const double the = eval_theta(i, basis->span(), y, 0);
                    th += the * x[2 * model.beam_N + i];
                    tht += the * x[3 * model.beam_N + i];
                }
                trace.w(k, g) = w;
                trace.w_t(k, g) = wt;
                trace.theta(k, g) = th;
                trace.theta_t(k, g) = tht;
            }
        }

        if (k == steps) break;

        // RK4 on the deterministic drift.
        const Eigen::VectorXd k1 = F * X;
        const Eigen::VectorXd k2 = F * (X + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = F * (X + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = F * (X + dt * k3);
        X += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (noise) {
            X.head(n) += sqdt * (model.B_noise * proc_draw_a);
            if (lqg) X.tail(n) += sqdt * (model.K_filt * (model.D_meas * meas_draw));
        }

        if (X.norm() > 1e6 * std::max(x0_norm, 1.0))
            throw DivergenceError(k + 1, "integrate: state norm exceeded 1e6 x initial at step " +
                                             std::to_string(k + 1));
    }
    return trace;
}

// Least-squares slope of log ||state(t)|| over the trailing window; used to
// compare observed decay with the closed-loop spectral abscissa.
inline double envelope_slope(const SimulationTrace& trace, double window_fraction = 0.4,
                             const Eigen::MatrixXd* block = nullptr) {
    const Eigen::MatrixXd& S = block ? *block : trace.states;
    const long T = S.rows();
    const long start = static_cast<long>((1.0 - window_fraction) * (T - 1));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long count = 0;
    for (long k = start; k < T; ++k) {
        const double norm = S.row(k).norm();
        if (norm <= 0.0) continue;
        const double x = trace.times[k];
        const double y = std::log(norm);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++count;
    }
    if (count < 2) throw SolverError("envelope_slope: not enough samples");
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace flexwing
