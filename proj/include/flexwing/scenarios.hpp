#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flexwing/aero.hpp"
#include "flexwing/config.hpp"
#include "flexwing/csv.hpp"
#include "flexwing/kalman.hpp"
#include "flexwing/modal_riccati.hpp"
#include "flexwing/sim.hpp"

namespace flexwing {

// A fully assembled run: model, designs, and the resulting trace.
struct ScenarioResult {
    std::string name;
    RunConfig cfg;
    ModalBasis basis;
    ModalSystem sys;
    SimulationTrace trace;
    std::vector<std::string> state_labels;
    double closed_loop_abscissa = 0.0;   // of the simulated drift
    Eigen::MatrixXd w_err, theta_err;    // estimation-error fields (LQG runs)
};

namespace detail {

inline void reconstruct_error_fields(ScenarioResult& r) {
    const int N = r.sys.N;
    const long T = r.trace.states.rows();
    const int G = static_cast<int>(r.trace.y_grid.size());
    r.w_err.resize(T, G);
    r.theta_err.resize(T, G);
    for (long k = 0; k < T; ++k) {
        const Eigen::VectorXd err =
            r.trace.states.row(k).head(4 * N) - r.trace.estimates.row(k).head(4 * N);
        for (int g = 0; g < G; ++g) {
            const double y = r.trace.y_grid[g];
            double w = 0, th = 0;
            for (int i = 0; i < N; ++i) {
                w += eval_phi(r.basis.bending[static_cast<std::size_t>(i)], y, 0) * err[i];
                th += eval_theta(i, r.basis.span(), y, 0) * err[2 * N + i];
            }
            r.w_err(k, g) = w;
            r.theta_err(k, g) = th;
        }
    }
}

}  // namespace detail

inline bool scenario_known(const std::string& name) {
    return name == "example16-fullstate" || name == "example16-lqg" ||
           name == "example16-filter-error" || name == "wing32-fullstate";
}

// Runs one of the named scenarios. Unless the caller already overrode them,
// the preset, feedback mode and noise flag implied by the scenario name win.
inline ScenarioResult run_scenario(const std::string& name, RunConfig cfg) {
    if (!scenario_known(name)) throw ParameterError("run_scenario: unknown scenario '" + name + "'");
    ScenarioResult result;
    result.name = name;

    const bool wing = name.rfind("wing32", 0) == 0;
    const bool lqg = name == "example16-lqg" || name == "example16-filter-error";
    cfg.sim_feedback = lqg ? "lqg" : "full-state";

    result.cfg = cfg;
    cfg.beam.validate();
    result.basis = build_basis(cfg.beam, cfg.modal_n);
    result.sys = build_modal_system(cfg.beam, result.basis);
    const WeightSpec weights = cfg.weights();

    SimConfig sim_cfg = cfg.sim();
    sim_cfg.noise = lqg;  // estimation scenarios run with seeded noise

    SimModel model;
    model.beam_N = cfg.modal_n;
    model.D_meas = Eigen::Vector2d(cfg.noise_d11, cfg.noise_d22).asDiagonal();

    if (wing) {
        const AeroBlock blk = build_aero_modal(cfg.aero, JonesModel{}, result.basis);
        const CombinedSystem comb =
            assemble_combined(result.sys, blk, cfg.aero_coupling, result.basis, cfg.aero);
        Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(comb.dim(), comb.dim());
        Q.topLeftCorner(4 * cfg.modal_n, 4 * cfg.modal_n) = weights.state_weight();
        const RiccatiSolution reg = design_combined_lqr(comb, Q, weights.R_mat);
        model.A = comb.A_comb;
        model.B = comb.B_comb;
        model.C = comb.C_comb;
        model.K = reg.K_mat;
        result.state_labels = result.sys.labels;
        const char* blocks[4] = {"xi1", "xi2", "xi3", "xi4"};
        for (int b = 0; b < 4; ++b)
            for (int k = 0; k < cfg.modal_n; ++k)
                result.state_labels.push_back(std::string(blocks[b]) + "_" +
                                              std::to_string(b < 2 ? k + 1 : k));
    } else {
        const RiccatiSolution reg =
            solve_are(result.sys.A_mat, result.sys.B_mat, weights.state_weight(), weights.R_mat);
        model.A = result.sys.A_mat;
        model.B = result.sys.B_mat;
        model.C = result.sys.C_meas;
        model.K = reg.K_mat;
        result.state_labels = result.sys.labels;
        if (lqg) {
            const FilterDesign filt = design_filter(result.sys, cfg.noise());
            model.K_filt = filt.K_filt;
            model.B_noise = cfg.noise().B_noise;
        }
    }

    // closed-loop drift for reporting
    Eigen::MatrixXd F = model.A - model.B * model.K;
    if (model.K_filt.size() > 0) {
        const int n = static_cast<int>(model.A.rows());
        Eigen::MatrixXd Fc = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        Fc.topLeftCorner(n, n) = model.A;
        Fc.topRightCorner(n, n) = -model.B * model.K;
        Fc.bottomLeftCorner(n, n) = model.K_filt * model.C;
        Fc.bottomRightCorner(n, n) = model.A - model.B * model.K - model.K_filt * model.C;
        F = Fc;
    }
    result.closed_loop_abscissa = spectral_abscissa(F);

    result.trace = integrate(model, sim_cfg, &result.basis);
    if (lqg) detail::reconstruct_error_fields(result);
    return result;
}

// Time-RMS of a field column at the grid point nearest to y.
inline double time_rms_at(const Eigen::MatrixXd& field, const Eigen::VectorXd& y_grid, double y) {
    int best = 0;
    for (int g = 1; g < y_grid.size(); ++g)
        if (std::abs(y_grid[g] - y) < std::abs(y_grid[best] - y)) best = g;
    return std::sqrt(field.col(best).squaredNorm() / static_cast<double>(field.rows()));
}

// ---------------------------------------------------------------------------
// CSV bundle: states.csv, field.csv, controls.csv, innovations.csv and, for
// estimation scenarios, error_field.csv.
// ---------------------------------------------------------------------------
inline void write_trace_bundle(const ScenarioResult& result, const std::filesystem::path& outdir) {
    const SimulationTrace& tr = result.trace;
    {
        std::vector<std::string> header{"t"};
        for (const auto& l : result.state_labels) header.push_back(l);
        CsvBuilder csv(header);
        for (long k = 0; k < tr.states.rows(); ++k) {
            csv.cell(tr.times[k]);
            for (int j = 0; j < tr.states.cols(); ++j) csv.cell(tr.states(k, j));
            csv.end_row();
        }
        csv.write(outdir / "states.csv");
    }
    {
        CsvBuilder csv({"t", "u1", "u2"});
        for (long k = 0; k < tr.controls.rows(); ++k) {
            csv.cell(tr.times[k]).cell(tr.controls(k, 0)).cell(tr.controls(k, 1));
            csv.end_row();
        }
        csv.write(outdir / "controls.csv");
    }
    if (tr.y_grid.size() > 0) {
        CsvBuilder csv({"t", "y", "w", "w_t", "theta", "theta_t"});
        for (long k = 0; k < tr.w.rows(); ++k)
            for (int g = 0; g < tr.y_grid.size(); ++g) {
                csv.cell(tr.times[k]).cell(tr.y_grid[g]);
                csv.cell(tr.w(k, g)).cell(tr.w_t(k, g));
                csv.cell(tr.theta(k, g)).cell(tr.theta_t(k, g));
                csv.end_row();
            }
        csv.write(outdir / "field.csv");
    }
    if (tr.innovations.size() > 0) {
        CsvBuilder csv({"t", "i1", "i2"});
        for (long k = 0; k < tr.innovations.rows(); ++k) {
            csv.cell(tr.times[k]).cell(tr.innovations(k, 0)).cell(tr.innovations(k, 1));
            csv.end_row();
        }
        csv.write(outdir / "innovations.csv");
    }
    if (result.w_err.size() > 0) {
        CsvBuilder csv({"t", "y", "w_err", "theta_err"});
        for (long k = 0; k < result.w_err.rows(); ++k)
            for (int g = 0; g < tr.y_grid.size(); ++g) {
                csv.cell(tr.times[k]).cell(tr.y_grid[g]);
                csv.cell(result.w_err(k, g)).cell(result.theta_err(k, g));
                csv.end_row();
            }
        csv.write(outdir / "error_field.csv");
    }
}

}  // namespace flexwing
