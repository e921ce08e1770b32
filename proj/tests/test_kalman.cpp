#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "flexwing/kalman.hpp"
#include "flexwing/scenarios.hpp"
#include "flexwing/sim.hpp"

using namespace flexwing;
using Catch::Approx;

namespace {

BeamParameters example16_params() {
    BeamParameters p;
    p.S_y = 0.5;
    return p;
}

// greedy nearest-neighbor multiset match; returns max pair distance
double multiset_distance(std::vector<std::complex<double>> a,
                         std::vector<std::complex<double>> b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (const auto& x : a) {
        double best = 1e300;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (std::abs(x - b[j]) < best) {
                best = std::abs(x - b[j]);
                best_j = j;
            }
        }
        worst = std::max(worst, best);
        b.erase(b.begin() + static_cast<long>(best_j));
    }
    return worst;
}

}  // namespace

TEST_CASE("tip measurement matrix") {
    const BeamParameters p = example16_params();
    const ModalBasis basis = build_basis(p, 4);
    const Eigen::MatrixXd C = build_measurement(basis);
    REQUIRE(C.rows() == 2);
    REQUIRE(C.cols() == 16);

    // Theta_m(L) alternates sign
    for (int m = 0; m < 4; ++m)
        REQUIRE(C(1, 12 + m) == Approx(m % 2 == 0 ? 1.0 : -1.0));

    // Phi_n(L) = 2 sin(nu_n L) since d sinh(nu L) = sin(nu L)
    for (int n = 0; n < 4; ++n) {
        const double expected = 2.0 * std::sin(basis.bending[n].nu * p.L);
        REQUIRE(C(0, 4 + n) == Approx(expected).epsilon(1e-10));
    }

    // zero state measures zero
    REQUIRE((C * Eigen::VectorXd::Zero(16)).norm() == 0.0);
}

TEST_CASE("scalar dual design") {
    // a = 0, c = 1, b_noise = 1, d = 1: p = 1, gain 1, error pole -1
    Eigen::MatrixXd A(1, 1), C(1, 1), W(1, 1), V(1, 1);
    A << 0.0;
    C << 1.0;
    W << 1.0;
    V << 1.0;
    const auto dual = solve_are(A.transpose(), C.transpose(), W, V);
    const Eigen::MatrixXd K = dual.P_mat * C.transpose() * V.inverse();
    REQUIRE(dual.P_mat(0, 0) == Approx(1.0).epsilon(1e-12));
    REQUIRE(K(0, 0) == Approx(1.0).epsilon(1e-12));
    REQUIRE(spectral_abscissa(A - K * C) == Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("filter design on the 16-state beam") {
    const BeamParameters p = example16_params();
    const ModalBasis basis = build_basis(p, 4);
    const ModalSystem sys = build_modal_system(p, basis);
    const NoiseSpec noise = default_noise(4);
    const FilterDesign filt = design_filter(sys, noise);

    SECTION("error poles strictly stable") {
        for (const auto& pole : filt.error_poles) REQUIRE(pole.real() < 0.0);
    }
    SECTION("dual Riccati residual is tight (independent check)") {
        const Eigen::Matrix2d DDt = noise.D_meas * noise.D_meas.transpose();
        const Eigen::MatrixXd res = sys.A_mat * filt.P_filt + filt.P_filt * sys.A_mat.transpose() +
                                    noise.B_noise * noise.B_noise.transpose() -
                                    filt.P_filt * sys.C_meas.transpose() * DDt.inverse() *
                                        sys.C_meas * filt.P_filt;
        REQUIRE(res.norm() <= 1e-8 * (1.0 + filt.P_filt.squaredNorm()));
    }
    SECTION("gain formula K = P C^T (D D^T)^-1") {
        const Eigen::Matrix2d DDt = noise.D_meas * noise.D_meas.transpose();
        const Eigen::MatrixXd K2 = filt.P_filt * sys.C_meas.transpose() * DDt.inverse();
        REQUIRE((filt.K_filt - K2).norm() < 1e-12 * (1.0 + K2.norm()));
    }
    SECTION("covariance is symmetric PSD") {
        REQUIRE((filt.P_filt - filt.P_filt.transpose()).norm() <
                1e-10 * (1.0 + filt.P_filt.norm()));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(filt.P_filt);
        REQUIRE(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff());
    }
}

TEST_CASE("mode with a tip node is rejected") {
    const BeamParameters p = example16_params();
    const ModalBasis basis = build_basis(p, 4);
    ModalSystem sys = build_modal_system(p, basis);
    sys.phi_tip[2] = 0.0;
    REQUIRE_THROWS_AS(design_filter(sys, default_noise(4)), DesignError);
}

TEST_CASE("estimator and compensator structure") {
    const BeamParameters p = example16_params();
    const ModalBasis basis = build_basis(p, 4);
    const ModalSystem sys = build_modal_system(p, basis);
    const NoiseSpec noise = default_noise(4);
    const FilterDesign filt = design_filter(sys, noise);
    const auto reg = solve_are(sys.A_mat, sys.B_mat, Eigen::MatrixXd::Identity(16, 16),
                               Eigen::MatrixXd::Identity(2, 2));
    const EstimatorSystem est = assemble_estimator(sys, filt);
    const CompensatorSystem comp = assemble_compensator(sys, reg, filt);

    SECTION("error dynamics equals A - K C regardless of the regulator gain") {
        // similarity to (z, zerr) coordinates triangularizes the closed loop
        const int n = 16;
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        T.topLeftCorner(n, n).setIdentity();
        T.bottomLeftCorner(n, n).setIdentity();
        T.bottomRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd At = T * comp.A_cl * T.inverse();
        REQUIRE((At.bottomRightCorner(n, n) - est.A_err).norm() < 1e-9);
        REQUIRE(At.bottomLeftCorner(n, n).norm() < 1e-9);

        // a different regulator gain leaves the error block untouched
        const auto reg2 = solve_are(sys.A_mat, sys.B_mat,
                                    4.0 * Eigen::MatrixXd::Identity(16, 16),
                                    Eigen::MatrixXd::Identity(2, 2));
        const CompensatorSystem comp2 = assemble_compensator(sys, reg2, filt);
        const Eigen::MatrixXd At2 = T * comp2.A_cl * T.inverse();
        REQUIRE((At2.bottomRightCorner(n, n) - est.A_err).norm() < 1e-9);
    }

    SECTION("combined spectrum is the union of regulator and filter spectra") {
        auto combined = eigenvalues(comp.A_cl);
        auto reg_poles = eigenvalues(sys.A_mat - sys.B_mat * reg.K_mat);
        auto filt_poles = eigenvalues(est.A_err);
        std::vector<std::complex<double>> expected = reg_poles;
        expected.insert(expected.end(), filt_poles.begin(), filt_poles.end());
        REQUIRE(multiset_distance(combined, expected) < 1e-8);
    }

    SECTION("perfect initialization keeps innovations at zero") {
        SimModel model;
        model.A = sys.A_mat;
        model.B = sys.B_mat;
        model.C = sys.C_meas;
        model.K = reg.K_mat;
        model.K_filt = filt.K_filt;
        model.beam_N = 4;
        model.x0_estimate = initial_state("mixed", 1.0, 16, 4);
        SimConfig cfg;
        cfg.t_final = 2.0;
        cfg.feedback = FeedbackMode::Lqg;
        cfg.noise = false;
        const SimulationTrace trace = integrate(model, cfg, &basis);
        REQUIRE(trace.innovations.cwiseAbs().maxCoeff() < 1e-10);
    }

    SECTION("zero noise and zero initial error reproduce full-state feedback") {
        SimModel lqg_model;
        lqg_model.A = sys.A_mat;
        lqg_model.B = sys.B_mat;
        lqg_model.C = sys.C_meas;
        lqg_model.K = reg.K_mat;
        lqg_model.K_filt = filt.K_filt;
        lqg_model.beam_N = 4;
        lqg_model.x0_estimate = initial_state("mixed", 1.0, 16, 4);
        SimModel fs_model = lqg_model;
        fs_model.K_filt.resize(0, 0);
        fs_model.x0_estimate.resize(0);

        SimConfig cfg;
        cfg.t_final = 2.0;
        cfg.dt = 1e-3;
        cfg.feedback = FeedbackMode::Lqg;
        cfg.noise = false;
        const SimulationTrace lqg_trace = integrate(lqg_model, cfg);
        cfg.feedback = FeedbackMode::FullState;
        const SimulationTrace fs_trace = integrate(fs_model, cfg);
        const double scale = fs_trace.states.cwiseAbs().maxCoeff();
        REQUIRE((lqg_trace.states - fs_trace.states).cwiseAbs().maxCoeff() < 1e-10 * scale);
    }
}

TEST_CASE("innovations are white at steady state") {
    RunConfig cfg = RunConfig::from_preset("example16");
    cfg.sim_t_final = 40.0;
    cfg.sim_dt = 0.01;
    cfg.sim_seed = 2024;
    const ScenarioResult result = run_scenario("example16-lqg", cfg);
    const long T = result.trace.innovations.rows();
    const long start = T / 2;  // discard the estimation transient
    const long M = T - start;
    for (int ch = 0; ch < 2; ++ch) {
        const Eigen::VectorXd v =
            result.trace.innovations.col(ch).segment(start, M);
        const Eigen::VectorXd centered = v.array() - v.mean();
        const double denom = centered.squaredNorm();
        for (int lag = 5; lag <= 20; ++lag) {
            const double num =
                centered.head(M - lag).dot(centered.tail(M - lag));
            REQUIRE(std::abs(num / denom) < 3.0 / std::sqrt(static_cast<double>(M)));
        }
    }
}

TEST_CASE("estimation error is smaller near the tip sensors") {
    RunConfig cfg = RunConfig::from_preset("example16");
    cfg.sim_t_final = 40.0;
    cfg.sim_dt = 0.01;
    cfg.sim_seed = 7;
    const ScenarioResult result = run_scenario("example16-filter-error", cfg);
    const double L = cfg.beam.L;
    const double w_tip = time_rms_at(result.w_err, result.trace.y_grid, L);
    const double w_root = time_rms_at(result.w_err, result.trace.y_grid, 0.1 * L);
    const double th_tip = time_rms_at(result.theta_err, result.trace.y_grid, L);
    const double th_root = time_rms_at(result.theta_err, result.trace.y_grid, 0.1 * L);
    REQUIRE(w_tip < w_root);
    REQUIRE(th_tip < th_root);
}
