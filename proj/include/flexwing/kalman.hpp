#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

#include "flexwing/riccati.hpp"
#include "flexwing/statespace.hpp"

namespace flexwing {

// Process / measurement noise description. B_noise is the input matrix of the
// distributed driving noise in explicit (mass-folded) coordinates; by default
// it excites every rate coefficient uniformly, which keeps the filter gain
// independent of the spanwise station. D_meas must be invertible.
struct NoiseSpec {
    Eigen::MatrixXd B_noise;  // 4N x 2
    Eigen::Matrix2d D_meas = Eigen::Matrix2d::Identity();

    void validate() const {
        Eigen::Matrix2d dd = D_meas * D_meas.transpose();
        if (dd.llt().info() != Eigen::Success)
            throw ParameterError("NoiseSpec: D D^T must be positive definite");
    }
};

inline NoiseSpec default_noise(int N, double d11 = 1.0, double d22 = 1.0,
                               double intensity = 1.0) {
    NoiseSpec spec;
    spec.B_noise = Eigen::MatrixXd::Zero(4 * N, 2);
    spec.B_noise.block(N, 0, N, 1).setConstant(intensity);
    spec.B_noise.block(3 * N, 1, N, 1).setConstant(intensity);
    spec.D_meas = Eigen::Vector2d(d11, d22).asDiagonal();
    return spec;
}

struct FilterDesign {
    Eigen::MatrixXd P_filt;   // 4N x 4N error covariance
    Eigen::MatrixXd K_filt;   // 4N x 2 filter gain, K = P C^T (D D^T)^-1
    std::vector<std::complex<double>> error_poles;  // spectrum of A - K C
    double residual = 0.0;
};

// Kalman filter design as an LQR in adjoint form: solves the dual Riccati
// equation A P + P A^T + Bn Bn^T - P C^T (D D^T)^-1 C P = 0 via solve_are on
// the transposed data.
inline FilterDesign design_filter(const ModalSystem& sys, const NoiseSpec& noise) {
    noise.validate();
    const int n = sys.dim();
    if (noise.B_noise.rows() != n)
        throw ParameterError("design_filter: noise input dimension mismatch");

    // Tip sensing cannot observe a mode whose shape vanishes at the tip.
    for (int k = 0; k < sys.N; ++k) {
        if (std::abs(sys.phi_tip[k]) < 1e-6 * sys.phi_norms[k])
            throw DesignError("design_filter: bending mode " + std::to_string(k + 1) +
                              " is unobservable from the tip sensor");
    }

    const Eigen::Matrix2d DDt = noise.D_meas * noise.D_meas.transpose();
    const Eigen::MatrixXd W = noise.B_noise * noise.B_noise.transpose();
    const RiccatiSolution dual =
        solve_are(sys.A_mat.transpose(), sys.C_meas.transpose(), W, DDt);

    FilterDesign design;
    design.P_filt = dual.P_mat;
    design.K_filt = dual.P_mat * sys.C_meas.transpose() * DDt.inverse();
    design.residual = dual.residual;
    design.error_poles = eigenvalues(sys.A_mat - design.K_filt * sys.C_meas);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& p : design.error_poles) worst = std::max(worst, p.real());
    if (worst >= 0.0)
        throw DesignError("design_filter: error dynamics not stable");
    return design;
}

// Innovations-form estimator: zhat' = A zhat + B u + K (psi - C zhat).
struct EstimatorSystem {
    Eigen::MatrixXd A;       // plant A
    Eigen::MatrixXd B;       // plant B
    Eigen::MatrixXd C;       // measurement
    Eigen::MatrixXd K_filt;  // innovation gain
    Eigen::MatrixXd A_err;   // error dynamics A - K C

    // Drift of the estimator state given a control and a measurement sample.
    Eigen::VectorXd drift(const Eigen::VectorXd& zhat, const Eigen::Vector2d& u,
                          const Eigen::Vector2d& psi) const {
        return A * zhat + B * u + K_filt * (psi - C * zhat);
    }
};

inline EstimatorSystem assemble_estimator(const ModalSystem& sys, const FilterDesign& filt) {
    if (filt.K_filt.rows() != sys.dim())
        throw ParameterError("assemble_estimator: dimension mismatch");
    EstimatorSystem est;
    est.A = sys.A_mat;
    est.B = sys.B_mat;
    est.C = sys.C_meas;
    est.K_filt = filt.K_filt;
    est.A_err = sys.A_mat - filt.K_filt * sys.C_meas;
    return est;
}

// Coupled plant + estimator closed loop with u = -K zhat. In (z, zhat)
// coordinates the drift matrix is [[A, -B K], [Kf C, A - B K - Kf C]]; its
// spectrum is the union of spec(A - B K) and spec(A - Kf C).
struct CompensatorSystem {
    int n_plant = 0;
    Eigen::MatrixXd A_cl;    // 8N x 8N combined drift
    Eigen::MatrixXd K;       // regulator gain
    Eigen::MatrixXd K_filt;  // filter gain
    Eigen::MatrixXd C;       // plant measurement
};

inline CompensatorSystem assemble_compensator(const ModalSystem& sys,
                                              const RiccatiSolution& reg,
                                              const FilterDesign& filt) {
    const int n = sys.dim();
    if (reg.K_mat.cols() != n || filt.K_filt.rows() != n)
        throw ParameterError("assemble_compensator: dimension mismatch");
    CompensatorSystem comp;
    comp.n_plant = n;
    comp.K = reg.K_mat;
    comp.K_filt = filt.K_filt;
    comp.C = sys.C_meas;
    comp.A_cl = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    comp.A_cl.topLeftCorner(n, n) = sys.A_mat;
    comp.A_cl.topRightCorner(n, n) = -sys.B_mat * reg.K_mat;
    comp.A_cl.bottomLeftCorner(n, n) = filt.K_filt * sys.C_meas;
    comp.A_cl.bottomRightCorner(n, n) =
        sys.A_mat - sys.B_mat * reg.K_mat - filt.K_filt * sys.C_meas;
    return comp;
}

}  // namespace flexwing
