#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "flexwing/modal.hpp"
#include "flexwing/riccati.hpp"
#include "flexwing/statespace.hpp"

namespace flexwing {

// Wing section and freestream parameters.
struct AeroParameters {
    double b = 0.5;         // half chord
    double a = 0.0;         // elastic-axis offset from mid chord (dimensionless)
    double rho_inf = 0.0889;  // freestream air density
    double U_inf = 45.0;    // freestream velocity

    void validate() const {
        if (b <= 0.0) throw ParameterError("aero: half chord b must be positive");
        if (rho_inf <= 0.0) throw ParameterError("aero: rho_inf must be positive");
        if (U_inf < 0.0) throw ParameterError("aero: U_inf must be nonnegative");
    }

    // Effective twist-to-downwash lever: U_inf + b (1/2 - a).
    double twist_gain() const { return U_inf + b * (0.5 - a); }
};

// Two-state rational approximation of the indicial lift response.
struct JonesModel {
    Eigen::Matrix2d A_j = (Eigen::Matrix2d() << 0.0, 1.0, -0.0137, -0.3455).finished();
    Eigen::Vector2d B_j = Eigen::Vector2d(0.0, 1.0);
    Eigen::RowVector2d C_j = Eigen::RowVector2d(0.0068, 0.1080);
    double D_j = 0.5;
};

// Downwash-type aerodynamic input: -h_dot + (U_inf + b(1/2 - a)) alpha.
inline double aero_input(const AeroParameters& params, double h_dot, double alpha) {
    return -h_dot + params.twist_gain() * alpha;
}

// Lift per unit span. psi_a is the aerodynamic output C xi + D nu at the
// station of interest. h positive up, alpha positive nose-up.
inline double lift_per_span(const AeroParameters& p, double h_dd, double alpha, double alpha_d,
                            double alpha_dd, double h_d, double psi_a) {
    constexpr double kPi = 3.14159265358979323846;
    const double apparent =
        p.rho_inf * kPi * p.b * (-h_dd + p.U_inf * alpha_d - p.b * p.a * alpha_dd);
    const double quasi_steady =
        kPi * p.rho_inf * p.U_inf * (-h_d + p.U_inf * alpha + p.b * (0.5 - p.a) * alpha_d);
    const double circulatory_lag = -2.0 * kPi * p.b * p.rho_inf * p.U_inf * psi_a;
    return apparent + quasi_steady + circulatory_lag;
}

// Moment per unit span about the elastic axis, with the (a + 1/2) lever arms.
inline double moment_per_span(const AeroParameters& p, double h_dd, double alpha, double alpha_d,
                              double alpha_dd, double h_d, double psi_a) {
    constexpr double kPi = 3.14159265358979323846;
    const double apparent = p.rho_inf * kPi * p.b * p.b *
                            (-p.a * h_dd + (p.a - 0.5) * p.U_inf * alpha_d -
                             p.b * (p.a * p.a + 0.125) * alpha_dd);
    const double quasi_steady =
        kPi * p.b * p.rho_inf * p.U_inf * (p.a + 0.5) *
        (-h_d + p.U_inf * alpha + p.b * (0.5 - p.a) * alpha_d);
    const double circulatory_lag =
        -2.0 * kPi * p.b * p.rho_inf * p.U_inf * (p.a + 0.5) * psi_a;
    return apparent + quasi_steady + circulatory_lag;
}

// Modal aerodynamic block. Aero state ordering: [xi1, xi2, xi3, xi4], blocks
// of N; (xi1, xi2) pairs follow the bending family, (xi3, xi4) the torsion
// family. Per-mode dynamics:
//   d/dt [xi1_n; xi2_n] = A_j [xi1_n; xi2_n] - B_j zeta2_n
//   d/dt [xi3_m; xi4_m] = A_j [xi3_m; xi4_m] + B_j (U_inf + b(1/2-a)) zeta3_m
struct AeroBlock {
    int N = 0;
    JonesModel jones;
    Eigen::MatrixXd A_block;  // 4N x 4N
    Eigen::MatrixXd drive;    // 4N x 4N map from beam state to aero drift
};

inline AeroBlock build_aero_modal(const AeroParameters& params, const JonesModel& jones,
                                  const ModalBasis& basis) {
    params.validate();
    const int N = basis.N;
    AeroBlock blk;
    blk.N = N;
    blk.jones = jones;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
    blk.A_block = Eigen::MatrixXd::Zero(4 * N, 4 * N);
    // bending-family pair
    blk.A_block.block(0, 0, N, N) = jones.A_j(0, 0) * I;
    blk.A_block.block(0, N, N, N) = jones.A_j(0, 1) * I;
    blk.A_block.block(N, 0, N, N) = jones.A_j(1, 0) * I;
    blk.A_block.block(N, N, N, N) = jones.A_j(1, 1) * I;
    // torsion-family pair
    blk.A_block.block(2 * N, 2 * N, N, N) = jones.A_j(0, 0) * I;
    blk.A_block.block(2 * N, 3 * N, N, N) = jones.A_j(0, 1) * I;
    blk.A_block.block(3 * N, 2 * N, N, N) = jones.A_j(1, 0) * I;
    blk.A_block.block(3 * N, 3 * N, N, N) = jones.A_j(1, 1) * I;

    blk.drive = Eigen::MatrixXd::Zero(4 * N, 4 * N);
    blk.drive.block(0, N, N, N) = -jones.B_j(0) * I;          // xi1 row <- zeta2
    blk.drive.block(N, N, N, N) = -jones.B_j(1) * I;          // xi2 row <- zeta2
    blk.drive.block(2 * N, 2 * N, N, N) = jones.B_j(0) * params.twist_gain() * I;
    blk.drive.block(3 * N, 2 * N, N, N) = jones.B_j(1) * params.twist_gain() * I;
    return blk;
}

enum class AeroCoupling { OneWay, TwoWay };

// Beam + aerodynamics, 8N states: [zeta (4N); xi (4N)].
struct CombinedSystem {
    int N = 0;
    AeroCoupling coupling = AeroCoupling::OneWay;
    AeroParameters aero_params;
    JonesModel jones;
    Eigen::MatrixXd A_comb;  // 8N x 8N
    Eigen::MatrixXd B_comb;  // 8N x 2
    Eigen::MatrixXd C_comb;  // 2 x 8N, tip sensors extended by zeros

    int dim() const { return 8 * N; }
};

// One-way mode leaves the beam dynamics untouched and drives the aero states
// from the beam. Two-way mode additionally feeds the spanwise lift back into
// the bending momentum equations and the pitching moment into the torsion
// equations, each projected onto its own family through the Gram machinery;
// apparent-mass (acceleration) terms fold into the inertia block.
inline CombinedSystem assemble_combined(const ModalSystem& beam, const AeroBlock& aeroblk,
                                        AeroCoupling coupling, const ModalBasis& basis,
                                        const AeroParameters& params) {
    params.validate();
    const int N = beam.N;
    if (aeroblk.N != N || basis.N != N)
        throw ParameterError("assemble_combined: mode count mismatch");
    constexpr double kPi = 3.14159265358979323846;

    CombinedSystem comb;
    comb.N = N;
    comb.coupling = coupling;
    comb.aero_params = params;
    comb.jones = aeroblk.jones;
    comb.C_comb = Eigen::MatrixXd::Zero(2, 8 * N);
    comb.C_comb.leftCols(4 * N) = beam.C_meas;

    if (coupling == AeroCoupling::OneWay) {
        comb.A_comb = Eigen::MatrixXd::Zero(8 * N, 8 * N);
        comb.A_comb.topLeftCorner(4 * N, 4 * N) = beam.A_mat;
        comb.A_comb.bottomLeftCorner(4 * N, 4 * N) = aeroblk.drive;
        comb.A_comb.bottomRightCorner(4 * N, 4 * N) = aeroblk.A_block;
        comb.B_comb = Eigen::MatrixXd::Zero(8 * N, 2);
        comb.B_comb.topRows(4 * N) = beam.B_mat;
        return comb;
    }

    // --- two-way force closure ---
    if (!basis.gram_positive || basis.gram_condition > kGramConditionLimit)
        throw IllConditionedBasisError(basis.gram_condition);
    const Eigen::MatrixXd Gpp = basis.gram.block(0, 0, N, N);
    const Eigen::MatrixXd Gpt = basis.gram.block(0, N, N, N);
    const Eigen::MatrixXd Gtt = basis.gram.block(N, N, N, N);
    // least-squares projections between the families
    const Eigen::MatrixXd Ppt = Gpp.ldlt().solve(Gpt);              // Theta coeffs -> Phi coeffs
    const Eigen::MatrixXd Ptp = Gtt.ldlt().solve(Gpt.transpose());  // Phi coeffs -> Theta coeffs

    const JonesModel& j = aeroblk.jones;
    const double rho = params.rho_inf, b = params.b, a = params.a, U = params.U_inf;
    const double W = params.twist_gain();
    const double c1 = j.C_j(0), c2 = j.C_j(1), D = j.D_j;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);

    // Implicit form M_eff X' = D_eff X + B_eff u over X = [zeta; xi].
    Eigen::MatrixXd Meff = Eigen::MatrixXd::Identity(8 * N, 8 * N);
    Meff.block(N, N, N, N) = (beam.params.mu + rho * kPi * b) * I;
    Meff.block(N, 3 * N, N, N) = -beam.params.S_y * I + rho * kPi * b * b * a * Ppt;
    Meff.block(3 * N, N, N, N) = -beam.params.S_y * I + rho * kPi * b * b * a * Ptp;
    Meff.block(3 * N, 3 * N, N, N) =
        (beam.params.I_y + rho * kPi * b * b * b * (a * a + 0.125)) * I;

    Eigen::MatrixXd Deff = Eigen::MatrixXd::Zero(8 * N, 8 * N);
    Deff.block(0, N, N, N) = I;                                   // zeta1' = zeta2
    Deff.block(2 * N, 3 * N, N, N) = I;                           // zeta3' = zeta4
    Deff.block(N, 0, N, N) = beam.F1_diag.asDiagonal();           // elastic restoring
    Deff.block(3 * N, 2 * N, N, N) = beam.F2_diag.asDiagonal();

    // lift contributions (rate/position/lag terms) on the zeta2 rows
    const double qs = kPi * rho * U;              // quasi-steady prefactor
    const double lag = -2.0 * kPi * b * rho * U;  // circulatory lag prefactor
    Deff.block(N, N, N, N) += (-qs - lag * D) * I;                // h_dot and psi(zeta2)
    Deff.block(N, 2 * N, N, N) += (qs * U + lag * D * W) * Ppt;   // alpha and psi(zeta3)
    Deff.block(N, 3 * N, N, N) += (rho * kPi * b * U + qs * b * (0.5 - a)) * Ppt;  // alpha_dot
    Deff.block(N, 4 * N, N, N) += lag * c1 * I;                   // psi(xi1)
    Deff.block(N, 5 * N, N, N) += lag * c2 * I;                   // psi(xi2)
    Deff.block(N, 6 * N, N, N) += lag * c1 * Ppt;                 // psi(xi3)
    Deff.block(N, 7 * N, N, N) += lag * c2 * Ppt;                 // psi(xi4)

    // moment contributions on the zeta4 rows
    const double qm = kPi * b * rho * U * (a + 0.5);
    const double lagm = -2.0 * kPi * b * rho * U * (a + 0.5);
    Deff.block(3 * N, N, N, N) += (-qm - lagm * D) * Ptp;
    Deff.block(3 * N, 2 * N, N, N) += (qm * U + lagm * D * W) * I;
    Deff.block(3 * N, 3 * N, N, N) +=
        (rho * kPi * b * b * (a - 0.5) * U + qm * b * (0.5 - a)) * I;
    Deff.block(3 * N, 4 * N, N, N) += lagm * c1 * Ptp;
    Deff.block(3 * N, 5 * N, N, N) += lagm * c2 * Ptp;
    Deff.block(3 * N, 6 * N, N, N) += lagm * c1 * I;
    Deff.block(3 * N, 7 * N, N, N) += lagm * c2 * I;

    // aero state rows (identity mass)
    Deff.block(4 * N, 0, 4 * N, 4 * N) = aeroblk.drive;
    Deff.block(4 * N, 4 * N, 4 * N, 4 * N) = aeroblk.A_block;

    Eigen::MatrixXd Beff = Eigen::MatrixXd::Zero(8 * N, 2);
    Beff.block(N, 0, N, 1) = beam.G1;
    Beff.block(3 * N, 1, N, 1) = beam.G2;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Meff);
    comb.A_comb = lu.solve(Deff);
    comb.B_comb = lu.solve(Beff);
    return comb;
}

// LQR over the combined model. The aero block is uncontrollable from the
// boundary inputs but already Hurwitz, so stabilizability holds.
inline RiccatiSolution design_combined_lqr(const CombinedSystem& comb, const Eigen::MatrixXd& Q,
                                           const Eigen::MatrixXd& R) {
    if (Q.rows() != comb.dim() || Q.cols() != comb.dim())
        throw ParameterError("design_combined_lqr: Q dimension mismatch");
    return solve_are(comb.A_comb, comb.B_comb, Q, R);
}

}  // namespace flexwing
