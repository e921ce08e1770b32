#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "flexwing/modal.hpp"

namespace flexwing {

// How the -S_y inertia coupling between bending and torsion rates is closed
// at the modal level. Slotwise ties coefficient k of one family to coefficient
// k of the other through the scalar 2x2 inertia block; Consistent uses the
// true cross Gram matrix of the two families instead (for comparison only).
enum class MassCoupling { Slotwise, Consistent };

// Finite-dimensional (4N-state) realization of the beam with boundary inputs.
// State ordering: zeta = [zeta1 (bend pos), zeta2 (bend rate),
//                         zeta3 (twist pos), zeta4 (twist rate)], blocks of N.
struct ModalSystem {
    int N = 0;
    BeamParameters params;
    Eigen::MatrixXd A_mat;   // 4N x 4N, mass matrix folded in
    Eigen::MatrixXd B_mat;   // 4N x 2, mass matrix folded in
    Eigen::MatrixXd M_mass;  // 4N x 4N implicit-form mass matrix
    Eigen::MatrixXd C_meas;  // 2 x 4N tip-rate measurement
    Eigen::VectorXd F1_diag; // EI * lambda_n
    Eigen::VectorXd F2_diag; // GJ * eta_m
    Eigen::VectorXd G1;      // B1 * EI * Phi_n'(0)
    Eigen::VectorXd G2;      // B2 * GJ * Theta_m(0) = B2 * GJ
    Eigen::VectorXd phi_norms;  // ||Phi_n|| for observability guards
    Eigen::VectorXd phi_tip;    // Phi_n(L)
    std::vector<std::string> labels;

    int dim() const { return 4 * N; }

    // Implicit-form input matrix [0; G1, 0; 0; 0, G2] (mass not folded in).
    Eigen::MatrixXd input_matrix_implicit() const {
        Eigen::MatrixXd B4 = Eigen::MatrixXd::Zero(4 * N, 2);
        B4.block(N, 0, N, 1) = G1;
        B4.block(3 * N, 1, N, 1) = G2;
        return B4;
    }

    // Modal energy: elastic part from the stiffness diagonals plus kinetic
    // part through the inertia block. Conserved along the open-loop flow.
    double energy(const Eigen::VectorXd& zeta) const {
        const auto z1 = zeta.segment(0, N);
        const auto z2 = zeta.segment(N, N);
        const auto z3 = zeta.segment(2 * N, N);
        const auto z4 = zeta.segment(3 * N, N);
        double e = -0.5 * z1.dot(F1_diag.cwiseProduct(z1))
                   - 0.5 * z3.dot(F2_diag.cwiseProduct(z3));
        e += 0.5 * params.mu * z2.squaredNorm() + 0.5 * params.I_y * z4.squaredNorm()
             - params.S_y * z2.dot(z4);
        return e;
    }
};

// Tip-rate measurement: row 1 reads zeta2 through Phi_n(L), row 2 reads zeta4
// through Theta_m(L) = (-1)^m.
inline Eigen::MatrixXd build_measurement(const ModalBasis& basis) {
    const int N = basis.N;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, 4 * N);
    for (int n = 0; n < N; ++n)
        C(0, N + n) = eval_phi(basis.bending[static_cast<std::size_t>(n)], basis.span(), 0);
    for (int m = 0; m < N; ++m)
        C(1, 3 * N + m) = (m % 2 == 0) ? 1.0 : -1.0;
    return C;
}

inline ModalSystem build_modal_system(const BeamParameters& params, const ModalBasis& basis,
                                      MassCoupling coupling = MassCoupling::Slotwise) {
    params.validate();
    const int N = basis.N;
    ModalSystem sys;
    sys.N = N;
    sys.params = params;

    sys.F1_diag.resize(N);
    sys.G1.resize(N);
    sys.phi_norms.resize(N);
    sys.phi_tip.resize(N);
    for (int n = 0; n < N; ++n) {
        const BendingMode& mode = basis.bending[static_cast<std::size_t>(n)];
        sys.F1_diag[n] = params.EI * mode.lambda;
        sys.G1[n] = params.B1 * params.EI * mode.phi_prime_0;
        sys.phi_norms[n] = std::sqrt(basis.norm_sq[n]);
        sys.phi_tip[n] = eval_phi(mode, params.L, 0);
    }
    sys.F2_diag.resize(N);
    sys.G2.resize(N);
    for (int m = 0; m < N; ++m) {
        sys.F2_diag[m] = params.GJ * basis.torsion[static_cast<std::size_t>(m)].eta;
        sys.G2[m] = params.B2 * params.GJ;  // Theta_m(0) = 1
    }

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
    sys.M_mass = Eigen::MatrixXd::Identity(4 * N, 4 * N);
    Eigen::MatrixXd W12, W21;  // rate-coupling blocks of the mass matrix
    if (coupling == MassCoupling::Slotwise) {
        W12 = -params.S_y * I;
        W21 = -params.S_y * I;
    } else {
        // Cross Gram blocks <Phi_n, Theta_m>, each family normalized by its own
        // Gram diagonal so the uncoupled limit matches the slotwise form.
        const Eigen::MatrixXd Gpt = basis.gram.block(0, N, N, N);
        const Eigen::MatrixXd Gpp = basis.gram.block(0, 0, N, N);
        const Eigen::MatrixXd Gtt = basis.gram.block(N, N, N, N);
        W12 = -params.S_y * Gpp.ldlt().solve(Gpt);
        W21 = -params.S_y * Gtt.ldlt().solve(Gpt.transpose());
    }
    sys.M_mass.block(N, N, N, N) = params.mu * I;
    sys.M_mass.block(N, 3 * N, N, N) = W12;
    sys.M_mass.block(3 * N, N, N, N) = W21;
    sys.M_mass.block(3 * N, 3 * N, N, N) = params.I_y * I;

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(4 * N, 4 * N);
    D.block(0, N, N, N) = I;
    D.block(N, 0, N, N) = sys.F1_diag.asDiagonal();
    D.block(2 * N, 3 * N, N, N) = I;
    D.block(3 * N, 2 * N, N, N) = sys.F2_diag.asDiagonal();

    const Eigen::MatrixXd B4 = sys.input_matrix_implicit();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.M_mass);
    sys.A_mat = lu.solve(D);
    sys.B_mat = lu.solve(B4);
    sys.C_meas = build_measurement(basis);

    sys.labels.reserve(static_cast<std::size_t>(4 * N));
    const char* block_names[4] = {"zeta1", "zeta2", "zeta3", "zeta4"};
    for (int b = 0; b < 4; ++b)
        for (int k = 0; k < N; ++k) {
            // zeta1/zeta2 indexed by bending n = 1..N, zeta3/zeta4 by torsion m = 0..N-1
            const int idx = (b == 0 || b == 1) ? k + 1 : k;
            sys.labels.push_back(std::string(block_names[b]) + "_" + std::to_string(idx));
        }
    return sys;
}

struct BeamFields {
    Eigen::VectorXd w, w_t, theta, theta_t;
};

// w(y) = sum Phi_n(y) zeta1_n, theta(y) = sum Theta_m(y) zeta3_m, and the same
// contractions with zeta2/zeta4 for the rates.
inline BeamFields reconstruct_fields(const ModalSystem& sys, const ModalBasis& basis,
                                     const Eigen::VectorXd& state,
                                     const Eigen::VectorXd& y_grid) {
    const int N = sys.N;
    const int G = static_cast<int>(y_grid.size());
    BeamFields f;
    f.w = Eigen::VectorXd::Zero(G);
    f.w_t = Eigen::VectorXd::Zero(G);
    f.theta = Eigen::VectorXd::Zero(G);
    f.theta_t = Eigen::VectorXd::Zero(G);
    for (int g = 0; g < G; ++g) {
        const double y = y_grid[g];
        for (int n = 0; n < N; ++n) {
            const double phi = eval_phi(basis.bending[static_cast<std::size_t>(n)], y, 0);
            f.w[g] += phi * state[n];
            f.w_t[g] += phi * state[N + n];
        }
        for (int m = 0; m < N; ++m) {
            const double th = eval_theta(m, basis.span(), y, 0);
            f.theta[g] += th * state[2 * N + m];
            f.theta_t[g] += th * state[3 * N + m];
        }
    }
    return f;
}

}  // namespace flexwing
