#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include "flexwing/errors.hpp"

namespace flexwing {

using ComplexMatrix = Eigen::MatrixXcd;

inline std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> out(static_cast<std::size_t>(A.rows()));
    for (int i = 0; i < A.rows(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
    return out;
}

inline double spectral_abscissa(const Eigen::MatrixXd& A) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues(A)) worst = std::max(worst, ev.real());
    return worst;
}

inline double spectral_radius(const Eigen::MatrixXd& A) {
    double r = 0.0;
    for (const auto& ev : eigenvalues(A)) r = std::max(r, std::abs(ev));
    return r;
}

namespace detail {

// Swap adjacent diagonal entries of an upper-triangular complex Schur factor
// by a unitary similarity, accumulating the transform into U.
inline void swap_schur_entries(ComplexMatrix& T, ComplexMatrix& U, int k) {
    const std::complex<double> a = T(k, k);
    const std::complex<double> b = T(k, k + 1);
    const std::complex<double> c = T(k + 1, k + 1);
    Eigen::JacobiRotation<std::complex<double>> rot;
    rot.makeGivens(b, c - a);
    T.applyOnTheLeft(k, k + 1, rot.adjoint());
    T.applyOnTheRight(k, k + 1, rot);
    U.applyOnTheRight(k, k + 1, rot);
    T(k + 1, k) = 0.0;  // rotation leaves roundoff here
}

// PBH test: every eigenvalue of A with real part >= -margin must satisfy
// sigma_min([A - lambda I, B]) above tolerance.
inline bool pbh_controllable_unstable_modes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                            double margin, double rel_tol) {
    const int n = static_cast<int>(A.rows());
    const double scale = std::max(1.0, A.norm() + B.norm());
    for (const auto& ev : eigenvalues(A)) {
        if (ev.real() < -margin) continue;
        ComplexMatrix M(n, n + B.cols());
        M.leftCols(n) = A.cast<std::complex<double>>();
        M.leftCols(n).diagonal().array() -= ev;
        M.rightCols(B.cols()) = B.cast<std::complex<double>>();
        Eigen::JacobiSVD<ComplexMatrix> svd(M);
        if (svd.singularValues().minCoeff() <= rel_tol * scale) return false;
    }
    return true;
}

}  // namespace detail

// Solve F^T X + X F + W = 0 (W symmetric, F with no eigenvalue pair summing to
// zero) by Bartels-Stewart on the complex Schur form of F.
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& F, const Eigen::MatrixXd& W) {
    const int n = static_cast<int>(F.rows());
    if (F.cols() != n || W.rows() != n || W.cols() != n)
        throw ParameterError("solve_lyapunov: dimension mismatch");
    Eigen::ComplexSchur<ComplexMatrix> schur(F.cast<std::complex<double>>());
    if (schur.info() != Eigen::Success)
        throw SolverError("solve_lyapunov: Schur decomposition failed");
    const ComplexMatrix& T = schur.matrixT();
    const ComplexMatrix& U = schur.matrixU();

    const double scale = std::max(1.0, T.diagonal().cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(std::conj(T(i, i)) + T(j, j)) < 1e-12 * scale)
                throw IterationError(
                    "solve_lyapunov: singular operator, eigenvalue pair (" + std::to_string(i) +
                    ", " + std::to_string(j) + ") sums to zero");

    // F real: F^T = F^H, so T^H Y + Y T = -U^H W U with Y = U^H X U.
    const ComplexMatrix C = -U.adjoint() * W.cast<std::complex<double>>() * U;
    ComplexMatrix Y = ComplexMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXcd rhs = C.col(j);
        if (j > 0) rhs.noalias() -= Y.leftCols(j) * T.block(0, j, j, 1);
        ComplexMatrix Lj = T.adjoint();
        Lj.diagonal().array() += T(j, j);
        Y.col(j) = Lj.triangularView<Eigen::Lower>().solve(rhs);
    }
    Eigen::MatrixXd X = (U * Y * U.adjoint()).real();
    return 0.5 * (X + X.transpose());
}

// Stabilizing solution of A^T P + P A + Q - P B R^-1 B^T P = 0 together with
// the gain K = R^-1 B^T P and the relative residual.
struct RiccatiSolution {
    Eigen::MatrixXd P_mat;
    Eigen::MatrixXd K_mat;
    double residual = 0.0;
};

// Continuous-time algebraic Riccati solver: ordered Schur decomposition of the
// 2n x 2n Hamiltonian (stable invariant subspace) followed by one Newton
// refinement step through a Lyapunov solve.
inline RiccatiSolution solve_are(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
        R.rows() != m || R.cols() != m)
        throw ParameterError("solve_are: dimension mismatch");
    if ((R - R.transpose()).norm() > 1e-10 * std::max(1.0, R.norm()))
        throw ParameterError("solve_are: R must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> rllt(R);
    if (rllt.info() != Eigen::Success)
        throw ParameterError("solve_are: R must be positive definite");
    const Eigen::MatrixXd Qs = 0.5 * (Q + Q.transpose());

    const double margin = 1e-9 * std::max(1.0, A.norm());
    if (!detail::pbh_controllable_unstable_modes(A, B, margin, 1e-10))
        throw ParameterError("solve_are: (A, B) fails the stabilizability test");
    // Detectability in the classical PBH sense is sufficient but not necessary
    // for a stabilizing solution (Q may vanish on stable directions); existence
    // is decided by the imaginary-axis check on the Hamiltonian below.

    const Eigen::MatrixXd G = B * rllt.solve(B.transpose());
    Eigen::MatrixXd H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = A;
    H.topRightCorner(n, n) = -G;
    H.bottomLeftCorner(n, n) = -Qs;
    H.bottomRightCorner(n, n) = -A.transpose();

    Eigen::ComplexSchur<ComplexMatrix> schur(H.cast<std::complex<double>>());
    if (schur.info() != Eigen::Success)
        throw SolverError("solve_are: Schur decomposition of the Hamiltonian failed");
    ComplexMatrix T = schur.matrixT();
    ComplexMatrix U = schur.matrixU();

    const double axis_tol = 1e-9 * std::max(1.0, T.diagonal().cwiseAbs().maxCoeff());
    int stable = 0;
    for (int i = 0; i < 2 * n; ++i) {
        if (std::abs(T(i, i).real()) <= axis_tol)
            throw NoStabilizingSolutionError(
                "solve_are: Hamiltonian eigenvalue on the imaginary axis");
        if (T(i, i).real() < 0.0) ++stable;
    }
    if (stable != n)
        throw NoStabilizingSolutionError("solve_are: Hamiltonian eigen-splitting failed (" +
                                         std::to_string(stable) + " stable of " +
                                         std::to_string(2 * n) + ")");

    // Bring the stable eigenvalues to the leading block.
    for (int target = 0; target < n; ++target) {
        int j = target;
        while (j < 2 * n && T(j, j).real() >= 0.0) ++j;
        for (; j > target; --j) detail::swap_schur_entries(T, U, j - 1);
    }

    const ComplexMatrix U11 = U.topLeftCorner(n, n);
    const ComplexMatrix U21 = U.bottomLeftCorner(n, n);
    Eigen::FullPivLU<ComplexMatrix> lu(U11);
    if (!lu.isInvertible())
        throw NoStabilizingSolutionError("solve_are: stable subspace basis is singular");
    Eigen::MatrixXd P = (U21 * lu.inverse()).real();
    P = 0.5 * (P + P.transpose()).eval();

    auto residual_matrix = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
        return A.transpose() * X + X * A + Qs - X * G * X;
    };

    // One Newton step: solve the closed-loop Lyapunov equation for the correction.
    Eigen::MatrixXd res = residual_matrix(P);
    const Eigen::MatrixXd Acl = A - G * P;
    try {
        const Eigen::MatrixXd delta = solve_lyapunov(Acl, res);
        const Eigen::MatrixXd refined = P + delta;
        if (residual_matrix(refined).norm() < res.norm()) {
            P = 0.5 * (refined + refined.transpose()).eval();
            res = residual_matrix(P);
        }
    } catch (const IterationError&) {
        // refinement is best-effort; the Schur solution stands on its own
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pes(P);
    const double pscale = std::max(1.0, pes.eigenvalues().cwiseAbs().maxCoeff());
    if (pes.eigenvalues().minCoeff() < -1e-10 * pscale)
        throw NoStabilizingSolutionError("solve_are: solution is not positive semidefinite");
    if (spectral_abscissa(A - G * P) >= 0.0)
        throw NoStabilizingSolutionError("solve_are: closed loop is not stable");

    RiccatiSolution sol;
    sol.P_mat = P;
    sol.K_mat = rllt.solve(B.transpose() * P);
    sol.residual = res.norm() / (1.0 + P.squaredNorm());
    return sol;
}

}  // namespace flexwing
