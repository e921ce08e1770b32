#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "flexwing/modal.hpp"
#include "flexwing/riccati.hpp"
#include "flexwing/statespace.hpp"

namespace flexwing {

// ============================================================================
// Modal (kernel-coefficient) Riccati machinery: closed-form initial iterates,
// policy iteration on the truncated modal algebraic Riccati equation, kernel
// reconstruction, and decay-rate diagnostics.
//
// Conventions. The kernel coefficient table is a symmetric 4N x 4N matrix in
// the same slot layout as the state zeta. Component rows 1,2 are expanded in
// the bending family, rows 3,4 in the torsion family. With the 4N mass matrix
// M4 and implicit input matrix B4, the kernel table P and the cost matrix of
// the explicit system are related by Phat = M4 P M4, and the feedback gain by
// K = R^-1 B4^T P M4.
// ============================================================================

struct WeightSpec {
    // Per-mode state weights: bending n = 1..N, torsion m = 0..N-1.
    Eigen::VectorXd q_bend_11, q_bend_22;
    Eigen::VectorXd q_twist_33, q_twist_44;
    // Power-law descriptors |Q| <= q / n^r used by the decay diagnostics.
    double decay_q = 1.0;
    double decay_r_bend = 0.0;
    double decay_r_twist = 0.0;
    Eigen::Matrix2d R_mat = Eigen::Matrix2d::Identity();

    int modes() const { return static_cast<int>(q_bend_11.size()); }

    // Gamma = B R^-1 B with B = diag(B1, B2).
    Eigen::Matrix2d gamma(const BeamParameters& params) const {
        Eigen::Matrix2d Bd = Eigen::Vector2d(params.B1, params.B2).asDiagonal();
        return Bd * R_mat.llt().solve(Bd);
    }

    // Diagonal state-weight matrix in slot layout.
    Eigen::MatrixXd state_weight() const {
        const int N = modes();
        Eigen::VectorXd d(4 * N);
        d << q_bend_11, q_bend_22, q_twist_33, q_twist_44;
        return d.asDiagonal();
    }

    void validate() const {
        const int N = modes();
        if (N < 1 || q_bend_22.size() != N || q_twist_33.size() != N || q_twist_44.size() != N)
            throw ParameterError("WeightSpec: inconsistent mode counts");
        if (q_bend_11.minCoeff() < 0 || q_bend_22.minCoeff() < 0 ||
            q_twist_33.minCoeff() < 0 || q_twist_44.minCoeff() < 0)
            throw ParameterError("WeightSpec: state weights must be nonnegative");
        if (R_mat.llt().info() != Eigen::Success)
            throw ParameterError("WeightSpec: R must be positive definite");
    }
};

// q_n = q / n^r for bending (n >= 1); q_m = q / max(m,1)^r for torsion, so the
// m = 0 mode gets the finite weight q.
inline WeightSpec power_law_weights(double q, double r_bend, double r_twist, int N,
                                    const Eigen::Matrix2d& R = Eigen::Matrix2d::Identity()) {
    if (q < 0) throw ParameterError("power_law_weights: q must be nonnegative");
    WeightSpec w;
    w.q_bend_11.resize(N);
    w.q_bend_22.resize(N);
    w.q_twist_33.resize(N);
    w.q_twist_44.resize(N);
    for (int n = 1; n <= N; ++n) {
        const double v = q / std::pow(static_cast<double>(n), r_bend);
        w.q_bend_11[n - 1] = v;
        w.q_bend_22[n - 1] = v;
    }
    for (int m = 0; m < N; ++m) {
        const double v = q / std::pow(static_cast<double>(std::max(m, 1)), r_twist);
        w.q_twist_33[m] = v;
        w.q_twist_44[m] = v;
    }
    w.decay_q = q;
    w.decay_r_bend = r_bend;
    w.decay_r_twist = r_twist;
    w.R_mat = R;
    return w;
}

// Which Gamma entry the torsion position-coefficient formula uses. The printed
// form mixes channels; G11 reproduces it verbatim.
enum class P330Gamma { G11, G22 };

struct InitialBend {
    double p11 = 0.0, p12 = 0.0, p22 = 0.0;
};
struct InitialTwist {
    double p33 = 0.0, p34 = 0.0, p44 = 0.0;
};

// Closed-form positive-root initial iterate for a bending mode.
inline InitialBend initial_iterate_bending(const BendingMode& mode, const WeightSpec& weights,
                                           const BeamParameters& params) {
    const int n = mode.index;
    if (n < 1 || n > weights.modes())
        throw ParameterError("initial_iterate_bending: mode index out of range");
    if (std::abs(mode.phi_prime_0) == 0.0)
        throw ParameterError("initial_iterate_bending: degenerate mode with Phi'(0) = 0");
    const Eigen::Matrix2d G = weights.gamma(params);
    const double g11 = G(0, 0), g22 = G(1, 1);
    if (g11 <= 0.0 || g22 <= 0.0)
        throw ParameterError("initial_iterate_bending: Gamma diagonal must be positive");
    const double q11 = weights.q_bend_11[n - 1];
    const double q22 = weights.q_bend_22[n - 1];
    const double le = mode.lambda * params.EI;
    const double bp = params.EI * mode.phi_prime_0;

    InitialBend out;
    out.p12 = (le + std::sqrt(le * le + q11 * g11 * bp * bp)) / (g11 * bp * bp);
    out.p22 = std::sqrt(2.0 * params.I_y * out.p12 + q22) /
              (std::sqrt(g22) * params.I_y * params.EI * mode.phi_prime_0);
    out.p11 = -mode.lambda * params.mu * params.I_y * params.EI * out.p22 +
              params.mu * params.EI * out.p12 * g11 * params.I_y * params.EI * out.p22 *
                  mode.phi_prime_0;
    return out;
}

// Closed-form positive-root initial iterate for a torsion mode. Valid at
// m = 0 as well since eta_0 = 0.
inline InitialTwist initial_iterate_torsion(const TorsionMode& mode, const WeightSpec& weights,
                                            const BeamParameters& params,
                                            P330Gamma p330_gamma = P330Gamma::G11) {
    const int m = mode.index;
    if (m < 0 || m >= weights.modes())
        throw ParameterError("initial_iterate_torsion: mode index out of range");
    const Eigen::Matrix2d G = weights.gamma(params);
    const double g22 = G(1, 1);
    if (g22 <= 0.0)
        throw ParameterError("initial_iterate_torsion: Gamma_22 must be positive");
    const double q33 = weights.q_twist_33[m];
    const double q44 = weights.q_twist_44[m];
    const double eg = mode.eta * params.GJ;
    const double gj = params.GJ;

    InitialTwist out;
    out.p34 = (eg + std::sqrt(eg * eg + q33 * g22 * gj * gj)) / (g22 * gj * gj);
    out.p44 = std::sqrt(2.0 * params.I_y * out.p34 + q44) / (std::sqrt(g22) * params.I_y * gj);
    const double gpos = (p330_gamma == P330Gamma::G11) ? G(0, 0) : g22;
    out.p33 = (eg * out.p44 + gj * gj * out.p34 * gpos * out.p44) / params.I_y;
    return out;
}

// Kernel coefficient table of one policy iterate. coeff is 4N x 4N symmetric
// in slot layout; iterate 0 is diagonal per mode with all cross tables zero.
struct ModalKernelIterate {
    int N = 0;
    int iteration = 0;
    Eigen::MatrixXd coeff;

    Eigen::Matrix2d bend_block(int n1, int n2) const {  // components 1,2; n = 1..N
        Eigen::Matrix2d b;
        b << coeff(n1 - 1, n2 - 1), coeff(n1 - 1, N + n2 - 1),
             coeff(N + n1 - 1, n2 - 1), coeff(N + n1 - 1, N + n2 - 1);
        return b;
    }
    Eigen::Matrix2d twist_block(int m1, int m2) const {  // components 3,4; m = 0..N-1
        Eigen::Matrix2d b;
        b << coeff(2 * N + m1, 2 * N + m2), coeff(2 * N + m1, 3 * N + m2),
             coeff(3 * N + m1, 2 * N + m2), coeff(3 * N + m1, 3 * N + m2);
        return b;
    }
    // Max |entry| over the mixed bending/torsion tables.
    double cross_magnitude() const {
        return coeff.block(0, 2 * N, 2 * N, 2 * N).cwiseAbs().maxCoeff();
    }
};

inline ModalKernelIterate initial_kernel_iterate(const WeightSpec& weights,
                                                 const BeamParameters& params,
                                                 const ModalBasis& basis,
                                                 P330Gamma p330_gamma = P330Gamma::G11) {
    weights.validate();
    const int N = basis.N;
    if (weights.modes() != N)
        throw ParameterError("initial_kernel_iterate: weight/basis mode count mismatch");
    ModalKernelIterate it;
    it.N = N;
    it.iteration = 0;
    it.coeff = Eigen::MatrixXd::Zero(4 * N, 4 * N);
    for (int n = 1; n <= N; ++n) {
        const InitialBend b =
            initial_iterate_bending(basis.bending[static_cast<std::size_t>(n - 1)], weights, params);
        it.coeff(n - 1, n - 1) = b.p11;
        it.coeff(n - 1, N + n - 1) = it.coeff(N + n - 1, n - 1) = b.p12;
        it.coeff(N + n - 1, N + n - 1) = b.p22;
    }
    for (int m = 0; m < N; ++m) {
        const InitialTwist t = initial_iterate_torsion(basis.torsion[static_cast<std::size_t>(m)],
                                                       weights, params, p330_gamma);
        it.coeff(2 * N + m, 2 * N + m) = t.p33;
        it.coeff(2 * N + m, 3 * N + m) = it.coeff(3 * N + m, 2 * N + m) = t.p34;
        it.coeff(3 * N + m, 3 * N + m) = t.p44;
    }
    return it;
}

// Exact finite-dimensional image of the boundary-gain formula:
// K = R^-1 B4^T P M4 (rows: bending moment, torque; columns: slot layout).
inline Eigen::MatrixXd kernel_gain_matrix(const ModalKernelIterate& it, const WeightSpec& weights,
                                          const ModalSystem& sys) {
    const Eigen::MatrixXd B4 = sys.input_matrix_implicit();
    return weights.R_mat.llt().solve(B4.transpose() * it.coeff * sys.M_mass);
}

// One policy-iteration step on the truncated modal Riccati equation: the
// quadratic right side is evaluated at the previous iterate's policy and the
// linear (Lyapunov-type) left-side system is solved for the new coefficients.
// Equivalently, in explicit coordinates: the closed-loop Lyapunov equation
//   (A - B K_k)^T X + X (A - B K_k) + Qhat + K_k^T R K_k = 0
// whose solution maps back to kernel coefficients through the mass matrix.
// The iterate-0 sparsity (cross tables zero) is preserved whenever S_y = 0.
inline ModalKernelIterate policy_iterate(const ModalKernelIterate& prev, const WeightSpec& weights,
                                         const BeamParameters& params, const ModalBasis& basis) {
    weights.validate();
    const int N = basis.N;
    if (prev.N != N || weights.modes() != N)
        throw ParameterError("policy_iterate: mode count mismatch");
    if ((prev.coeff - prev.coeff.transpose()).norm() > 1e-9 * std::max(1.0, prev.coeff.norm()))
        throw ParameterError("policy_iterate: previous iterate is not symmetric");

    const ModalSystem sys = build_modal_system(params, basis);
    const Eigen::MatrixXd Phat = sys.M_mass * prev.coeff * sys.M_mass;
    const Eigen::MatrixXd K = weights.R_mat.llt().solve(sys.B_mat.transpose() * Phat);
    const Eigen::MatrixXd Acl = sys.A_mat - sys.B_mat * K;
    const Eigen::MatrixXd W = weights.state_weight() + K.transpose() * weights.R_mat * K;

    Eigen::MatrixXd X;
    try {
        X = solve_lyapunov(Acl, W);
    } catch (const IterationError& e) {
        throw IterationError(std::string("policy_iterate: left-side solve singular (") +
                             e.what() + ")");
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.M_mass);
    ModalKernelIterate next;
    next.N = N;
    next.iteration = prev.iteration + 1;
    next.coeff = lu.solve(lu.solve(X).transpose()).transpose();
    next.coeff = 0.5 * (next.coeff + next.coeff.transpose()).eval();
    return next;
}

struct PolicyRun {
    ModalKernelIterate final;
    std::vector<ModalKernelIterate> history;
    std::vector<double> sup_changes;
    bool converged = false;
};

inline PolicyRun run_policy_iteration(const WeightSpec& weights, const BeamParameters& params,
                                      const ModalBasis& basis, double tol = 1e-9,
                                      int max_iterations = 200,
                                      P330Gamma p330_gamma = P330Gamma::G11) {
    PolicyRun run;
    ModalKernelIterate cur = initial_kernel_iterate(weights, params, basis, p330_gamma);
    run.history.push_back(cur);
    for (int k = 0; k < max_iterations; ++k) {
        ModalKernelIterate next = policy_iterate(cur, weights, params, basis);
        const double change = (next.coeff - cur.coeff).cwiseAbs().maxCoeff();
        run.sup_changes.push_back(change);
        cur = std::move(next);
        run.history.push_back(cur);
        // sup-norm change measured relative to the iterate scale
        if (change < tol * std::max(1.0, cur.coeff.cwiseAbs().maxCoeff())) {
            run.converged = true;
            break;
        }
    }
    run.final = cur;
    return run;
}

// Kernel value P(y1, y2) as a 4x4 matrix: entry (i, j) sums its coefficient
// table against the family of component i at y1 and of component j at y2.
inline Eigen::Matrix4d reconstruct_kernel(const ModalKernelIterate& it, const ModalBasis& basis,
                                          double y1, double y2) {
    const int N = it.N;
    if (N != basis.N) throw ParameterError("reconstruct_kernel: basis mode count mismatch");
    Eigen::VectorXd f1(4 * N), f2(4 * N);  // component-slot basis values at y1, y2
    for (int n = 0; n < N; ++n) {
        const double p1 = eval_phi(basis.bending[static_cast<std::size_t>(n)], y1, 0);
        const double p2 = eval_phi(basis.bending[static_cast<std::size_t>(n)], y2, 0);
        f1[n] = f1[N + n] = p1;
        f2[n] = f2[N + n] = p2;
    }
    for (int m = 0; m < N; ++m) {
        const double t1 = eval_theta(m, basis.span(), y1, 0);
        const double t2 = eval_theta(m, basis.span(), y2, 0);
        f1[2 * N + m] = f1[3 * N + m] = t1;
        f2[2 * N + m] = f2[3 * N + m] = t2;
    }
    Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b)
                    acc += it.coeff(i * N + a, j * N + b) * f1[i * N + a] * f2[j * N + b];
            P(i, j) = acc;
        }
    return P;
}

// Boundary-gain kernel K(y) sampled pointwise: 2 x 4 matrix function of y.
inline Eigen::Matrix<double, 2, 4> kernel_gain_at(const ModalKernelIterate& it,
                                                  const WeightSpec& weights,
                                                  const BeamParameters& params,
                                                  const ModalBasis& basis, double y) {
    const int N = it.N;
    Eigen::Matrix<double, 2, 4> raw = Eigen::Matrix<double, 2, 4>::Zero();
    // row 1: EI * d/dy1 P_{2,:}(0, y); row 2: GJ * P_{4,:}(0, y)
    for (int j = 0; j < 4; ++j) {
        double acc1 = 0.0, acc2 = 0.0;
        for (int a = 0; a < N; ++a) {
            const double phip0 = basis.bending[static_cast<std::size_t>(a)].phi_prime_0;
            for (int b = 0; b < N; ++b) {
                const double fj = (j < 2) ? eval_phi(basis.bending[static_cast<std::size_t>(b)], y, 0)
                                          : eval_theta(b, basis.span(), y, 0);
                acc1 += it.coeff(N + a, j * N + b) * phip0 * fj;   // Phi_a'(0) weights
                acc2 += it.coeff(3 * N + a, j * N + b) * 1.0 * fj;  // Theta_a(0) = 1
            }
        }
        raw(0, j) = params.EI * acc1;
        raw(1, j) = params.GJ * acc2;
    }
    Eigen::Matrix4d M;
    M << 1, 0, 0, 0,
         0, params.mu, 0, -params.S_y,
         0, 0, 1, 0,
         0, -params.S_y, 0, params.I_y;
    const Eigen::Matrix2d Bd = Eigen::Vector2d(params.B1, params.B2).asDiagonal();
    return weights.R_mat.llt().solve(Bd * raw * M);
}

// ----------------------------------------------------------------------------
// Decay diagnostics: log-log slopes of the diagonal initial-iterate series vs
// the orders implied by the convergence theorems for power-law weights.
// ----------------------------------------------------------------------------
struct DecayEntry {
    std::string name;
    double slope = 0.0;           // fitted log-log slope
    double theorem_order = 0.0;   // exponent implied by the decay theorems
    bool steep_enough = false;    // slope <= theorem_order + 0.5
    bool summable = false;        // series of coefficients absolutely summable
};

struct DecayReport {
    std::vector<DecayEntry> entries;
    const DecayEntry& operator[](const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return e;
        throw ParameterError("DecayReport: no entry named " + name);
    }
};

namespace detail {
inline double loglog_slope(const std::vector<double>& idx, const std::vector<double>& vals) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (std::abs(vals[i]) <= 0.0) continue;
        const double lx = std::log(idx[i]);
        const double ly = std::log(std::abs(vals[i]));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++count;
    }
    if (count < 3)
        throw ParameterError("decay_diagnostics: not enough nonzero coefficients to fit");
    const double denom = count * sxx - sx * sx;
    return (count * sxy - sx * sy) / denom;
}
}  // namespace detail

// Fits the decay exponents of the per-mode coefficients over indices >= 2 and
// compares them with the theorem-implied orders at the stored (q, r) weights.
inline DecayReport decay_diagnostics(const ModalKernelIterate& it, const WeightSpec& weights) {
    const int N = it.N;
    if (N < 4) throw ParameterError("decay_diagnostics: need at least 4 modes");
    const double rb = weights.decay_r_bend;
    const double rt = weights.decay_r_twist;

    std::vector<double> n_idx, p11, p12, p22;
    for (int n = 2; n <= N; ++n) {
        const Eigen::Matrix2d b = it.bend_block(n, n);
        n_idx.push_back(n);
        p11.push_back(b(0, 0));
        p12.push_back(b(0, 1));
        p22.push_back(b(1, 1));
    }
    std::vector<double> m_idx, p33, p34, p44;
    for (int m = 2; m < N; ++m) {
        const Eigen::Matrix2d t = it.twist_block(m, m);
        m_idx.push_back(m);
        p33.push_back(t(0, 0));
        p34.push_back(t(0, 1));
        p44.push_back(t(1, 1));
    }

    DecayReport report;
    auto add = [&report](const std::string& name, const std::vector<double>& idx,
                         const std::vector<double>& vals, double order) {
        DecayEntry e;
        e.name = name;
        e.slope = detail::loglog_slope(idx, vals);
        e.theorem_order = order;
        e.steep_enough = e.slope <= order + 0.5;
        // summability needs a strictly faster-than-1/n tail; the boundary
        // order -1 is flagged as marginal/non-summable.
        e.summable = (order < -1.0) && (e.slope < -1.0);
        report.entries.push_back(e);
    };
    add("P12", n_idx, p12, -rb - 4.0);
    add("P22", n_idx, p22, -1.0 - rb / 2.0);
    add("P11", n_idx, p11, 3.0 - rb / 2.0);
    add("P34", m_idx, p34, -rt - 2.0);
    add("P44", m_idx, p44, -rt / 2.0);
    add("P33", m_idx, p33, 2.0 - rt / 2.0);
    return report;
}

}  // namespace flexwing
