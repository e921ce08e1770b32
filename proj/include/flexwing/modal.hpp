#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "flexwing/beam.hpp"
#include "flexwing/errors.hpp"

namespace flexwing {

// ============================================================================
// Spectral bases of the beam model.
//
// Bending family: Phi_n(y) = sin(nu_n y) + d_n sinh(nu_n y), where nu_n L is
// the n-th positive root of tan(x) = tanh(x) and d_n = sin(nu_n L)/sinh(nu_n L).
// Torsion family: Theta_m(y) = cos(m pi y / L), m = 0, 1, 2, ...
// ============================================================================

struct BendingMode {
    int index = 0;           // n >= 1
    double nu = 0.0;         // spatial frequency, nu_n * L in [n pi, (n+1/2) pi)
    double lambda = 0.0;     // eigenvalue of -d^4/dy^4: lambda_n = -nu_n^4
    double d_coeff = 0.0;    // sin(nu L)/sinh(nu L)
    double phi_prime_0 = 0.0;  // Phi_n'(0) = nu_n (1 + d_n)
    double span = 0.0;       // L, carried for stable evaluation
};

struct TorsionMode {
    int index = 0;           // m >= 0
    double eta = 0.0;        // eigenvalue of d^2/dy^2: eta_m = -(m pi / L)^2
};

// Overflow-safe residual whose sign changes across each bending root:
// tanh(x) - tan(x), equivalent to the characteristic determinant up to a
// positive factor of cos(x) cosh(x) on each bracket interior.
inline double bending_root_residual(double x) {
    return std::tanh(x) - std::tan(x);
}

// Roots of tan(x) = tanh(x), one per interval [n pi, (n+1/2) pi). x = 0 is
// excluded: it carries no nonzero eigenfunction. Bisection is restricted to
// the sub-bracket where tan is continuous.
inline std::vector<BendingMode> find_bending_roots(double length, int count) {
    if (length <= 0.0) throw ParameterError("find_bending_roots: length must be positive");
    if (count < 0) throw ParameterError("find_bending_roots: count must be nonnegative");
    constexpr double kPi = 3.14159265358979323846;
    std::vector<BendingMode> modes;
    modes.reserve(static_cast<std::size_t>(count));
    for (int n = 1; n <= count; ++n) {
        double lo = n * kPi;
        double hi = (n + 0.5) * kPi - 1e-12;
        double flo = bending_root_residual(lo);
        double fhi = bending_root_residual(hi);
        if (!(flo > 0.0) || !(fhi < 0.0))
            throw SolverError("find_bending_roots: bracket [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "] does not straddle a root");
        int iter = 0;
        const int max_iter = 200;
        while (hi - lo > 1e-13 * hi) {
            if (++iter > max_iter)
                throw SolverError("find_bending_roots: bisection stalled on bracket [" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + "]");
            double mid = 0.5 * (lo + hi);
            if (bending_root_residual(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        const double x = 0.5 * (lo + hi);  // nu_n * L
        BendingMode mode;
        mode.index = n;
        mode.nu = x / length;
        mode.lambda = -std::pow(mode.nu, 4);
        // sin(x)/sinh(x); for large x switch to the 2 sin(x) e^{-x} form.
        mode.d_coeff = (x < 350.0) ? std::sin(x) / std::sinh(x)
                                   : 2.0 * std::sin(x) * std::exp(-x);
        mode.phi_prime_0 = mode.nu * (1.0 + mode.d_coeff);
        mode.span = length;
        modes.push_back(mode);
    }
    return modes;
}

// Derivative of Phi_n at y, order 0..3. Hyperbolic terms are evaluated in
// ratio form sinh(nu y)/sinh(nu L) = e^{nu(y-L)} (1-e^{-2 nu y})/(1-e^{-2 nu L})
// so no intermediate overflows for arbitrarily large nu L.
inline double eval_phi(const BendingMode& mode, double y, int deriv) {
    const double L = mode.span;
    if (y < 0.0 || y > L) throw std::domain_error("eval_phi: y outside [0, L]");
    if (deriv < 0 || deriv > 3) throw ParameterError("eval_phi: deriv must be 0..3");
    const double nu = mode.nu;
    const double x = nu * L;
    const double s = std::sin(x);
    const double t = std::exp(nu * (y - L));
    const double em2y = std::exp(-2.0 * nu * y);
    const double em2L = std::exp(-2.0 * x);
    const double denom = 1.0 - em2L;
    const double rs = t * (1.0 - em2y) / denom;  // sinh(nu y)/sinh(nu L)
    const double rc = t * (1.0 + em2y) / denom;  // cosh(nu y)/sinh(nu L)
    switch (deriv) {
        case 0: return std::sin(nu * y) + s * rs;
        case 1: return nu * (std::cos(nu * y) + s * rc);
        case 2: return nu * nu * (-std::sin(nu * y) + s * rs);
        default: return nu * nu * nu * (-std::cos(nu * y) + s * rc);
    }
}

// Derivative of Theta_m(y) = cos(m pi y / L), order 0..2.
inline double eval_theta(int m, double length, double y, int deriv) {
    if (y < 0.0 || y > length) throw std::domain_error("eval_theta: y outside [0, L]");
    if (m < 0) throw ParameterError("eval_theta: m must be nonnegative");
    if (deriv < 0 || deriv > 2) throw ParameterError("eval_theta: deriv must be 0..2");
    constexpr double kPi = 3.14159265358979323846;
    const double k = m * kPi / length;
    switch (deriv) {
        case 0: return std::cos(k * y);
        case 1: return -k * std::sin(k * y);
        default: return -k * k * std::cos(k * y);
    }
}

struct QuadratureTable {
    Eigen::VectorXd nodes;    // in [0, L]
    Eigen::VectorXd weights;
};

// Gauss-Legendre nodes/weights on [a, b] by Newton iteration on P_n.
inline QuadratureTable gauss_legendre(int order, double a, double b) {
    if (order < 1) throw ParameterError("gauss_legendre: order must be >= 1");
    constexpr double kPi = 3.14159265358979323846;
    QuadratureTable table;
    table.nodes.resize(order);
    table.weights.resize(order);
    const int half = (order + 1) / 2;
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    for (int i = 0; i < half; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < order; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = order * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        table.nodes[i] = xm - xl * z;
        table.nodes[order - 1 - i] = xm + xl * z;
        table.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        table.weights[order - 1 - i] = table.weights[i];
    }
    return table;
}

// ============================================================================
// ModalBasis: the first N bending modes plus the first N torsion modes, with
// quadrature and the 2N x 2N Gram matrix of the combined family. The combined
// family is conjectured (not proved) to be a Riesz basis; positivity and
// conditioning of the Gram matrix are checked numerically at the chosen N.
// ============================================================================
class ModalBasis {
public:
    BeamParameters params;
    std::vector<BendingMode> bending;   // n = 1..N
    std::vector<TorsionMode> torsion;   // m = 0..N-1
    QuadratureTable quadrature;
    Eigen::MatrixXd gram;               // order: Phi_1..Phi_N, Theta_0..Theta_{N-1}
    Eigen::VectorXd norm_sq;            // analytic L2 norms of the 2N members
    double gram_condition = 0.0;
    bool gram_positive = false;
    int N = 0;

    double span() const { return params.L; }
    int size() const { return 2 * N; }

    // k in [0, 2N): k < N is Phi_{k+1}, otherwise Theta_{k-N}.
    double eval(int k, double y, int deriv = 0) const {
        if (k < N) return eval_phi(bending[static_cast<std::size_t>(k)], y, deriv);
        return eval_theta(k - N, params.L, y, deriv);
    }

    template <class F, class G>
    double integrate_product(F&& f, G&& g) const {
        double acc = 0.0;
        for (int i = 0; i < quadrature.nodes.size(); ++i)
            acc += quadrature.weights[i] * f(quadrature.nodes[i]) * g(quadrature.nodes[i]);
        return acc;
    }
};

inline ModalBasis build_basis(const BeamParameters& params, int N) {
    params.validate();
    if (N < 1) throw ParameterError("build_basis: need at least one mode per family");
    ModalBasis basis;
    basis.params = params;
    basis.N = N;
    basis.bending = find_bending_roots(params.L, N);
    basis.torsion.reserve(static_cast<std::size_t>(N));
    constexpr double kPi = 3.14159265358979323846;
    for (int m = 0; m < N; ++m) {
        const double k = m * kPi / params.L;
        basis.torsion.push_back(TorsionMode{m, -k * k});
    }
    basis.quadrature = gauss_legendre(std::max(64, 8 * N), 0.0, params.L);

    const int q = static_cast<int>(basis.quadrature.nodes.size());
    Eigen::MatrixXd vals(2 * N, q);
    for (int k = 0; k < 2 * N; ++k)
        for (int i = 0; i < q; ++i)
            vals(k, i) = basis.eval(k, basis.quadrature.nodes[i]);
    basis.gram = vals * basis.quadrature.weights.asDiagonal() * vals.transpose();
    basis.gram = 0.5 * (basis.gram + basis.gram.transpose()).eval();

    basis.norm_sq.resize(2 * N);
    for (int n = 0; n < N; ++n) {
        const double d = basis.bending[static_cast<std::size_t>(n)].d_coeff;
        basis.norm_sq[n] = 0.5 * params.L * (1.0 - d * d);
    }
    basis.norm_sq[N] = params.L;
    for (int m = 1; m < N; ++m) basis.norm_sq[N + m] = 0.5 * params.L;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(basis.gram);
    const double emin = es.eigenvalues().minCoeff();
    const double emax = es.eigenvalues().maxCoeff();
    basis.gram_positive = emin > 0.0;
    basis.gram_condition = (emin > 0.0) ? emax / emin
                                        : std::numeric_limits<double>::infinity();
    return basis;
}

// Fixed-quadrature inner product over [0, L]. Deterministic for identical inputs.
template <class F, class G>
inline double inner_product(F&& f, G&& g, const ModalBasis& basis) {
    return basis.integrate_product(std::forward<F>(f), std::forward<G>(g));
}

constexpr double kGramConditionLimit = 1e8;

// L2-best coefficients of `field` in the combined basis: solves Gram c = b with
// b_i = <field, basis_i>. Fails loudly if the Gram matrix is too ill-conditioned
// to trust the projection.
template <class F>
inline Eigen::VectorXd project(F&& field, const ModalBasis& basis) {
    if (!basis.gram_positive || basis.gram_condition > kGramConditionLimit)
        throw IllConditionedBasisError(basis.gram_condition);
    Eigen::VectorXd b(basis.size());
    for (int k = 0; k < basis.size(); ++k) {
        b[k] = inner_product(field, [&](double y) { return basis.eval(k, y); }, basis);
    }
    return basis.gram.ldlt().solve(b);
}

}  // namespace flexwing
