#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "flexwing/modal.hpp"

using namespace flexwing;
using Catch::Approx;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Independent long-double bisection on tan x = tanh x, structured differently
// from the library solver.
long double root_oracle(int n) {
    long double lo = n * 3.14159265358979323846L;
    long double hi = (n + 0.5L) * 3.14159265358979323846L - 1e-15L;
    for (int it = 0; it < 300; ++it) {
        const long double mid = 0.5L * (lo + hi);
        const long double g = std::tan(mid) - std::tanh(mid);
        if (g < 0.0L)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5L * (lo + hi);
}
}  // namespace

TEST_CASE("bending roots match the reference table") {
    const auto modes = find_bending_roots(1.0, 4);
    REQUIRE(modes.size() == 4);
    const double expected[4] = {3.9266, 7.0686, 10.2102, 13.3518};
    for (int i = 0; i < 4; ++i)
        REQUIRE(std::abs(modes[static_cast<std::size_t>(i)].nu - expected[i]) < 5e-5);
}

TEST_CASE("zero is not a bending eigenvalue") {
    const auto modes = find_bending_roots(2.5, 6);
    for (const auto& m : modes) REQUIRE(m.nu * 2.5 > kPi);
    REQUIRE(find_bending_roots(1.0, 0).empty());
}

TEST_CASE("root 20 sits at the asymptote n pi + pi/4") {
    const auto modes = find_bending_roots(1.0, 20);
    const double x20 = modes[19].nu;
    REQUIRE(std::abs(x20 - (20.0 * kPi + kPi / 4.0)) < 1e-6);
    REQUIRE(std::abs(x20 - static_cast<double>(root_oracle(20))) < 1e-9);
}

TEST_CASE("overflow-safe residual changes sign across each bracket") {
    for (int n = 1; n <= 8; ++n) {
        const double lo = bending_root_residual(n * kPi);
        const double hi = bending_root_residual((n + 0.5) * kPi - 1e-9);
        REQUIRE(lo * hi < 0.0);
    }
}

TEST_CASE("asymptotic gap is one-signed, shrinking, and tiny beyond n = 5") {
    const auto modes = find_bending_roots(1.0, 12);
    double prev_gap = 1e9;
    for (int n = 1; n <= 3; ++n) {
        const double gap = (n * kPi + kPi / 4.0) - modes[static_cast<std::size_t>(n - 1)].nu;
        REQUIRE(gap > 0.0);
        REQUIRE(gap < prev_gap);
        prev_gap = gap;
    }
    for (int n = 5; n <= 12; ++n)
        REQUIRE(std::abs(modes[static_cast<std::size_t>(n - 1)].nu - (n * kPi + kPi / 4.0)) < 1e-4);
}

TEST_CASE("hyperbolic coefficient is bounded and decays") {
    const auto modes = find_bending_roots(1.0, 10);
    double prev = 1.0;
    for (const auto& m : modes) {
        REQUIRE(std::abs(m.d_coeff) <= 1.0);
        REQUIRE(std::abs(m.d_coeff) < prev + 1e-12);
        prev = std::abs(m.d_coeff);
    }
    REQUIRE(std::abs(modes[9].d_coeff) < 1e-10);
}

TEST_CASE("eval_phi boundary values and derivatives") {
    const auto modes = find_bending_roots(1.0, 6);
    for (const auto& m : modes) {
        REQUIRE(eval_phi(m, 0.0, 0) == Approx(0.0).margin(1e-14));
        // second/third derivatives vanish at the free end within root tolerance
        const double nu3 = std::pow(m.nu, 3);
        REQUIRE(std::abs(eval_phi(m, 1.0, 2)) < 1e-9 * m.nu * m.nu);
        REQUIRE(std::abs(eval_phi(m, 1.0, 3)) < 1e-9 * nu3);
        REQUIRE(eval_phi(m, 0.0, 1) == Approx(m.phi_prime_0).epsilon(1e-13));
    }
    // Phi_1'(0)/nu_1 = 1 + sin(nu L)/sinh(nu L) with the documented value
    const auto& m1 = modes[0];
    const long double x = static_cast<long double>(m1.nu);
    const long double d_ld = std::sin(x) / std::sinh(x);
    REQUIRE(m1.d_coeff == Approx(static_cast<double>(d_ld)).epsilon(1e-12));
    REQUIRE(1.0 + m1.d_coeff == Approx(1.0 - 0.02787).margin(2e-5));

    REQUIRE_THROWS_AS(eval_phi(m1, -0.1, 0), std::domain_error);
    REQUIRE_THROWS_AS(eval_phi(m1, 1.1, 0), std::domain_error);
}

TEST_CASE("eval_phi stays finite for nu L up to 300") {
    const auto modes = find_bending_roots(1.0, 95);
    REQUIRE(modes.back().nu > 300.0);
    for (const auto& m : {modes[50], modes.back()}) {
        for (int d = 0; d <= 3; ++d) {
            for (double y : {0.0, 0.3, 0.777, 1.0}) {
                const double v = eval_phi(m, y, d);
                REQUIRE(std::isfinite(v));
            }
        }
    }
    // interior magnitude stays O(1) for the displacement itself
    REQUIRE(std::abs(eval_phi(modes.back(), 0.5, 0)) < 3.0);
}

TEST_CASE("eval_theta basics") {
    for (double y : {0.0, 0.25, 1.0})
        REQUIRE(eval_theta(0, 1.0, y, 0) == Approx(1.0));
    for (int m = 0; m < 6; ++m) {
        REQUIRE(eval_theta(m, 1.0, 0.0, 0) == Approx(1.0));
        REQUIRE(eval_theta(m, 1.0, 0.0, 1) == Approx(0.0).margin(1e-12));
        REQUIRE(std::abs(eval_theta(m, 1.0, 1.0, 1)) < 1e-9 * (m + 1));
    }
}

TEST_CASE("quadrature reproduces analytic inner products") {
    BeamParameters params;
    const ModalBasis basis = build_basis(params, 6);

    auto theta = [&](int m) { return [m, &basis](double y) { return basis.eval(basis.N + m, y); }; };
    auto phi = [&](int n) { return [n, &basis](double y) { return basis.eval(n, y); }; };

    REQUIRE(std::abs(inner_product(theta(1), theta(2), basis)) < 1e-10);
    REQUIRE(inner_product(theta(0), theta(0), basis) == Approx(1.0).epsilon(1e-12));

    // <Phi_1, Phi_2> against a dense trapezoid oracle
    const double quad = inner_product(phi(0), phi(1), basis);
    double trap = 0.0;
    const int M = 100000;
    for (int i = 0; i <= M; ++i) {
        const double y = static_cast<double>(i) / M;
        const double v = basis.eval(0, y) * basis.eval(1, y);
        trap += (i == 0 || i == M) ? 0.5 * v : v;
    }
    trap /= M;
    REQUIRE(std::abs(quad) < 1e-10);
    REQUIRE(std::abs(quad - trap) < 1e-8);
}

TEST_CASE("Gram matrix structure") {
    BeamParameters params;
    params.L = 2.0;
    const ModalBasis basis = build_basis(params, 8);
    const int N = basis.N;

    for (int k = 0; k < 2 * N; ++k)
        REQUIRE(basis.gram(k, k) == Approx(basis.norm_sq[k]).epsilon(1e-10));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (i == j) continue;
            REQUIRE(std::abs(basis.gram(i, j)) < 1e-10);              // Phi family
            REQUIRE(std::abs(basis.gram(N + i, N + j)) < 1e-10);      // Theta family
        }
    // cross-family entries are generally nonzero
    REQUIRE(basis.gram.block(0, N, N, N).cwiseAbs().maxCoeff() > 1e-3);

    REQUIRE(basis.gram_positive);
    REQUIRE(basis.gram_condition < 1e8);
    REQUIRE(basis.gram_condition >= 1.0);
}

TEST_CASE("projection recovers basis members and is linear") {
    BeamParameters params;
    const ModalBasis basis = build_basis(params, 6);
    const int N = basis.N;

    auto c1 = project([&](double y) { return basis.eval(1, y); }, basis);  // Phi_2
    for (int k = 0; k < 2 * N; ++k)
        REQUIRE(std::abs(c1[k] - (k == 1 ? 1.0 : 0.0)) < 1e-8);

    auto c2 = project([&](double y) { return basis.eval(N, y) + 2.0 * basis.eval(N + 3, y); },
                      basis);  // Theta_0 + 2 Theta_3
    for (int k = 0; k < 2 * N; ++k) {
        const double want = (k == N) ? 1.0 : (k == N + 3 ? 2.0 : 0.0);
        REQUIRE(std::abs(c2[k] - want) < 1e-8);
    }
}

TEST_CASE("projection of a ramp improves with N") {
    BeamParameters params;
    auto l2_err = [&](int N) {
        const ModalBasis basis = build_basis(params, N);
        const auto c = project([](double y) { return y; }, basis);
        double err = 0.0;
        const int M = 4000;
        for (int i = 0; i <= M; ++i) {
            const double y = static_cast<double>(i) / M;
            double rec = 0.0;
            for (int k = 0; k < 2 * N; ++k) rec += c[k] * basis.eval(k, y);
            const double d = (y - rec) * (y - rec);
            err += (i == 0 || i == M) ? 0.5 * d : d;
        }
        return std::sqrt(err / M);
    };
    const double e4 = l2_err(4);
    const double e8 = l2_err(8);
    REQUIRE(e8 < e4);
}

TEST_CASE("projection refuses an ill-conditioned basis") {
    BeamParameters params;
    ModalBasis basis = build_basis(params, 4);
    basis.gram_condition = 1e9;
    REQUIRE_THROWS_AS(project([](double y) { return y; }, basis), IllConditionedBasisError);
}
