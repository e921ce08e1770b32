#include <catch2/catch_amalgamated.hpp>

#include <cmath>

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

SimModel open_loop_beam(const ModalSystem& sys) {
    SimModel model;
    model.A = sys.A_mat;
    model.B = sys.B_mat;
    model.C = sys.C_meas;
    model.beam_N = sys.N;
    return model;
}

}  // namespace

TEST_CASE("zero initial state stays identically zero") {
    const BeamParameters p = example16_params();
    const ModalBasis basis = build_basis(p, 4);
    const ModalSystem sys = build_modal_system(p, basis);
    SimConfig cfg;
    cfg.t_final = 1.0;
    cfg.amplitude = 0.0;
    const SimulationTrace tr = integrate(open_loop_beam(sys), cfg, &basis);
    REQUIRE(tr.states.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(tr.controls.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(tr.w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("open-loop energy drift shows fourth-order convergence") {
    const BeamParameters p = example16_params();
    const ModalBasis basis = build_basis(p, 4);
    const ModalSystem sys = build_modal_system(p, basis);
    const double omega_max = spectral_radius(sys.A_mat);
    const double dt = 1e-3 * (2.0 * kGramConditionLimit > 0 ? 2.0 * 3.14159265358979323846 / omega_max
                                                            : 0.0);

    auto drift = [&](double step) {
        SimConfig cfg;
        cfg.dt = step;
        cfg.t_final = 1e4 * step;
        cfg.initial = "mixed";
        const SimulationTrace tr = integrate(open_loop_beam(sys), cfg);
        const double e0 = sys.energy(tr.states.row(0).transpose());
        double worst = 0.0;
        for (long k = 0; k < tr.states.rows(); k += 100) {
            const double e = sys.energy(tr.states.row(k).transpose());
            worst = std::max(worst, std::abs(e - e0) / std::abs(e0));
        }
        return worst;
    };

    const double d1 = drift(dt);
    const double d2 = drift(dt / 2.0);
    REQUIRE(d1 < 1e-6);
    REQUIRE(d1 / d2 >= 8.0);
}

TEST_CASE("global error scales as dt^4 on a single undamped mode") {
    BeamParameters p;  // decoupled
    const ModalBasis basis = build_basis(p, 1);
    const ModalSystem sys = build_modal_system(p, basis);
    const double omega = std::sqrt(-basis.bending[0].lambda * p.EI / p.mu);

    auto error_at_1 = [&](double dt) {
        SimConfig cfg;
        cfg.dt = dt;
        cfg.t_final = 1.0;
        cfg.initial = "mode1-bend";
        const SimulationTrace tr = integrate(open_loop_beam(sys), cfg);
        const long last = tr.states.rows() - 1;
        const double t = tr.times[last];
        const double exact_pos = std::cos(omega * t);
        const double exact_vel = -omega * std::sin(omega * t);
        const double e1 = tr.states(last, 0) - exact_pos;
        const double e2 = (tr.states(last, 1) - exact_vel) / omega;
        return std::sqrt(e1 * e1 + e2 * e2);
    };

    const double e1 = error_at_1(2e-3);
    const double e2 = error_at_1(1e-3);
    const double e3 = error_at_1(5e-4);
    REQUIRE(e1 / e2 == Approx(16.0).margin(8.0));
    REQUIRE(e2 / e3 == Approx(16.0).margin(8.0));
}

TEST_CASE("noise-free trace is homogeneous of degree one") {
    const BeamParameters p = example16_params();
    const ModalBasis basis = build_basis(p, 4);
    const ModalSystem sys = build_modal_system(p, basis);
    SimConfig cfg;
    cfg.t_final = 2.0;
    cfg.dt = 1e-3;
    const SimulationTrace a = integrate(open_loop_beam(sys), cfg);
    cfg.amplitude = 2.0;
    const SimulationTrace b = integrate(open_loop_beam(sys), cfg);
    REQUIRE((b.states - 2.0 * a.states).cwiseAbs().maxCoeff() <
            1e-12 * a.states.cwiseAbs().maxCoeff());
}

TEST_CASE("identical configuration reproduces bit-identical output") {
    RunConfig cfg = RunConfig::from_preset("example16");
    cfg.sim_t_final = 5.0;
    cfg.sim_dt = 0.01;
    const ScenarioResult a = run_scenario("example16-lqg", cfg);
    const ScenarioResult b = run_scenario("example16-lqg", cfg);
    REQUIRE(a.trace.states == b.trace.states);
    REQUIRE(a.trace.innovations == b.trace.innovations);

    CsvBuilder csv_a({"v"}), csv_b({"v"});
    for (long k = 0; k < a.trace.states.rows(); ++k) {
        csv_a.cell(a.trace.states(k, 0));
        csv_a.end_row();
        csv_b.cell(b.trace.states(k, 0));
        csv_b.end_row();
    }
    REQUIRE(csv_a.str() == csv_b.str());
}

TEST_CASE("divergence raises an error with the step index") {
    SimModel model;
    model.A = Eigen::MatrixXd::Zero(4, 4);
    model.A(0, 0) = 2.0;  // unstable
    model.B = Eigen::MatrixXd::Zero(4, 2);
    model.C = Eigen::MatrixXd::Zero(2, 4);
    model.beam_N = 1;
    SimConfig cfg;
    cfg.t_final = 30.0;
    cfg.dt = 0.01;
    cfg.initial = "mode1-bend";
    REQUIRE_THROWS_AS(integrate(model, cfg), DivergenceError);
}

TEST_CASE("step-size guard rejects unstable steps") {
    const BeamParameters p = example16_params();
    const ModalBasis basis = build_basis(p, 4);
    const ModalSystem sys = build_modal_system(p, basis);
    SimConfig cfg;
    cfg.t_final = 1.0;
    cfg.dt = 1.0;  // far above 0.1 / max |eig|
    REQUIRE_THROWS_AS(integrate(open_loop_beam(sys), cfg), ParameterError);
}

TEST_CASE("closed-loop decay follows the spectral abscissa") {
    RunConfig cfg = RunConfig::from_preset("example16");
    const ScenarioResult fs = run_scenario("example16-fullstate", cfg);
    const double slope = envelope_slope(fs.trace);
    const double alpha = fs.closed_loop_abscissa;
    REQUIRE(slope < 0.0);
    REQUIRE(std::abs(slope - alpha) <= 0.10 * std::abs(alpha));

    // terminal norm well below the initial one
    const double n0 = fs.trace.states.row(0).norm();
    const double nT = fs.trace.states.row(fs.trace.states.rows() - 1).norm();
    REQUIRE(nT < 1e-2 * n0);
}

TEST_CASE("wing run stabilizes the beam faster than the lag states") {
    RunConfig cfg = RunConfig::from_preset("wing32");
    const ScenarioResult res = run_scenario("wing32-fullstate", cfg);
    const long T = res.trace.states.rows();
    const long tail = (3 * T) / 4;

    auto block_ratio = [&](int offset, int width) {
        const Eigen::MatrixXd head = res.trace.states.block(0, offset, T / 4, width);
        const Eigen::MatrixXd back = res.trace.states.block(tail, offset, T - tail, width);
        const double early = std::sqrt(head.squaredNorm() / static_cast<double>(head.rows()));
        const double late = std::sqrt(back.squaredNorm() / static_cast<double>(back.rows()));
        return late / early;
    };
    const double beam_ratio = block_ratio(0, 16);
    const double aero_ratio = block_ratio(16, 16);
    REQUIRE(beam_ratio < 0.5 * aero_ratio);  // lag states decay markedly slower
}

TEST_CASE("unknown scenario name is rejected") {
    RunConfig cfg = RunConfig::from_preset("example16");
    REQUIRE_THROWS_AS(run_scenario("example16-bogus", cfg), ParameterError);
}
