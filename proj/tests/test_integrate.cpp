#include "doctest.h"
#include "gpebo/integrate.hpp"
#include "gpebo/oracle.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace gpebo;
using gpebo::testing::lti_scenario;

TEST_CASE("rk4_advance on x' = x matches the degree-4 Taylor polynomial") {
    const double h = 0.1;
    const double x1 = rk4_advance([](double, double x) { return x; }, 0.0, 1.0, h);
    // 1 + h + h^2/2 + h^3/6 + h^4/24
    CHECK(x1 == doctest::Approx(1.1051708333333333).epsilon(1e-15));
    // Local error against e^h is h^5/120 to leading order.
    CHECK(std::abs(x1 - std::exp(h)) < 1e-7);
    CHECK((std::exp(h) - x1) == doctest::Approx(std::pow(h, 5) / 120.0).epsilon(0.05));
}

TEST_CASE("rk4_advance leaves a zero-derivative state bit-exact") {
    const CoupledState s{Vector{{0.1, -3.7}}, Vector{{1e-300, 2.0}}, Matrix{{1.0, 0.3}, {0.2, 5.0}}, Vector{{7.0, 8.0}}};
    auto zero = [](double, const CoupledState& c) {
        return CoupledState{Vector::Zero(c.x.size()), Vector::Zero(c.xi.size()), Matrix::Zero(2, 2),
                            Vector::Zero(2)};
    };
    const auto next = rk4_advance(zero, 3.0, s, 0.01);
    CHECK(next.x == s.x);
    CHECK(next.xi == s.xi);
    CHECK(next.phi == s.phi);
    CHECK(next.theta_hat == s.theta_hat);
}

TEST_CASE("nilpotent A integrates exactly to I + A t") {
    Matrix A(2, 2);
    A << 0, 1, 0, 0;
    auto sc = lti_scenario(A, Matrix::Zero(1, 2), Vector::Zero(2), Vector::Zero(2), Vector::Zero(2), 1.0, 2.0, 1e-3);
    const auto tr = simulate(sc);
    CHECK(tr.size() == 2001);
    CHECK(tr.time(tr.size() - 1) == 2.0);
    const Matrix phi = tr.phi_at(tr.size() - 1);
    CHECK(phi(0, 0) == 1.0);
    CHECK(phi(1, 0) == 0.0);
    CHECK(phi(1, 1) == 1.0);
    CHECK(phi(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
}

namespace {

struct RhsFixture {
    NamedScenario scenario;
    TrajectoryHistory x, xi, phi;
    GainSpec gain;

    explicit RhsFixture(NamedScenario sc)
        : scenario(std::move(sc)),
          x(scenario.system.n, 1),
          xi(scenario.system.n, 1),
          phi(scenario.system.n, scenario.system.n),
          gain(GainSpec::scalar(scenario.gamma, scenario.system.n)) {
        x.append(0.0, scenario.system.x0);
        xi.append(0.0, scenario.xi0);
        phi.append(0.0, Matrix::Identity(scenario.system.n, scenario.system.n));
    }

    CoupledState initial() const {
        const auto n = scenario.system.n;
        return CoupledState{scenario.system.x0, scenario.xi0, Matrix::Identity(n, n), scenario.theta_hat0};
    }

    CoupledState eval(double t, const CoupledState& s) const {
        return rhs(t, s, SimulationContext{scenario, {x, xi, phi}, gain});
    }
};

}  // namespace

TEST_CASE("rhs of a zero system with a silent output is zero") {
    auto sc = lti_scenario(Matrix::Zero(2, 2), Matrix::Zero(1, 2), Vector{{1.0, 2.0}}, Vector{{3.0, 4.0}},
                           Vector{{5.0, 6.0}}, 1.0, 1.0, 1e-3);
    const RhsFixture fx(sc);
    const auto d = fx.eval(0.0, fx.initial());
    CHECK(d.x.isZero(0.0));
    CHECK(d.xi.isZero(0.0));
    CHECK(d.phi.isZero(0.0));
    CHECK(d.theta_hat.isZero(0.0));
}

TEST_CASE("rhs of the example plant at t = 0") {
    const RhsFixture fx(builtin_scenario(ScenarioId::C1, 1.0, EstimatorKind::Gradient));
    const auto d = fx.eval(0.0, fx.initial());
    // A(0) x = [x2, 0] and u(0) = sin 0 = 0.
    CHECK(d.x(0) == -1.0);
    CHECK(d.x(1) == 0.0);
}

TEST_CASE("rhs with theta_hat equal to theta leaves the estimate still") {
    auto sc = builtin_scenario(ScenarioId::C2, 10.0, EstimatorKind::Gradient);
    sc.theta_hat0 = sc.theta();
    const RhsFixture fx(sc);
    for (double t : {0.0, 0.0005, 0.001}) {
        const auto d = fx.eval(t, fx.initial());
        CHECK(d.theta_hat.isZero(0.0));
    }
}

TEST_CASE("frozen estimator: error equals Phi theta_tilde(0)") {
    // No output information, so the estimate never moves.
    auto sc = builtin_scenario(ScenarioId::C1, 1.0, EstimatorKind::Gradient);
    sc.system.C = [](double) { return Matrix::Zero(1, 2); };
    sc.theta_hat0 = Vector{{0.25, 0.5}};
    sc.horizon = 10.0;
    const auto tr = simulate(sc);
    const Vector tilde0 = sc.theta_hat0 - sc.theta();
    for (std::size_t k = 0; k < tr.size(); k += 97) {
        REQUIRE(tr.theta_hat_at(k) == sc.theta_hat0);
        const Vector expected = tr.phi_at(k) * tilde0;
        REQUIRE((tr.error_at(k) - expected).norm() <= 1e-12 * (1.0 + tr.x_at(k).norm()));
    }
}

TEST_CASE("open-loop emulator: Hurwitz A drives the error to zero without measurements") {
    const Vector x0{{2.0, -1.0}}, xi0{{0.0, 0.0}}, th0{{1.0, 1.0}};
    auto sc = lti_scenario(-Matrix::Identity(2, 2), Matrix::Zero(1, 2), x0, xi0, th0, 10.0, 15.0, 1e-3);
    const auto tr = simulate(sc);
    const double e0 = (th0 - (xi0 - x0)).norm();
    for (std::size_t k = 0; k < tr.size(); k += 53) {
        REQUIRE(tr.error_at(k).norm() == doctest::Approx(std::exp(-tr.time(k)) * e0).epsilon(1e-9));
    }
    CHECK(tr.error_at(tr.size() - 1).norm() < 1e-6);
}

TEST_CASE("simulated trajectories satisfy Liouville and the reconstruction identity") {
    for (auto id : {ScenarioId::C1, ScenarioId::C2, ScenarioId::C3}) {
        CAPTURE(to_string(id));
        const auto tr = simulate(builtin_scenario(id, 10.0, EstimatorKind::Gradient));
        CHECK(liouville_det(tr.phi, tr.scenario.system.A) <= 1e-6);
        for (std::size_t k = 0; k < tr.size(); k += 11) {
            const Vector rebuilt = tr.xi_at(k) - tr.phi_at(k) * tr.theta;
            REQUIRE((tr.x_at(k) - rebuilt).norm() <= 1e-8 * (1.0 + tr.x_at(k).norm()));
            // x_hat - x = -Phi theta_tilde
            const Vector factor = tr.x_hat_at(k) - tr.x_at(k) + tr.phi_at(k) * tr.theta_tilde_at(k);
            REQUIRE(factor.norm() <= 1e-6 * (1.0 + tr.x_at(k).norm()));
        }
    }
}

TEST_CASE("grid halving shows fourth-order convergence against the diagonal oracle") {
    Matrix A(2, 2);
    A << -0.5, 0, 0, 0.3;
    const LtiOracle oracle(A);
    double previous = 0.0;
    for (double h : {0.2, 0.1, 0.05, 0.025, 0.02}) {
        auto sc = lti_scenario(A, Matrix::Zero(1, 2), Vector::Zero(2), Vector::Zero(2), Vector::Zero(2), 1.0, 10.0, h);
        const auto tr = simulate(sc);
        const double err = (tr.phi_at(tr.size() - 1) - oracle.phi(10.0)).cwiseAbs().maxCoeff();
        if (previous > 0.0 && h != 0.02) CHECK(previous / err == doctest::Approx(16.0).epsilon(0.1));
        previous = err;
    }
}

TEST_CASE("runs are deterministic") {
    for (auto kind : {EstimatorKind::Gradient, EstimatorKind::Drem}) {
        auto sc = builtin_scenario(ScenarioId::C3, 10.0, kind);
        sc.horizon = 5.0;
        const auto a = simulate(sc);
        const auto b = simulate(sc);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            REQUIRE(a.time(k) == b.time(k));
            REQUIRE(a.x_at(k) == b.x_at(k));
            REQUIRE(a.phi_at(k) == b.phi_at(k));
            REQUIRE(a.theta_hat_at(k) == b.theta_hat_at(k));
        }
    }
}

TEST_CASE("the grid is {0, h, ..., Tf}") {
    auto sc = builtin_scenario(ScenarioId::C2, 1.0, EstimatorKind::Gradient);
    sc.horizon = 1.0;
    sc.step = 0.01;
    const auto tr = simulate(sc);
    REQUIRE(tr.size() == 101);
    for (std::size_t k = 0; k < tr.size(); ++k) CHECK(tr.time(k) == static_cast<double>(k) * 0.01);
}

TEST_CASE("divergence guard aborts with a diagnostic") {
    auto sc = lti_scenario(Matrix::Constant(1, 1, 50.0), Matrix::Zero(1, 1), Vector::Ones(1), Vector::Zero(1),
                           Vector::Zero(1), 1.0, 10.0, 1e-3);
    CHECK_THROWS_AS(simulate(sc), DivergenceError);

    Simulator sim(sc);
    sim.step();
    CHECK(sim.steps_taken() == 1);
    CHECK(sim.time() == 1e-3);
}

TEST_CASE("simulator rejects invalid scenarios up front") {
    auto sc = builtin_scenario(ScenarioId::C1, 1.0, EstimatorKind::Gradient);
    sc.step = 0.0;
    CHECK_THROWS_AS(Simulator{sc}, PreconditionError);

    sc = builtin_scenario(ScenarioId::C1, 1.0, EstimatorKind::Drem);
    sc.drem_delays = {};
    CHECK_THROWS_AS(Simulator{sc}, PreconditionError);
    sc.drem_delays = {1e-4};
    CHECK_THROWS_AS(Simulator{sc}, PreconditionError);

    sc = builtin_scenario(ScenarioId::C1, 1.0, EstimatorKind::Gradient);
    sc.system.A = [](double) { return Matrix::Zero(3, 3); };
    CHECK_THROWS_AS(Simulator{sc}, DimensionError);
}
