#include "gpebo/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace gpebo {

bool CoupledState::all_finite() const {
    return x.allFinite() && xi.allFinite() && phi.allFinite() && theta_hat.allFinite();
}

double CoupledState::max_abs() const {
    double m = 0.0;
    if (x.size()) m = std::max(m, x.cwiseAbs().maxCoeff());
    if (xi.size()) m = std::max(m, xi.cwiseAbs().maxCoeff());
    if (phi.size()) m = std::max(m, phi.cwiseAbs().maxCoeff());
    if (theta_hat.size()) m = std::max(m, theta_hat.cwiseAbs().maxCoeff());
    return m;
}

CoupledState operator+(const CoupledState& a, const CoupledState& b) {
    return CoupledState{a.x + b.x, a.xi + b.xi, a.phi + b.phi, a.theta_hat + b.theta_hat};
}

CoupledState operator*(double s, const CoupledState& a) {
    return CoupledState{s * a.x, s * a.xi, s * a.phi, s * a.theta_hat};
}

CoupledState rhs(double t, const CoupledState& s, const SimulationContext& ctx) {
    const auto sys = eval_system(ctx.scenario.system, t);
    const Vector Bu = sys.B * sys.u;

    CoupledState d;
    d.x = sys.A * s.x + Bu;
    d.xi = sys.A * s.xi + Bu;
    d.phi = sys.A * s.phi;

    const auto reg = build_regression(t, ctx.scenario, ctx.hist, CurrentValues{s.x, s.xi, s.phi});
    if (ctx.drem != nullptr) {
        const auto ext = extend_regressor(t, *ctx.drem, reg, *ctx.regressions);
        d.theta_hat = drem_update(mix(ext.M, ext.Y_stack, t), s.theta_hat, ctx.drem->gamma);
    } else {
        d.theta_hat = gradient_update(reg, s.theta_hat, ctx.gain);
    }
    return d;
}

Vector Trajectory::x_hat_at(std::size_t k) const {
    return reconstruct(xi_at(k), phi_at(k), theta_hat_at(k));
}

Vector Trajectory::error_at(std::size_t k) const { return x_at(k) - x_hat_at(k); }

Vector Trajectory::theta_tilde_at(std::size_t k) const { return theta_hat_at(k) - theta; }

namespace {

GainSpec make_gain(const NamedScenario& sc) {
    validate(sc);
    return sc.gain ? GainSpec::from_matrix(*sc.gain) : GainSpec::scalar(sc.gamma, sc.system.n);
}

}  // namespace

Simulator::Simulator(NamedScenario scenario)
    : scenario_(std::move(scenario)),
      gain_(make_gain(scenario_)),
      hist_x_(scenario_.system.n, 1),
      hist_xi_(scenario_.system.n, 1),
      hist_phi_(scenario_.system.n, scenario_.system.n),
      hist_theta_hat_(scenario_.system.n, 1) {
    const auto n = scenario_.system.n;
    const double ratio = scenario_.horizon / scenario_.step;
    total_steps_ = static_cast<std::size_t>(std::llround(ratio));
    if (total_steps_ == 0) throw PreconditionError("horizon shorter than one step");

    if (scenario_.estimator == EstimatorKind::Drem) {
        if (scenario_.system.q != 1) throw PreconditionError("DREM estimator requires a scalar output");
        drem_ = DremConfig{scenario_.drem_delays, scenario_.gamma};
        drem_->validate();
        if (static_cast<int>(drem_->ext_delays.size()) != n - 1) {
            throw PreconditionError("DREM needs n - 1 = " + std::to_string(n - 1) + " extension delays");
        }
        if (!drem_->ext_delays.empty() && drem_->ext_delays.front() < scenario_.step) {
            throw PreconditionError("DREM extension delays must be at least one integration step");
        }
        regressions_.emplace(n);
    }

    const auto reserve = total_steps_ + 1;
    hist_x_.reserve(reserve);
    hist_xi_.reserve(reserve);
    hist_phi_.reserve(reserve);
    hist_theta_hat_.reserve(reserve);

    state_ = CoupledState{scenario_.system.x0, scenario_.xi0, Matrix::Identity(n, n), scenario_.theta_hat0};
    (void)eval_system(scenario_.system, 0.0);
    record();
}

void Simulator::record() {
    hist_x_.append(time_, state_.x);
    hist_xi_.append(time_, state_.xi);
    hist_phi_.append(time_, state_.phi);
    hist_theta_hat_.append(time_, state_.theta_hat);
    if (regressions_) {
        regressions_->append(build_regression(time_, scenario_, {hist_x_, hist_xi_, hist_phi_}));
    }
}

void Simulator::step() {
    const SimulationContext ctx{scenario_,
                                {hist_x_, hist_xi_, hist_phi_},
                                gain_,
                                drem_ ? &*drem_ : nullptr,
                                regressions_ ? &*regressions_ : nullptr};
    const double h = scenario_.step;
    auto f = [&ctx](double t, const CoupledState& s) { return rhs(t, s, ctx); };
    CoupledState next = rk4_advance(f, time_, state_, h);

    const double t_next = static_cast<double>(steps_ + 1) * h;
    if (!next.all_finite() || next.max_abs() > kDivergenceThreshold) {
        throw DivergenceError("state diverged at t=" + std::to_string(t_next) + " (max |entry| " +
                              std::to_string(next.max_abs()) + ")");
    }
    state_ = std::move(next);
    time_ = t_next;
    ++steps_;
    record();
}

Trajectory Simulator::run() && {
    while (steps_ < total_steps_) step();
    Vector theta = scenario_.theta();
    return Trajectory{std::move(scenario_),   std::move(theta),  std::move(hist_x_),
                      std::move(hist_xi_),    std::move(hist_phi_), std::move(hist_theta_hat_)};
}

Trajectory simulate(const NamedScenario& scenario) { return Simulator(scenario).run(); }

}  // namespace gpebo
