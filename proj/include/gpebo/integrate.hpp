#pragma once

#include "gpebo/drem.hpp"
#include "gpebo/history.hpp"
#include "gpebo/model.hpp"
#include "gpebo/observer.hpp"
#include "gpebo/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace gpebo {

/// Plant state, observer copy, fundamental matrix and parameter estimate,
/// advanced together on one clock.
struct CoupledState {
    Vector x;
    Vector xi;
    Matrix phi;
    Vector theta_hat;

    bool all_finite() const;
    /// Largest absolute entry over all components.
    double max_abs() const;
};

CoupledState operator+(const CoupledState& a, const CoupledState& b);
CoupledState operator*(double s, const CoupledState& a);

/// Classical four-stage Runge-Kutta step for any state supporting `+` and scalar `*`.
template <class State, class Rhs>
State rk4_advance(Rhs&& f, double t, const State& y, double h) {
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
    const State k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
    const State k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Everything the right-hand side reads besides the current state.
struct SimulationContext {
    const NamedScenario& scenario;
    DelayedHistories hist;
    const GainSpec& gain;
    /// Set for the DREM estimator only.
    const DremConfig* drem = nullptr;
    const RegressionHistory* regressions = nullptr;
};

/// Time derivative of the coupled state. Delayed quantities come from the
/// histories; when phi(t) is past the last sample the stage values are used.
CoupledState rhs(double t, const CoupledState& s, const SimulationContext& ctx);

/// States beyond this magnitude abort the run.
inline constexpr double kDivergenceThreshold = 1e12;

/// Recorded run on the uniform grid {0, h, ..., N h}.
struct Trajectory {
    NamedScenario scenario;
    Vector theta;
    TrajectoryHistory x;
    TrajectoryHistory xi;
    TrajectoryHistory phi;
    TrajectoryHistory theta_hat;

    std::size_t size() const { return x.size(); }
    const std::vector<double>& times() const { return x.times(); }
    double time(std::size_t k) const { return x.time(k); }

    Vector x_at(std::size_t k) const { return x.at(k); }
    Vector xi_at(std::size_t k) const { return xi.at(k); }
    Matrix phi_at(std::size_t k) const { return phi.at(k); }
    Vector theta_hat_at(std::size_t k) const { return theta_hat.at(k); }
    Vector x_hat_at(std::size_t k) const;
    /// x - x_hat
    Vector error_at(std::size_t k) const;
    /// theta_hat - theta
    Vector theta_tilde_at(std::size_t k) const;
};

/**
 * @brief Fixed-step RK4 integration of plant, observer and estimator.
 *
 * Each accepted step appends to the x, xi and Phi histories (and to the
 * regression history for DREM); stage evaluations never touch them.
 */
class Simulator {
   public:
    /// Validates the scenario; throws PreconditionError / DimensionError.
    explicit Simulator(NamedScenario scenario);

    /// Advances one step of size h. Throws DivergenceError on non-finite or
    /// oversized states, leaving the simulator at the previous step.
    void step();
    /// Steps to the horizon and returns the recorded trajectory.
    Trajectory run() &&;

    double time() const { return time_; }
    std::size_t steps_taken() const { return steps_; }
    std::size_t total_steps() const { return total_steps_; }
    const CoupledState& state() const { return state_; }
    const NamedScenario& scenario() const { return scenario_; }
    const TrajectoryHistory& x_history() const { return hist_x_; }
    const TrajectoryHistory& xi_history() const { return hist_xi_; }
    const TrajectoryHistory& phi_history() const { return hist_phi_; }

   private:
    void record();

    NamedScenario scenario_;
    GainSpec gain_;
    std::optional<DremConfig> drem_;
    std::optional<RegressionHistory> regressions_;
    TrajectoryHistory hist_x_;
    TrajectoryHistory hist_xi_;
    TrajectoryHistory hist_phi_;
    TrajectoryHistory hist_theta_hat_;
    CoupledState state_;
    double time_ = 0.0;
    std::size_t steps_ = 0;
    std::size_t total_steps_ = 0;
};

/// Runs the scenario to its horizon.
Trajectory simulate(const NamedScenario& scenario);

}  // namespace gpebo
