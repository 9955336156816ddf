#pragma once

#include "gpebo/history.hpp"
#include "gpebo/model.hpp"
#include "gpebo/types.hpp"

#include <optional>

namespace gpebo {

/**
 * @brief One sample of the linear regression  y_reg(t) = psi(t)^T theta.
 *
 *      psi(t)   = [C(phi(t)) Phi(phi(t))]^T            (n x q)
 *      y_reg(t) = C(phi(t)) xi(phi(t)) - y(t)           (q)
 *      y(t)     = C(phi(t)) x(phi(t))
 *
 * theta = xi(0) - x(0) is the constant initial error of the copy dynamics.
 */
struct RegressionSample {
    double t = 0.0;
    Matrix psi;
    Vector y_reg;
};

/// Symmetric positive definite adaptation gain.
class GainSpec {
   public:
    /// Throws PreconditionError unless gamma > 0.
    static GainSpec scalar(double gamma, Eigen::Index n);
    /// Throws PreconditionError unless Gamma is symmetric positive definite.
    static GainSpec from_matrix(const Matrix& Gamma);

    const Matrix& matrix() const { return gamma_; }
    const Matrix& inverse() const { return inverse_; }

   private:
    GainSpec(Matrix gamma, Matrix inverse) : gamma_(std::move(gamma)), inverse_(std::move(inverse)) {}
    Matrix gamma_;
    Matrix inverse_;
};

/// Read-only access to the recorded plant, copy and fundamental-matrix trajectories.
struct DelayedHistories {
    const TrajectoryHistory& x;
    const TrajectoryHistory& xi;
    const TrajectoryHistory& phi;
};

/// Values of x, xi and Phi at the instant being evaluated. Used when phi(t)
/// lies beyond the last recorded sample, which only happens inside an
/// integration step with a delay shorter than the step.
struct CurrentValues {
    const Vector& x;
    const Vector& xi;
    const Matrix& phi;
};

/// Synthesizes y(t) from the plant history and forms (psi, y_reg).
/// Throws RangeError if phi(t) is not covered and no current values are given.
RegressionSample build_regression(double t, const NamedScenario& scenario, const DelayedHistories& hist,
                                  const std::optional<CurrentValues>& current = std::nullopt);

/// Gradient estimator: Gamma psi (y_reg - psi^T theta_hat).
Vector gradient_update(const RegressionSample& sample, const Vector& theta_hat, const GainSpec& gain);

/// x_hat = xi - Phi theta_hat.
Vector reconstruct(const Vector& xi, const Matrix& phi, const Vector& theta_hat);

}  // namespace gpebo
