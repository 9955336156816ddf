#pragma once

#include "gpebo/history.hpp"
#include "gpebo/observer.hpp"
#include "gpebo/types.hpp"

#include <vector>

namespace gpebo {

/**
 * @brief Dynamic regressor extension and mixing.
 *
 * The scalar regression y_reg = psi^T theta is stacked with delayed copies
 *
 *      M(t)       = [psi(t), psi(t - d_1), ..., psi(t - d_{n-1})]^T
 *      Y_stack(t) = [y_reg(t), y_reg(t - d_1), ..., y_reg(t - d_{n-1})]^T
 *
 * and multiplied by adj(M) so that each parameter obeys its own scalar
 * regression  adj(M) Y_stack = det(M) theta.
 */
struct DremConfig {
    std::vector<double> ext_delays;
    double gamma = 1.0;

    /// Throws PreconditionError unless delays are positive and strictly increasing and gamma > 0.
    void validate() const;
};

struct ExtendedRegressor {
    Matrix M;
    Vector Y_stack;
};

struct MixedRegression {
    double t = 0.0;
    double Delta = 0.0;
    Vector Y_mixed;
};

/// Stored scalar-output regression samples with linear interpolation between nodes.
class RegressionHistory {
   public:
    explicit RegressionHistory(Eigen::Index n) : n_(n), store_(n + 1, 1) {}

    /// Only q = 1 regressions are accepted.
    void append(const RegressionSample& sample);
    RegressionSample sample(double t) const;

    Eigen::Index dimension() const { return n_; }
    bool empty() const { return store_.empty(); }
    double latest_time() const { return store_.latest_time(); }
    const TrajectoryHistory& raw() const { return store_; }

   private:
    Eigen::Index n_;
    TrajectoryHistory store_;
};

/// Row 0 comes from `current`; row i samples the history at t - d_i, or is
/// zero when t - d_i < 0. Throws RangeError if t - d_i is past the history.
ExtendedRegressor extend_regressor(double t, const DremConfig& cfg, const RegressionSample& current,
                                   const RegressionHistory& history);
/// Same, with row 0 also taken from the history.
ExtendedRegressor extend_regressor(double t, const DremConfig& cfg, const RegressionHistory& history);

/// Classical adjugate. Closed-form cofactors for n <= 3, LU (SVD when near
/// singular) beyond. adj(M) M = det(M) I holds for singular M as well.
Matrix adjugate(const Matrix& M);
/// The LU / SVD route of adjugate() for any size.
Matrix adjugate_lu(const Matrix& M);

MixedRegression mix(const Matrix& M, const Vector& Y_stack, double t = 0.0);

/// Componentwise gamma * Delta * (Y_mixed_i - Delta * theta_hat_i).
Vector drem_update(const MixedRegression& mr, const Vector& theta_hat, double gamma);

}  // namespace gpebo
