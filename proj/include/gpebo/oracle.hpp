#pragma once

#include "gpebo/history.hpp"
#include "gpebo/model.hpp"
#include "gpebo/types.hpp"

namespace gpebo {

/// Closed-form transition matrices e^{At} for constant A, used as references
/// for the RK4 fundamental matrix.
class LtiOracle {
   public:
    enum class Kind { Zero, Nilpotent2, Diagonal, Rotation2, General };

    /// Classifies A into the most specific supported case.
    explicit LtiOracle(Matrix A);

    Kind kind() const { return kind_; }
    const Matrix& A() const { return A_; }

    /// e^{At}
    Matrix phi(double t) const;

   private:
    Matrix A_;
    Kind kind_;
};

Matrix phi_closed_form(const LtiOracle& oracle, double t);

/// e^{M} by scaling and squaring with a truncated Taylor series, accurate to
/// about 1e-12 relative for ||M|| up to 50.
Matrix expm(const Matrix& M);

/// max over the recorded grid of |det Phi(t) - exp(int_0^t trace A)|, with the
/// trace integral accumulated by the trapezoid rule on the same grid.
double liouville_det(const TrajectoryHistory& phi, const MatrixFn& A);

}  // namespace gpebo
