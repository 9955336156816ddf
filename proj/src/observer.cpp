#include "gpebo/observer.hpp"

#include <cmath>

namespace gpebo {

GainSpec GainSpec::scalar(double gamma, Eigen::Index n) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw PreconditionError("gain must be > 0");
    return GainSpec(gamma * Matrix::Identity(n, n), (1.0 / gamma) * Matrix::Identity(n, n));
}

GainSpec GainSpec::from_matrix(const Matrix& Gamma) {
    if (Gamma.rows() != Gamma.cols() || Gamma.rows() == 0) throw DimensionError("gain must be square");
    if (!Gamma.allFinite()) throw PreconditionError("gain must be finite");
    const double scale = std::max(1.0, Gamma.cwiseAbs().maxCoeff());
    if ((Gamma - Gamma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw PreconditionError("gain must be symmetric");
    }
    Eigen::LLT<Matrix> llt(Gamma);
    if (llt.info() != Eigen::Success) throw PreconditionError("gain must be positive definite");
    Matrix inverse = llt.solve(Matrix::Identity(Gamma.rows(), Gamma.cols()));
    return GainSpec(Gamma, std::move(inverse));
}

RegressionSample build_regression(double t, const NamedScenario& scenario, const DelayedHistories& hist,
                                  const std::optional<CurrentValues>& current) {
    const double tau = eval_delay(scenario.delay, t);
    const Matrix C = eval_system(scenario.system, tau).C;

    Vector x, xi;
    Matrix phi;
    if (current && !(tau <= hist.phi.latest_time())) {
        x = current->x;
        xi = current->xi;
        phi = current->phi;
    } else {
        x = hist.x.sample_vector(tau);
        xi = hist.xi.sample_vector(tau);
        phi = hist.phi.sample(tau);
    }

    const Vector y = C * x;
    return RegressionSample{t, (C * phi).transpose(), C * xi - y};
}

Vector gradient_update(const RegressionSample& sample, const Vector& theta_hat, const GainSpec& gain) {
    const Vector residual = sample.y_reg - sample.psi.transpose() * theta_hat;
    return gain.matrix() * (sample.psi * residual);
}

Vector reconstruct(const Vector& xi, const Matrix& phi, const Vector& theta_hat) {
    return xi - phi * theta_hat;
}

}  // namespace gpebo
