#include "gpebo/drem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gpebo {

void DremConfig::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw PreconditionError("DREM gain must be > 0");
    double previous = 0.0;
    for (double d : ext_delays) {
        if (!(d > previous) || !std::isfinite(d)) {
            throw PreconditionError("DREM extension delays must be positive and strictly increasing");
        }
        previous = d;
    }
}

void RegressionHistory::append(const RegressionSample& sample) {
    if (sample.psi.rows() != n_ || sample.psi.cols() != 1 || sample.y_reg.size() != 1) {
        throw DimensionError("DREM regression history holds q = 1 samples of dimension " + std::to_string(n_));
    }
    Vector packed(n_ + 1);
    packed.head(n_) = sample.psi.col(0);
    packed(n_) = sample.y_reg(0);
    store_.append(sample.t, packed);
}

RegressionSample RegressionHistory::sample(double t) const {
    const Vector packed = store_.sample_vector(t);
    return RegressionSample{t, packed.head(n_), packed.tail(1)};
}

ExtendedRegressor extend_regressor(double t, const DremConfig& cfg, const RegressionSample& current,
                                   const RegressionHistory& history) {
    const auto n = history.dimension();
    if (static_cast<Eigen::Index>(cfg.ext_delays.size()) != n - 1) {
        throw DimensionError("DREM needs n - 1 = " + std::to_string(n - 1) + " extension delays");
    }
    if (current.psi.rows() != n || current.psi.cols() != 1 || current.y_reg.size() != 1) {
        throw DimensionError("DREM requires a q = 1 regression of dimension " + std::to_string(n));
    }
    ExtendedRegressor ext{Matrix::Zero(n, n), Vector::Zero(n)};
    ext.M.row(0) = current.psi.col(0).transpose();
    ext.Y_stack(0) = current.y_reg(0);
    for (Eigen::Index i = 1; i < n; ++i) {
        double s = t - cfg.ext_delays[static_cast<std::size_t>(i - 1)];
        if (s < 0.0) continue;
        // Stage times are t_k + h in floating point; absorb the rounding when d == h.
        const double latest = history.latest_time();
        if (s > latest && s - latest <= 1e-12 * std::max(1.0, std::abs(s))) s = latest;
        const auto past = history.sample(s);
        ext.M.row(i) = past.psi.col(0).transpose();
        ext.Y_stack(i) = past.y_reg(0);
    }
    return ext;
}

ExtendedRegressor extend_regressor(double t, const DremConfig& cfg, const RegressionHistory& history) {
    return extend_regressor(t, cfg, history.sample(t), history);
}

namespace {

Matrix adjugate_closed_form(const Matrix& M) {
    const auto n = M.rows();
    Matrix adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1.0;
    } else if (n == 2) {
        adj << M(1, 1), -M(0, 1), -M(1, 0), M(0, 0);
    } else {
        // adj(M)(i, j) is the (j, i) cofactor.
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
                const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
                adj(i, j) = M(r0, c0) * M(r1, c1) - M(r0, c1) * M(r1, c0);
            }
        }
    }
    return adj;
}

Matrix adjugate_svd(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sigma = svd.singularValues();
    const auto n = M.rows();
    Vector cof(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) p *= sigma(j);
        }
        cof(i) = p;
    }
    const double sign = svd.matrixU().determinant() * svd.matrixV().determinant();
    return sign * svd.matrixV() * cof.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

Matrix adjugate(const Matrix& M) {
    if (M.rows() != M.cols() || M.rows() == 0) throw DimensionError("adjugate needs a non-empty square matrix");
    if (M.rows() <= 3) return adjugate_closed_form(M);
    return adjugate_lu(M);
}

Matrix adjugate_lu(const Matrix& M) {
    if (M.rows() != M.cols() || M.rows() == 0) throw DimensionError("adjugate needs a non-empty square matrix");
    if (M.rows() == 1) return Matrix::Ones(1, 1);
    Eigen::FullPivLU<Matrix> lu(M);
    if (lu.isInvertible() && lu.rcond() > 1e-8) return lu.determinant() * lu.inverse();
    return adjugate_svd(M);
}

MixedRegression mix(const Matrix& M, const Vector& Y_stack, double t) {
    if (M.rows() != Y_stack.size()) throw DimensionError("mix: regressor and regressand sizes differ");
    return MixedRegression{t, M.determinant(), adjugate(M) * Y_stack};
}

Vector drem_update(const MixedRegression& mr, const Vector& theta_hat, double gamma) {
    return gamma * mr.Delta * (mr.Y_mixed - mr.Delta * theta_hat);
}

}  // namespace gpebo
