#include "gpebo/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace gpebo {

namespace {

LtiOracle::Kind classify(const Matrix& A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw DimensionError("oracle needs a non-empty square matrix");
    if (A.isZero(0.0)) return LtiOracle::Kind::Zero;
    if (A.rows() == 2) {
        if ((A * A).isZero(0.0)) return LtiOracle::Kind::Nilpotent2;
        if (A(0, 0) == 0.0 && A(1, 1) == 0.0 && A(0, 1) == -A(1, 0)) return LtiOracle::Kind::Rotation2;
    }
    if (A.isDiagonal(0.0)) return LtiOracle::Kind::Diagonal;
    return LtiOracle::Kind::General;
}

}  // namespace

LtiOracle::LtiOracle(Matrix A) : A_(std::move(A)), kind_(classify(A_)) {}

Matrix LtiOracle::phi(double t) const {
    const auto n = A_.rows();
    switch (kind_) {
        case Kind::Zero: return Matrix::Identity(n, n);
        case Kind::Nilpotent2: return Matrix::Identity(n, n) + t * A_;
        case Kind::Diagonal: {
            Matrix out = Matrix::Zero(n, n);
            for (Eigen::Index i = 0; i < n; ++i) out(i, i) = std::exp(A_(i, i) * t);
            return out;
        }
        case Kind::Rotation2: {
            // A = [[0, w], [-w, 0]]
            const double w = A_(0, 1);
            const double c = std::cos(w * t), s = std::sin(w * t);
            Matrix out(2, 2);
            out << c, s, -s, c;
            return out;
        }
        case Kind::General: return expm(t * A_);
    }
    return expm(t * A_);
}

Matrix phi_closed_form(const LtiOracle& oracle, double t) { return oracle.phi(t); }

Matrix expm(const Matrix& M) {
    if (M.rows() != M.cols()) throw DimensionError("expm needs a square matrix");
    const auto n = M.rows();
    const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();

    // Scale so the series argument has norm <= 1/2; 20 terms then leave a
    // remainder below 0.5^21 / 21! ~ 1e-26.
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Matrix X = M / std::ldexp(1.0, squarings);

    Matrix term = Matrix::Identity(n, n);
    Matrix sum = term;
    for (int k = 1; k <= 20; ++k) {
        term = term * X / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

double liouville_det(const TrajectoryHistory& phi, const MatrixFn& A) {
    if (phi.empty()) return 0.0;
    double trace_integral = 0.0;
    double previous_trace = A(phi.time(0)).trace();
    double worst = std::abs(phi.at(0).determinant() - 1.0);
    for (std::size_t k = 1; k < phi.size(); ++k) {
        const double tr = A(phi.time(k)).trace();
        trace_integral += 0.5 * (phi.time(k) - phi.time(k - 1)) * (tr + previous_trace);
        previous_trace = tr;
        worst = std::max(worst, std::abs(phi.at(k).determinant() - std::exp(trace_integral)));
    }
    return worst;
}

}  // namespace gpebo
