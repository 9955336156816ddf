#include "gpebo/history.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gpebo {

TrajectoryHistory::TrajectoryHistory(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) throw DimensionError("history shape must be positive");
}

void TrajectoryHistory::append(double t, const Matrix& value) {
    if (rows_ == 0 && cols_ == 0) {
        rows_ = value.rows();
        cols_ = value.cols();
    }
    if (value.rows() != rows_ || value.cols() != cols_) {
        throw DimensionError("history value is " + std::to_string(value.rows()) + "x" +
                             std::to_string(value.cols()) + ", expected " + std::to_string(rows_) + "x" +
                             std::to_string(cols_));
    }
    if (!std::isfinite(t)) throw PreconditionError("history timestamp must be finite");
    if (!times_.empty() && !(t > times_.back())) {
        throw PreconditionError("non-monotone history timestamp " + std::to_string(t) + " after " +
                                std::to_string(times_.back()));
    }
    times_.push_back(t);
    data_.insert(data_.end(), value.data(), value.data() + value.size());
}

Matrix TrajectoryHistory::at(std::size_t index) const {
    const auto stride = static_cast<std::size_t>(rows_ * cols_);
    return Eigen::Map<const Matrix>(data_.data() + index * stride, rows_, cols_);
}

Matrix TrajectoryHistory::sample(double t) const {
    if (!covers(t)) {
        throw RangeError("history lookup at t=" + std::to_string(t) + " outside [" +
                         (empty() ? std::string("empty") :
                                    std::to_string(times_.front()) + ", " + std::to_string(times_.back())) +
                         "]");
    }
    // First node strictly after t; t == back() lands on the last node.
    const auto upper = std::upper_bound(times_.begin(), times_.end(), t);
    const auto hi = static_cast<std::size_t>(upper - times_.begin());
    const std::size_t lo = hi - 1;
    if (times_[lo] == t || hi == times_.size()) return at(lo);
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    const Matrix a = at(lo);
    return a + w * (at(hi) - a);
}

Vector TrajectoryHistory::sample_vector(double t) const {
    if (cols_ != 1) throw DimensionError("sample_vector on a matrix-valued history");
    return sample(t);
}

double TrajectoryHistory::start_time() const {
    if (empty()) throw RangeError("empty history");
    return times_.front();
}

double TrajectoryHistory::latest_time() const {
    if (empty()) throw RangeError("empty history");
    return times_.back();
}

void TrajectoryHistory::reserve(std::size_t samples) {
    times_.reserve(samples);
    data_.reserve(samples * static_cast<std::size_t>(std::max<Eigen::Index>(rows_ * cols_, 1)));
}

}  // namespace gpebo
