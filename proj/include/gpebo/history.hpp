#pragma once

#include "gpebo/types.hpp"

#include <cstddef>
#include <vector>

namespace gpebo {

/**
 * @brief Append-only record of a fixed-shape matrix (or column vector) signal.
 *
 * Samples are stored contiguously in column-major order. Lookups between
 * nodes interpolate linearly; lookups at a node return the stored value
 * bit-exactly.
 */
class TrajectoryHistory {
   public:
    TrajectoryHistory() = default;
    TrajectoryHistory(Eigen::Index rows, Eigen::Index cols);

    /// Requires t > latest_time() (any t when empty) and a matching shape.
    void append(double t, const Matrix& value);

    /// Throws RangeError outside [start_time(), latest_time()].
    Matrix sample(double t) const;
    /// sample() for column-vector histories.
    Vector sample_vector(double t) const;

    Matrix at(std::size_t index) const;
    double time(std::size_t index) const { return times_[index]; }
    const std::vector<double>& times() const { return times_; }

    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    double start_time() const;
    double latest_time() const;
    bool covers(double t) const { return !empty() && t >= times_.front() && t <= times_.back(); }

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

    void reserve(std::size_t samples);

   private:
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::vector<double> times_;
    std::vector<double> data_;
};

}  // namespace gpebo
