#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gpebo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a user-supplied function or argument has the wrong shape.
class DimensionError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a history lookup falls outside the stored time range.
class RangeError : public std::out_of_range {
   public:
    using std::out_of_range::out_of_range;
};

/// Raised when the coupled state becomes non-finite or exceeds the divergence threshold.
class DivergenceError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Raised when a documented precondition is violated (invalid gains, bad windows, ...).
class PreconditionError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace gpebo
