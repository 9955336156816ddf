#pragma once

#include "gpebo/history.hpp"
#include "gpebo/integrate.hpp"
#include "gpebo/model.hpp"
#include "gpebo/types.hpp"

#include <vector>

namespace gpebo {

/// Recorded fundamental matrix plus the output map C(t) it is observed through.
struct ExcitationSource {
    const TrajectoryHistory* phi = nullptr;
    MatrixFn C;
};

ExcitationSource excitation_source(const Trajectory& traj);

/// Both sliding-window integrals over one window.
struct PeIntegrals {
    /// int C Phi Phi^T C^T ds  (q x q)
    Matrix output_form;
    /// int Phi^T C^T C Phi ds  (n x n)
    Matrix regressor_form;
};

/**
 * @brief Sliding-window persistency-of-excitation profile.
 *
 * For each window start t on the sweep grid, the smallest eigenvalue of both
 * integrals over [t, t + window]. delta_* is the infimum over the sweep and
 * pe_* whether it exceeds delta_floor.
 */
struct ExcitationReport {
    double window = 0.0;
    double stride = 0.0;
    double delta_floor = 0.0;
    std::vector<double> starts;
    std::vector<double> min_eig_output;
    std::vector<double> min_eig_regressor;
    double delta_output = 0.0;
    double delta_regressor = 0.0;
    bool pe_output = false;
    bool pe_regressor = false;
};

/// Trapezoid rule on the stored grid (window ends are interpolated when they
/// fall between nodes). Throws PreconditionError if the window leaves the record.
PeIntegrals pe_integral(const ExcitationSource& src, double t, double window);

struct Remark4Options {
    /// Step for central differences of phi; 0 uses the recorded grid spacing.
    double rate_step = 0.0;
    /// Minimum admissible delay rate on the window.
    double min_rate = 1e-6;
    /// Use the closed-form rate of built-in delays instead of differences.
    bool analytic_rate = false;
};

/**
 * @brief Excitation integral written in the delayed time variable.
 *
 *      int_{phi(t)}^{phi(t+T)} (d/ds phi^{-1})(s) Phi^T C^T C Phi (s) ds
 *
 * with (d/ds phi^{-1})(s) = 1 / phi_dot(phi^{-1}(s)). Equals the regressor
 * Gramian of the delayed regression over [t, t+T]. Throws PreconditionError
 * when phi_dot <= min_rate anywhere on [t, t+T].
 */
Matrix remark4_integral(const ExcitationSource& src, double t, double window, const DelaySpec& delay,
                        const Remark4Options& options = {});

/// int_t^{t+T} Phi^T(phi(r)) C^T(phi(r)) C(phi(r)) Phi(phi(r)) dr on the record grid.
Matrix delayed_gramian(const ExcitationSource& src, double t, double window, const DelaySpec& delay);

/// d/dt phi(t) by central differences (one-sided at t < step).
double delay_rate(const DelaySpec& delay, double t, double step);

/// Window sweep, parallel over windows with OpenMP. stride <= 0 means window / 10.
ExcitationReport pe_check(const ExcitationSource& src, double window, double delta_floor, double stride = 0.0);
/// Single-threaded reference; produces bit-identical reports to pe_check.
ExcitationReport pe_check_serial(const ExcitationSource& src, double window, double delta_floor,
                                 double stride = 0.0);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& S);

}  // namespace gpebo
