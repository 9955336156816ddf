#pragma once

#include "gpebo/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gpebo {

using MatrixFn = std::function<Matrix(double)>;
using VectorFn = std::function<Vector(double)>;
using TimeFn = std::function<double(double)>;

/**
 * @brief Linear time-varying plant
 *
 *      x_dot(t) = A(t) x(t) + B(t) u(t)
 *      y(t)     = C(phi(t)) x(phi(t))
 *
 * The measurement delay phi lives in DelaySpec; this type holds only the
 * matrices, the input and the plant initial state.
 */
struct SystemSpec {
    int n = 0;
    int m = 0;
    int q = 0;
    MatrixFn A;
    MatrixFn B;
    MatrixFn C;
    VectorFn u;
    Vector x0;
};

/// Matrices and input of a SystemSpec evaluated at one instant.
struct SystemSample {
    Matrix A;
    Matrix B;
    Matrix C;
    Vector u;
};

namespace delay {
struct Identity {};
struct Constant {
    double tau = 0.0;
};
/// phi(t) = t - (base + amplitude * sin(frequency * t))
struct Sinusoidal {
    double base = 0.0;
    double amplitude = 0.0;
    double frequency = 1.0;
};
/// Arbitrary phi(t); the result is still clamped to [0, t].
struct Custom {
    TimeFn phi;
};
}  // namespace delay

using DelaySpec = std::variant<delay::Identity, delay::Constant, delay::Sinusoidal, delay::Custom>;

/// phi(t) clamped to [0, t]. Requires t >= 0.
double eval_delay(const DelaySpec& spec, double t);

/// Closed-form d/dt phi(t) for the built-in kinds, taking the clamp into account.
/// Returns nullopt for Custom delays.
std::optional<double> analytic_delay_rate(const DelaySpec& spec, double t);

/// Evaluates A, B, C and u at t and checks every shape against n, m, q.
/// Throws DimensionError on a mismatch.
SystemSample eval_system(const SystemSpec& spec, double t);

/// The two-state example plant: A = [[0, 1], [-sin^2 t, 0]], B = [0, 1]^T, C = [1, 0].
/// Input defaults to u(t) = sin t and x0 to [1, -1].
SystemSpec example_system();

/// A constant (LTI) system with the given matrices and zero input.
SystemSpec lti_system(const Matrix& A, const Matrix& B, const Matrix& C, const Vector& x0);

enum class ScenarioId { C1, C2, C3, Custom };
enum class EstimatorKind { Gradient, Drem };

std::string_view to_string(ScenarioId id);
std::string_view to_string(EstimatorKind kind);
/// Accepts "c1".."c3" in either case. Throws PreconditionError otherwise.
ScenarioId parse_scenario_id(std::string_view text);
/// Accepts "gradient" or "drem". Throws PreconditionError otherwise.
EstimatorKind parse_estimator(std::string_view text);

struct NamedScenario {
    ScenarioId id = ScenarioId::Custom;
    SystemSpec system;
    DelaySpec delay = delay::Identity{};
    double gamma = 1.0;
    EstimatorKind estimator = EstimatorKind::Gradient;
    double horizon = 30.0;
    double step = 1e-3;
    Vector xi0;
    Vector theta_hat0;
    /// Overrides gamma * I for the gradient estimator when set (must be SPD).
    std::optional<Matrix> gain;
    /// Extension delays for the DREM estimator (n - 1 strictly increasing values).
    std::vector<double> drem_delays;

    /// Unknown parameter of the regression, xi(0) - x(0).
    Vector theta() const { return xi0 - system.x0; }
};

/// Throws PreconditionError if step, horizon or gamma is not positive or the
/// initial vectors do not match the state dimension.
void validate(const NamedScenario& scenario);

/// Builds one of the three delay cases on the example plant with the default
/// initial conditions, horizon (30 s), step (1e-3 s) and DREM delay (0.5 s).
NamedScenario builtin_scenario(ScenarioId id, double gamma, EstimatorKind estimator);

}  // namespace gpebo
