#include "gpebo/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace gpebo {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double raw_delay(const DelaySpec& spec, double t) {
    return std::visit(Overloaded{
                          [t](const delay::Identity&) { return t; },
                          [t](const delay::Constant& d) { return t - d.tau; },
                          [t](const delay::Sinusoidal& d) {
                              return t - (d.base + d.amplitude * std::sin(d.frequency * t));
                          },
                          [t](const delay::Custom& d) { return d.phi(t); },
                      },
                      spec);
}

void check_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const char* name, double t) {
    if (M.rows() != rows || M.cols() != cols) {
        throw DimensionError(std::string(name) + "(" + std::to_string(t) + ") is " + std::to_string(M.rows()) +
                             "x" + std::to_string(M.cols()) + ", expected " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
}

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

double eval_delay(const DelaySpec& spec, double t) {
    return std::max(0.0, std::min(t, raw_delay(spec, t)));
}

std::optional<double> analytic_delay_rate(const DelaySpec& spec, double t) {
    if (std::holds_alternative<delay::Custom>(spec)) return std::nullopt;
    const double raw = raw_delay(spec, t);
    // Inside a clamp the delay is flat (phi = 0) or the identity (phi = t).
    if (raw <= 0.0) return 0.0;
    if (raw >= t) return 1.0;
    return std::visit(Overloaded{
                          [](const delay::Identity&) { return 1.0; },
                          [](const delay::Constant&) { return 1.0; },
                          [t](const delay::Sinusoidal& d) {
                              return 1.0 - d.amplitude * d.frequency * std::cos(d.frequency * t);
                          },
                          [](const delay::Custom&) { return 0.0; },
                      },
                      spec);
}

SystemSample eval_system(const SystemSpec& spec, double t) {
    SystemSample s{spec.A(t), spec.B(t), spec.C(t), spec.u(t)};
    check_shape(s.A, spec.n, spec.n, "A", t);
    check_shape(s.B, spec.n, spec.m, "B", t);
    check_shape(s.C, spec.q, spec.n, "C", t);
    check_shape(s.u, spec.m, 1, "u", t);
    return s;
}

SystemSpec example_system() {
    SystemSpec sys;
    sys.n = 2;
    sys.m = 1;
    sys.q = 1;
    sys.A = [](double t) {
        const double s = std::sin(t);
        Matrix A(2, 2);
        A << 0.0, 1.0, -s * s, 0.0;
        return A;
    };
    sys.B = [](double) {
        Matrix B(2, 1);
        B << 0.0, 1.0;
        return B;
    };
    sys.C = [](double) {
        Matrix C(1, 2);
        C << 1.0, 0.0;
        return C;
    };
    sys.u = [](double t) { return Vector::Constant(1, std::sin(t)); };
    sys.x0 = Vector(2);
    sys.x0 << 1.0, -1.0;
    return sys;
}

SystemSpec lti_system(const Matrix& A, const Matrix& B, const Matrix& C, const Vector& x0) {
    SystemSpec sys;
    sys.n = static_cast<int>(A.rows());
    sys.m = static_cast<int>(B.cols());
    sys.q = static_cast<int>(C.rows());
    sys.A = [A](double) { return A; };
    sys.B = [B](double) { return B; };
    sys.C = [C](double) { return C; };
    const auto m = B.cols();
    sys.u = [m](double) { return Vector::Zero(m); };
    sys.x0 = x0;
    return sys;
}

std::string_view to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::C1: return "c1";
        case ScenarioId::C2: return "c2";
        case ScenarioId::C3: return "c3";
        case ScenarioId::Custom: return "custom";
    }
    return "custom";
}

std::string_view to_string(EstimatorKind kind) {
    return kind == EstimatorKind::Drem ? "drem" : "gradient";
}

ScenarioId parse_scenario_id(std::string_view text) {
    const auto s = lowercase(text);
    if (s == "c1") return ScenarioId::C1;
    if (s == "c2") return ScenarioId::C2;
    if (s == "c3") return ScenarioId::C3;
    throw PreconditionError("unknown scenario id '" + std::string(text) + "' (expected c1, c2 or c3)");
}

EstimatorKind parse_estimator(std::string_view text) {
    const auto s = lowercase(text);
    if (s == "gradient") return EstimatorKind::Gradient;
    if (s == "drem") return EstimatorKind::Drem;
    throw PreconditionError("unknown estimator '" + std::string(text) + "' (expected gradient or drem)");
}

void validate(const NamedScenario& sc) {
    if (!(sc.step > 0.0) || !std::isfinite(sc.step)) throw PreconditionError("step must be > 0");
    if (!(sc.horizon > 0.0) || !std::isfinite(sc.horizon)) throw PreconditionError("horizon must be > 0");
    if (!(sc.gamma > 0.0) || !std::isfinite(sc.gamma)) throw PreconditionError("gamma must be > 0");
    const auto n = sc.system.n;
    if (n <= 0) throw PreconditionError("state dimension must be positive");
    if (sc.system.x0.size() != n) throw DimensionError("x0 has wrong dimension");
    if (sc.xi0.size() != n) throw DimensionError("xi0 has wrong dimension");
    if (sc.theta_hat0.size() != n) throw DimensionError("theta_hat0 has wrong dimension");
    if (sc.gain && (sc.gain->rows() != n || sc.gain->cols() != n)) throw DimensionError("gain has wrong dimension");
}

NamedScenario builtin_scenario(ScenarioId id, double gamma, EstimatorKind estimator) {
    if (!(gamma > 0.0)) throw PreconditionError("gamma must be > 0");
    NamedScenario sc;
    sc.id = id;
    sc.system = example_system();
    switch (id) {
        case ScenarioId::C1: sc.delay = delay::Identity{}; break;
        case ScenarioId::C2: sc.delay = delay::Constant{1.0}; break;
        case ScenarioId::C3: sc.delay = delay::Sinusoidal{1.0, 0.9, 1.0}; break;
        case ScenarioId::Custom: throw PreconditionError("custom scenarios have no built-in definition");
    }
    sc.gamma = gamma;
    sc.estimator = estimator;
    sc.horizon = 30.0;
    sc.step = 1e-3;
    sc.xi0 = Vector::Zero(2);
    sc.theta_hat0 = Vector::Zero(2);
    sc.drem_delays = {0.5};
    return sc;
}

}  // namespace gpebo
