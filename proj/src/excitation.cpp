#include "gpebo/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gpebo {

namespace {

/// Quadrature abscissa: a stored node (index >= 0) or an interpolated end point.
struct Node {
    double t;
    long index;
};

double tolerance_at(double t) { return 1e-10 * std::max(1.0, std::abs(t)); }

const TrajectoryHistory& record_of(const ExcitationSource& src) {
    if (src.phi == nullptr || src.phi->empty()) throw PreconditionError("excitation source has no trajectory");
    if (!src.C) throw PreconditionError("excitation source has no output map");
    return *src.phi;
}

/// Checks [a, b] against the record and snaps ends lying within rounding of it.
std::pair<double, double> fit_interval(const TrajectoryHistory& hist, double a, double b) {
    if (!(b > a)) throw PreconditionError("excitation window must have positive length");
    const double lo = hist.start_time(), hi = hist.latest_time();
    if (a < lo - tolerance_at(a) || b > hi + tolerance_at(b)) {
        throw PreconditionError("excitation window [" + std::to_string(a) + ", " + std::to_string(b) +
                                "] exceeds trajectory [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return {std::max(a, lo), std::min(b, hi)};
}

/// a, every stored node strictly inside (a, b) away from the ends, then b.
/// Ends that coincide with a node use that node directly.
std::vector<Node> grid_nodes(const TrajectoryHistory& hist, double a, double b) {
    const auto& ts = hist.times();
    std::vector<Node> nodes;
    auto first = std::lower_bound(ts.begin(), ts.end(), a - tolerance_at(a));
    auto last = std::upper_bound(ts.begin(), ts.end(), b + tolerance_at(b));

    auto near = [](double x, double y) { return std::abs(x - y) <= tolerance_at(y); };
    if (first == last || !near(*first, a)) nodes.push_back({a, -1});
    for (auto it = first; it != last; ++it) nodes.push_back({*it, static_cast<long>(it - ts.begin())});
    if (nodes.size() < 2 || !near(nodes.back().t, b)) {
        // Drop a trailing node that overshoots b by rounding only.
        if (!nodes.empty() && nodes.back().t > b) nodes.pop_back();
        nodes.push_back({b, -1});
    }
    return nodes;
}

Matrix phi_at(const TrajectoryHistory& hist, const Node& node) {
    return node.index >= 0 ? hist.at(static_cast<std::size_t>(node.index)) : hist.sample(node.t);
}

template <class Integrand>
auto trapezoid(const std::vector<Node>& nodes, Integrand&& f) {
    auto previous = f(nodes.front());
    auto sum = decltype(previous)::Zero(previous.rows(), previous.cols()).eval();
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        auto current = f(nodes[k]);
        sum += (0.5 * (nodes[k].t - nodes[k - 1].t)) * (previous + current);
        previous = std::move(current);
    }
    return sum;
}

double recorded_step(const TrajectoryHistory& hist) {
    if (hist.size() < 2) throw PreconditionError("trajectory too short to infer its step");
    return hist.time(1) - hist.time(0);
}

/// phi^{-1}(s) on [lo, hi] where phi is increasing.
double invert_delay(const DelaySpec& delay, double s, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (eval_delay(delay, mid) < s ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ExcitationSource excitation_source(const Trajectory& traj) {
    return ExcitationSource{&traj.phi, traj.scenario.system.C};
}

PeIntegrals pe_integral(const ExcitationSource& src, double t, double window) {
    const auto& hist = record_of(src);
    const auto [a, b] = fit_interval(hist, t, t + window);
    const auto nodes = grid_nodes(hist, a, b);

    // Both forms share one integrand evaluation per node.
    struct Pair {
        Matrix output, regressor;
    };
    auto eval = [&](const Node& node) {
        const Matrix CPhi = src.C(node.t) * phi_at(hist, node);
        return Pair{CPhi * CPhi.transpose(), CPhi.transpose() * CPhi};
    };
    Pair previous = eval(nodes.front());
    PeIntegrals out{Matrix::Zero(previous.output.rows(), previous.output.cols()),
                    Matrix::Zero(previous.regressor.rows(), previous.regressor.cols())};
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        Pair current = eval(nodes[k]);
        const double w = 0.5 * (nodes[k].t - nodes[k - 1].t);
        out.output_form += w * (previous.output + current.output);
        out.regressor_form += w * (previous.regressor + current.regressor);
        previous = std::move(current);
    }
    return out;
}

double delay_rate(const DelaySpec& delay, double t, double step) {
    if (!(step > 0.0)) throw PreconditionError("difference step must be > 0");
    if (t >= step) return (eval_delay(delay, t + step) - eval_delay(delay, t - step)) / (2.0 * step);
    return (eval_delay(delay, t + step) - eval_delay(delay, t)) / step;
}

Matrix remark4_integral(const ExcitationSource& src, double t, double window, const DelaySpec& delay,
                        const Remark4Options& options) {
    const auto& hist = record_of(src);
    if (!(window > 0.0)) throw PreconditionError("excitation window must have positive length");
    const double step = options.rate_step > 0.0 ? options.rate_step : recorded_step(hist);

    auto rate = [&](double r) {
        if (options.analytic_rate) {
            if (auto exact = analytic_delay_rate(delay, r)) return *exact;
        }
        return delay_rate(delay, r, step);
    };

    const auto samples = static_cast<long>(std::ceil(window / step));
    for (long k = 0; k <= samples; ++k) {
        const double r = std::min(t + static_cast<double>(k) * step, t + window);
        const double v = rate(r);
        if (!(v > options.min_rate)) {
            throw PreconditionError("delay rate " + std::to_string(v) + " <= " + std::to_string(options.min_rate) +
                                    " at t=" + std::to_string(r) + "; the reparametrized integral is undefined");
        }
    }

    const double a_raw = eval_delay(delay, t);
    const double b_raw = eval_delay(delay, t + window);
    const auto [a, b] = fit_interval(hist, a_raw, b_raw);
    const auto nodes = grid_nodes(hist, a, b);

    return trapezoid(nodes, [&](const Node& node) -> Matrix {
        double r;
        if (node.t <= a) {
            r = t;
        } else if (node.t >= b) {
            r = t + window;
        } else {
            r = invert_delay(delay, node.t, t, t + window);
        }
        const Matrix CPhi = src.C(node.t) * phi_at(hist, node);
        return (1.0 / rate(r)) * (CPhi.transpose() * CPhi);
    });
}

Matrix delayed_gramian(const ExcitationSource& src, double t, double window, const DelaySpec& delay) {
    const auto& hist = record_of(src);
    const auto [a, b] = fit_interval(hist, t, t + window);
    const auto nodes = grid_nodes(hist, a, b);
    return trapezoid(nodes, [&](const Node& node) -> Matrix {
        const double s = eval_delay(delay, node.t);
        const Matrix CPhi = src.C(s) * hist.sample(s);
        return CPhi.transpose() * CPhi;
    });
}

double min_eigenvalue(const Matrix& S) {
    if (S.size() == 1) return S(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

namespace {

ExcitationReport prepare_report(const TrajectoryHistory& hist, double window, double delta_floor, double stride) {
    if (!(window > 0.0)) throw PreconditionError("excitation window must be > 0");
    ExcitationReport report;
    report.window = window;
    report.stride = stride > 0.0 ? stride : window / 10.0;
    report.delta_floor = delta_floor;
    const double t0 = hist.start_time();
    const double end = hist.latest_time();
    for (long k = 0;; ++k) {
        const double s = t0 + static_cast<double>(k) * report.stride;
        if (s + window > end + tolerance_at(end)) break;
        report.starts.push_back(s);
    }
    if (report.starts.empty()) throw PreconditionError("trajectory shorter than the excitation window");
    report.min_eig_output.assign(report.starts.size(), 0.0);
    report.min_eig_regressor.assign(report.starts.size(), 0.0);
    return report;
}

void evaluate_window(const ExcitationSource& src, ExcitationReport& report, std::size_t k) {
    const auto integrals = pe_integral(src, report.starts[k], report.window);
    report.min_eig_output[k] = min_eigenvalue(integrals.output_form);
    report.min_eig_regressor[k] = min_eigenvalue(integrals.regressor_form);
}

void summarize(ExcitationReport& report) {
    report.delta_output = *std::min_element(report.min_eig_output.begin(), report.min_eig_output.end());
    report.delta_regressor = *std::min_element(report.min_eig_regressor.begin(), report.min_eig_regressor.end());
    report.pe_output = report.delta_output > report.delta_floor;
    report.pe_regressor = report.delta_regressor > report.delta_floor;
}

}  // namespace

ExcitationReport pe_check(const ExcitationSource& src, double window, double delta_floor, double stride) {
    ExcitationReport report = prepare_report(record_of(src), window, delta_floor, stride);
    const auto count = static_cast<long>(report.starts.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long k = 0; k < count; ++k) {
        evaluate_window(src, report, static_cast<std::size_t>(k));
    }
    summarize(report);
    return report;
}

ExcitationReport pe_check_serial(const ExcitationSource& src, double window, double delta_floor, double stride) {
    ExcitationReport report = prepare_report(record_of(src), window, delta_floor, stride);
    for (std::size_t k = 0; k < report.starts.size(); ++k) evaluate_window(src, report, k);
    summarize(report);
    return report;
}

}  // namespace gpebo
