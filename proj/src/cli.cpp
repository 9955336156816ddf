#include "gpebo/cli.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <system_error>

namespace gpebo::cli {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

double parse_real(const std::string& raw, const std::string& key) {
    const std::string text = trim(raw);
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    // from_chars rejects a leading '+'.
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ConfigError("invalid number '" + raw + "' for " + key);
    }
    return value;
}

double parse_positive(const std::string& raw, const std::string& key) {
    const double v = parse_real(raw, key);
    if (!(v > 0.0)) throw ConfigError(key + " must be > 0 (got " + raw + ")");
    return v;
}

Vector parse_vector(const std::string& raw, const std::string& key) {
    const auto values = parse_list(raw, key);
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw IoError("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string shortest(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

}  // namespace

const std::vector<std::string>& option_keys() {
    static const std::vector<std::string> keys{
        "scenario", "estimator", "gamma",       "step",      "horizon", "x0",        "xi0",
        "theta0",   "tau",       "delay-amplitude", "delay-frequency", "drem-delays", "csv", "svg",
        "pe-window", "pe-floor", "pe-report"};
    return keys;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(item, key));
    if (out.empty()) throw ConfigError(key + " must not be empty");
    return out;
}

OptionMap read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    const auto& keys = option_keys();
    OptionMap options;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(body.substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        options[key] = trim(body.substr(eq + 1));
    }
    return options;
}

RunConfig parse_run_config(const OptionMap& options) {
    const auto& keys = option_keys();
    for (const auto& [key, value] : options) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown option '" + key + "'");
    }
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = options.find(key);
        if (it == options.end()) return std::nullopt;
        return it->second;
    };

    RunConfig cfg;
    try {
        if (auto v = get("scenario")) cfg.scenario = parse_scenario_id(trim(*v));
        if (auto v = get("estimator")) cfg.estimator = parse_estimator(trim(*v));
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
    if (auto v = get("gamma")) {
        cfg.gammas = parse_list(*v, "gamma");
        for (double g : cfg.gammas) {
            if (!(g > 0.0)) throw ConfigError("gamma must be > 0 (got " + shortest(g) + ")");
        }
    }
    if (auto v = get("step")) cfg.step = parse_positive(*v, "step");
    if (auto v = get("horizon")) cfg.horizon = parse_positive(*v, "horizon");
    if (cfg.step > cfg.horizon) throw ConfigError("step must not exceed horizon");
    if (auto v = get("x0")) cfg.x0 = parse_vector(*v, "x0");
    if (auto v = get("xi0")) cfg.xi0 = parse_vector(*v, "xi0");
    if (auto v = get("theta0")) cfg.theta0 = parse_vector(*v, "theta0");
    for (const auto* vec : {&cfg.x0, &cfg.xi0, &cfg.theta0}) {
        if (*vec && (*vec)->size() != 2) throw ConfigError("initial vectors must have 2 entries");
    }
    if (auto v = get("tau")) cfg.tau = parse_real(*v, "tau");
    if (auto v = get("delay-amplitude")) cfg.delay_amplitude = parse_real(*v, "delay-amplitude");
    if (auto v = get("delay-frequency")) cfg.delay_frequency = parse_positive(*v, "delay-frequency");
    if (cfg.tau && *cfg.tau < 0.0) throw ConfigError("tau must be >= 0");
    if (cfg.delay_amplitude && *cfg.delay_amplitude < 0.0) throw ConfigError("delay-amplitude must be >= 0");
    if (cfg.scenario == ScenarioId::C1 && (cfg.tau || cfg.delay_amplitude || cfg.delay_frequency)) {
        throw ConfigError("scenario c1 has no delay parameters");
    }
    if (cfg.scenario == ScenarioId::C2 && (cfg.delay_amplitude || cfg.delay_frequency)) {
        throw ConfigError("scenario c2 takes only tau");
    }
    if (auto v = get("drem-delays")) {
        cfg.drem_delays = parse_list(*v, "drem-delays");
        if (cfg.drem_delays->size() != 1) throw ConfigError("drem-delays needs exactly n - 1 = 1 value");
        if (!(cfg.drem_delays->front() > 0.0)) throw ConfigError("drem-delays must be > 0");
    }
    if (auto v = get("csv")) cfg.csv = trim(*v);
    if (auto v = get("svg")) cfg.svg = trim(*v);
    if (auto v = get("pe-report")) cfg.pe_report = trim(*v);
    if (auto v = get("pe-window")) cfg.pe_window = parse_positive(*v, "pe-window");
    if (auto v = get("pe-floor")) cfg.pe_floor = parse_positive(*v, "pe-floor");
    if (cfg.pe_report && cfg.pe_window > cfg.horizon) throw ConfigError("pe-window exceeds horizon");
    return cfg;
}

NamedScenario scenario_for(const RunConfig& config, double gamma) {
    NamedScenario sc = builtin_scenario(config.scenario, gamma, config.estimator);
    sc.step = config.step;
    sc.horizon = config.horizon;
    if (config.x0) sc.system.x0 = *config.x0;
    if (config.xi0) sc.xi0 = *config.xi0;
    if (config.theta0) sc.theta_hat0 = *config.theta0;
    if (config.drem_delays) sc.drem_delays = *config.drem_delays;
    if (config.scenario == ScenarioId::C2 && config.tau) sc.delay = delay::Constant{*config.tau};
    if (config.scenario == ScenarioId::C3) {
        auto d = std::get<delay::Sinusoidal>(sc.delay);
        if (config.tau) d.base = *config.tau;
        if (config.delay_amplitude) d.amplitude = *config.delay_amplitude;
        if (config.delay_frequency) d.frequency = *config.delay_frequency;
        sc.delay = d;
    }
    return sc;
}

std::vector<GammaRun> run_sweep_serial(const RunConfig& config) {
    std::vector<GammaRun> runs;
    runs.reserve(config.gammas.size());
    for (double g : config.gammas) runs.push_back(GammaRun{g, simulate(scenario_for(config, g))});
    return runs;
}

std::vector<GammaRun> run_sweep(const RunConfig& config) {
    const auto count = static_cast<long>(config.gammas.size());
    std::vector<std::optional<Trajectory>> results(config.gammas.size());
    std::vector<std::exception_ptr> errors(config.gammas.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < count; ++k) {
        const auto i = static_cast<std::size_t>(k);
        try {
            results[i].emplace(simulate(scenario_for(config, config.gammas[i])));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<GammaRun> runs;
    runs.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) runs.push_back(GammaRun{config.gammas[i], std::move(*results[i])});
    return runs;
}

RunResult run(const RunConfig& config) {
    if (config.gammas.empty()) throw ConfigError("gamma list must not be empty");
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    result.config = config;
    result.runs = run_sweep(config);
    // Phi does not depend on gamma, so one trajectory serves the excitation report.
    if (config.pe_window <= config.horizon) {
        result.excitation = pe_check(excitation_source(result.runs.front().trajectory), config.pe_window,
                                     config.pe_floor);
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (config.csv) emit_csv(result, *config.csv);
    if (config.svg) emit_svg(result, *config.svg);
    if (config.pe_report && result.excitation) emit_pe_report(*result.excitation, *config.pe_report);
    return result;
}

std::string format_real(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] =
        std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
    return std::string(buf.data(), ptr);
}

std::string format_csv(const RunResult& result) {
    const auto n = result.runs.empty() ? 0 : result.runs.front().trajectory.scenario.system.n;
    std::string out = "t,gamma";
    for (const char* prefix : {"x", "xhat", "e", "theta", "thetahat"}) {
        for (int i = 1; i <= n; ++i) out += "," + std::string(prefix) + std::to_string(i);
    }
    out += '\n';
    for (const auto& run : result.runs) {
        const auto& tr = run.trajectory;
        const std::string gamma = format_real(run.gamma);
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const Vector x = tr.x_at(k);
            const Vector xhat = tr.x_hat_at(k);
            const Vector e = x - xhat;
            const Vector th = tr.theta_hat_at(k);
            out += format_real(tr.time(k));
            out += ',';
            out += gamma;
            for (const Vector* v : {&x, &xhat, &e, &tr.theta, &th}) {
                for (Eigen::Index i = 0; i < v->size(); ++i) {
                    out += ',';
                    out += format_real((*v)(i));
                }
            }
            out += '\n';
        }
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw ConfigError("empty CSV");
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) table.header.push_back(trim(cell));
    }
    while (std::getline(ss, line)) {
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::stringstream rs(line);
        std::string cell;
        while (std::getline(rs, cell, ',')) row.push_back(parse_real(cell, "CSV cell"));
        if (row.size() != table.header.size()) throw ConfigError("CSV row width differs from header");
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string format_svg(const RunResult& result) {
    static constexpr std::array<const char*, 8> kColors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                        "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    constexpr double width = 900.0, panel_height = 320.0;
    constexpr double left = 70.0, right = 150.0, top = 40.0, bottom = 40.0;
    constexpr std::size_t max_points = 1500;

    const auto& first = result.runs.front().trajectory;
    const int n = first.scenario.system.n;
    const double t0 = first.time(0), t1 = first.time(first.size() - 1);
    const double height = panel_height * n;

    auto fmt2 = [](double v) {
        std::array<char, 64> buf{};
        const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 2);
        return std::string(buf.data(), ptr);
    };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(width) + "\" height=\"" + fmt2(height) +
           "\" viewBox=\"0 0 " + fmt2(width) + " " + fmt2(height) + "\">\n";
    out += "<title>Error transients, scenario " + std::string(to_string(result.config.scenario)) + ", estimator " +
           std::string(to_string(result.config.estimator)) + "</title>\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + fmt2(width) + "\" height=\"" + fmt2(height) + "\" fill=\"white\"/>\n";

    for (int comp = 0; comp < n; ++comp) {
        double lo = 0.0, hi = 0.0;
        for (const auto& run : result.runs) {
            for (std::size_t k = 0; k < run.trajectory.size(); ++k) {
                const double e = run.trajectory.error_at(k)(comp);
                lo = std::min(lo, e);
                hi = std::max(hi, e);
            }
        }
        if (hi - lo <= 0.0) {
            lo = -1.0;
            hi = 1.0;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;

        const double y0 = panel_height * comp;
        const double plot_w = width - left - right, plot_h = panel_height - top - bottom;
        auto sx = [&](double t) { return left + (t - t0) / (t1 - t0) * plot_w; };
        auto sy = [&](double v) { return y0 + top + (hi - v) / (hi - lo) * plot_h; };

        const std::string label = "x" + std::to_string(comp + 1) + "(t) - xhat" + std::to_string(comp + 1) + "(t)";
        out += "<g id=\"panel-e" + std::to_string(comp + 1) + "\">\n";
        out += "<text x=\"" + fmt2(left) + "\" y=\"" + fmt2(y0 + 24.0) + "\" font-family=\"sans-serif\" font-size=\"14\">" +
               label + "</text>\n";
        out += "<rect x=\"" + fmt2(left) + "\" y=\"" + fmt2(y0 + top) + "\" width=\"" + fmt2(plot_w) + "\" height=\"" +
               fmt2(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
        if (lo < 0.0 && hi > 0.0) {
            out += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(sy(0.0)) + "\" x2=\"" + fmt2(left + plot_w) +
                   "\" y2=\"" + fmt2(sy(0.0)) + "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
        }
        for (const auto& [value, anchor] : {std::pair{hi, "end"}, std::pair{lo, "end"}}) {
            out += "<text x=\"" + fmt2(left - 6.0) + "\" y=\"" + fmt2(sy(value) + 4.0) +
                   "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"" + anchor + "\">" +
                   format_real(value).substr(0, 8) + "</text>\n";
        }
        for (const auto& [value, anchor] : {std::pair{t0, "start"}, std::pair{t1, "end"}}) {
            out += "<text x=\"" + fmt2(sx(value)) + "\" y=\"" + fmt2(y0 + top + plot_h + 16.0) +
                   "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"" + anchor + "\">t=" +
                   shortest(value) + "</text>\n";
        }

        for (std::size_t r = 0; r < result.runs.size(); ++r) {
            const auto& tr = result.runs[r].trajectory;
            const char* color = kColors[r % kColors.size()];
            const std::size_t stride = std::max<std::size_t>(1, (tr.size() + max_points - 1) / max_points);
            out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.2\" points=\"";
            for (std::size_t k = 0; k < tr.size(); k += stride) {
                if (k) out += ' ';
                out += fmt2(sx(tr.time(k))) + "," + fmt2(sy(tr.error_at(k)(comp)));
            }
            if ((tr.size() - 1) % stride != 0) {
                const auto k = tr.size() - 1;
                out += " " + fmt2(sx(tr.time(k))) + "," + fmt2(sy(tr.error_at(k)(comp)));
            }
            out += "\"/>\n";
            const double ly = y0 + top + 16.0 * static_cast<double>(r) + 8.0;
            out += "<line x1=\"" + fmt2(width - right + 12.0) + "\" y1=\"" + fmt2(ly) + "\" x2=\"" +
                   fmt2(width - right + 32.0) + "\" y2=\"" + fmt2(ly) + "\" stroke=\"" + color +
                   "\" stroke-width=\"2\"/>\n";
            out += "<text x=\"" + fmt2(width - right + 38.0) + "\" y=\"" + fmt2(ly + 4.0) +
                   "\" font-family=\"sans-serif\" font-size=\"12\">gamma=" + shortest(result.runs[r].gamma) +
                   "</text>\n";
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string format_pe_report(const ExcitationReport& report) {
    std::string out = "window_start,window,min_eig_output,min_eig_regressor\n";
    for (std::size_t k = 0; k < report.starts.size(); ++k) {
        out += format_real(report.starts[k]) + "," + format_real(report.window) + "," +
               format_real(report.min_eig_output[k]) + "," + format_real(report.min_eig_regressor[k]) + "\n";
    }
    return out;
}

void emit_csv(const RunResult& result, const std::filesystem::path& path) {
    write_atomically(path, format_csv(result));
}

void emit_svg(const RunResult& result, const std::filesystem::path& path) {
    write_atomically(path, format_svg(result));
}

void emit_pe_report(const ExcitationReport& report, const std::filesystem::path& path) {
    write_atomically(path, format_pe_report(report));
}

std::string summary(const RunResult& result) {
    std::ostringstream os;
    const auto& cfg = result.config;
    os << "scenario " << to_string(cfg.scenario) << ", estimator " << to_string(cfg.estimator) << ", h=" << cfg.step
       << ", Tf=" << cfg.horizon << "\n";
    for (const auto& run : result.runs) {
        const auto& tr = run.trajectory;
        const auto last = tr.size() - 1;
        double tail = 0.0;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            if (tr.time(k) >= 0.8 * cfg.horizon) tail = std::max(tail, tr.error_at(k).norm());
        }
        os << "  gamma=" << shortest(run.gamma) << ": |x - xhat|(Tf)=" << tr.error_at(last).norm()
           << ", max |x - xhat| over last 20%=" << tail << ", |theta_hat - theta|(Tf)=" << tr.theta_tilde_at(last).norm()
           << "\n";
    }
    if (result.excitation) {
        const auto& ex = *result.excitation;
        os << "  excitation (T=" << ex.window << ", floor=" << ex.delta_floor << "): output form delta="
           << ex.delta_output << (ex.pe_output ? " PE" : " not PE") << ", regressor form delta="
           << ex.delta_regressor << (ex.pe_regressor ? " PE" : " not PE") << "\n";
    }
    os << "  wall time " << result.wall_seconds << " s\n";
    return os.str();
}

int main(int argc, char** argv) {
    CLI::App app{"Parameter estimation-based state observer for LTV systems with delayed measurements"};
    app.require_subcommand(1);
    auto* run_cmd = app.add_subcommand("run", "Simulate a delay scenario over a gamma sweep");

    std::map<std::string, std::string> flags;
    std::vector<std::pair<std::string, std::string>> help{
        {"scenario", "c1 | c2 | c3"},
        {"estimator", "gradient | drem"},
        {"gamma", "comma-separated estimator gains"},
        {"step", "integration step h"},
        {"horizon", "final time Tf"},
        {"x0", "plant initial state, comma vector"},
        {"xi0", "observer copy initial state, comma vector"},
        {"theta0", "initial parameter estimate, comma vector"},
        {"tau", "constant delay (c2) or mean delay (c3)"},
        {"delay-amplitude", "sinusoidal delay amplitude (c3)"},
        {"delay-frequency", "sinusoidal delay frequency in rad/s (c3)"},
        {"drem-delays", "DREM extension delays"},
        {"csv", "trajectory CSV output path"},
        {"svg", "error transient SVG output path"},
        {"pe-window", "excitation window T"},
        {"pe-floor", "excitation floor delta"},
        {"pe-report", "excitation report CSV output path"},
    };
    for (const auto& [key, text] : help) run_cmd->add_option("--" + key, flags[key], text);
    std::string config_path;
    run_cmd->add_option("--config", config_path, "key = value file; flags override it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        OptionMap options;
        if (!config_path.empty()) options = read_config_file(config_path);
        for (const auto& [key, text] : help) {
            if (run_cmd->count("--" + key) > 0) options[key] = flags[key];
        }
        const RunConfig cfg = parse_run_config(options);
        const RunResult result = run(cfg);
        std::cout << summary(result);
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const PreconditionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const DimensionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kDiverged;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIoError;
    }
}

}  // namespace gpebo::cli
