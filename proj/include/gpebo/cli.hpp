#pragma once

#include "gpebo/excitation.hpp"
#include "gpebo/integrate.hpp"
#include "gpebo/model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpebo::cli {

/// Exit statuses of the `run` command.
enum ExitCode : int { kOk = 0, kConfigError = 2, kDiverged = 3, kIoError = 4 };

class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ScenarioId scenario = ScenarioId::C1;
    EstimatorKind estimator = EstimatorKind::Gradient;
    std::vector<double> gammas{1.0, 10.0, 100.0};
    double step = 1e-3;
    double horizon = 30.0;
    std::optional<Vector> x0;
    std::optional<Vector> xi0;
    std::optional<Vector> theta0;
    /// Constant delay (c2) or mean delay (c3).
    std::optional<double> tau;
    std::optional<double> delay_amplitude;
    std::optional<double> delay_frequency;
    std::optional<std::vector<double>> drem_delays;
    std::optional<std::filesystem::path> csv;
    std::optional<std::filesystem::path> svg;
    std::optional<std::filesystem::path> pe_report;
    double pe_window = 5.0;
    double pe_floor = 1e-4;
};

/// Raw option values keyed by long flag name without dashes ("gamma", "pe-window", ...).
using OptionMap = std::map<std::string, std::string>;

/// Every key accepted in a config file or on the command line.
const std::vector<std::string>& option_keys();

/// Reads `key = value` lines; blank lines and lines starting with '#' are skipped.
/// Throws ConfigError on malformed lines or unknown keys, IoError if unreadable.
OptionMap read_config_file(const std::filesystem::path& path);

/// Converts and validates. Throws ConfigError on any bad value.
RunConfig parse_run_config(const OptionMap& options);

/// Comma-separated reals ("1,10,100"). Throws ConfigError.
std::vector<double> parse_list(const std::string& text, const std::string& key);

/// The scenario for one gamma of the sweep, with config overrides applied.
NamedScenario scenario_for(const RunConfig& config, double gamma);

struct GammaRun {
    double gamma = 0.0;
    Trajectory trajectory;
};

struct RunResult {
    RunConfig config;
    std::vector<GammaRun> runs;
    std::optional<ExcitationReport> excitation;
    double wall_seconds = 0.0;

    const std::vector<double>& grid() const { return runs.front().trajectory.times(); }
};

/// One simulate() per gamma, parallel over gamma with OpenMP. Rethrows the
/// first failure (by gamma order) after all runs finish.
std::vector<GammaRun> run_sweep(const RunConfig& config);
/// Single-threaded reference for run_sweep.
std::vector<GammaRun> run_sweep_serial(const RunConfig& config);

/// Sweep, excitation report, then file emission for every configured path.
RunResult run(const RunConfig& config);

/// Writes via a temporary file and rename; throws IoError.
void emit_csv(const RunResult& result, const std::filesystem::path& path);
void emit_svg(const RunResult& result, const std::filesystem::path& path);
void emit_pe_report(const ExcitationReport& report, const std::filesystem::path& path);

/// CSV text of emit_csv.
std::string format_csv(const RunResult& result);
std::string format_svg(const RunResult& result);
std::string format_pe_report(const ExcitationReport& report);

/// 17 significant digits, locale independent.
std::string format_real(double value);

/// Parsed CSV: header names and numeric rows. Throws ConfigError on bad input.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable parse_csv(const std::string& text);

/// Human-readable one-screen summary of a run.
std::string summary(const RunResult& result);

/// Entry point of the `gpebo` executable.
int main(int argc, char** argv);

}  // namespace gpebo::cli
