#include "doctest.h"
#include "gpebo/cli.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace gpebo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("gpebo_test_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_main(std::vector<std::string> args) {
    args.insert(args.begin(), "gpebo");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    return cli::main(static_cast<int>(args.size()), argv.data());
}

cli::RunConfig short_config(const std::string& horizon = "0.5") {
    return cli::parse_run_config({{"scenario", "c2"}, {"gamma", "1,10,100"}, {"horizon", horizon}});
}

}  // namespace

TEST_CASE("parse_run_config defaults and values") {
    const auto cfg = cli::parse_run_config({});
    CHECK(cfg.scenario == ScenarioId::C1);
    CHECK(cfg.estimator == EstimatorKind::Gradient);
    CHECK(cfg.gammas == std::vector<double>{1.0, 10.0, 100.0});
    CHECK(cfg.step == 1e-3);
    CHECK(cfg.horizon == 30.0);

    const auto c3 = cli::parse_run_config({{"scenario", "C3"},
                                           {"estimator", "drem"},
                                           {"gamma", "5"},
                                           {"tau", "0.8"},
                                           {"delay-amplitude", "0.5"},
                                           {"x0", "2,3"}});
    CHECK(c3.scenario == ScenarioId::C3);
    CHECK(c3.estimator == EstimatorKind::Drem);
    CHECK(c3.gammas == std::vector<double>{5.0});
    CHECK(*c3.x0 == Vector{{2.0, 3.0}});
    const auto sc = cli::scenario_for(c3, 5.0);
    CHECK(sc.system.x0 == Vector{{2.0, 3.0}});
    CHECK(sc.gamma == 5.0);
    CHECK(std::get<delay::Sinusoidal>(sc.delay).base == 0.8);
    CHECK(std::get<delay::Sinusoidal>(sc.delay).amplitude == 0.5);
}

TEST_CASE("parse_run_config rejects bad input") {
    using O = cli::OptionMap;
    for (const O& bad : {O{{"gamma", "0"}}, O{{"gamma", "1,-2"}}, O{{"gamma", "abc"}}, O{{"step", "0"}},
                         O{{"step", "2"}, {"horizon", "1"}}, O{{"x0", "1,2,3"}}, O{{"scenario", "c4"}},
                         O{{"estimator", "kalman"}}, O{{"scenario", "c1"}, {"tau", "1"}},
                         O{{"scenario", "c2"}, {"delay-amplitude", "0.1"}}, O{{"drem-delays", "0.5,1"}},
                         O{{"horizon", "2"}, {"pe-report", "x.csv"}}}) {
        CAPTURE(bad.begin()->first);
        CHECK_THROWS_AS(cli::parse_run_config(bad), cli::ConfigError);
    }
}

TEST_CASE("parse_list") {
    CHECK(cli::parse_list("1, 2.5,1e-3", "k") == std::vector<double>{1.0, 2.5, 1e-3});
    CHECK_THROWS_AS(cli::parse_list("", "k"), cli::ConfigError);
    CHECK_THROWS_AS(cli::parse_list("1,,2", "k"), cli::ConfigError);
    CHECK_THROWS_AS(cli::parse_list("1x", "k"), cli::ConfigError);
}

TEST_CASE("config files") {
    TempDir dir;
    const auto file = dir.path / "run.cfg";
    std::ofstream(file) << "# comment\n\nscenario = c2\ngamma = 1,10\nhorizon=2\n";
    const auto options = cli::read_config_file(file);
    CHECK(options.at("scenario") == "c2");
    CHECK(options.at("horizon") == "2");

    std::ofstream(dir.path / "bad.cfg") << "gammma = 1\n";
    CHECK_THROWS_AS(cli::read_config_file(dir.path / "bad.cfg"), cli::ConfigError);
    std::ofstream(dir.path / "malformed.cfg") << "gamma 1\n";
    CHECK_THROWS_AS(cli::read_config_file(dir.path / "malformed.cfg"), cli::ConfigError);
    CHECK_THROWS_AS(cli::read_config_file(dir.path / "missing.cfg"), cli::IoError);

    // Flags override the file.
    const auto csv = dir.path / "out.csv";
    CHECK(run_main({"run", "--config", file.string(), "--gamma", "3", "--csv", csv.string()}) == cli::kOk);
    const auto table = cli::parse_csv(slurp(csv));
    CHECK(table.rows.size() == 2001);
    CHECK(table.rows.front()[1] == 3.0);
    CHECK(table.rows.back()[0] == 2.0);
}

TEST_CASE("CSV layout") {
    auto cfg = cli::parse_run_config({{"scenario", "c1"}, {"gamma", "1,10"}, {"step", "0.5"}, {"horizon", "0.5"}});
    const auto result = cli::run(cfg);
    const auto text = cli::format_csv(result);
    const auto table = cli::parse_csv(text);
    CHECK(table.header == std::vector<std::string>{"t", "gamma", "x1", "x2", "xhat1", "xhat2", "e1", "e2",
                                                   "theta1", "theta2", "thetahat1", "thetahat2"});
    REQUIRE(table.rows.size() == 4);
    CHECK(table.rows[0][0] == 0.0);
    CHECK(table.rows[1][0] == 0.5);
    CHECK(table.rows[0][1] == 1.0);
    CHECK(table.rows[2][1] == 10.0);
    // At t = 0: x = [1, -1], xi = theta_hat = 0, so x_hat = 0 and e = x.
    CHECK(table.rows[0][6] == 1.0);
    CHECK(table.rows[0][7] == -1.0);
    CHECK(table.rows[0][8] == -1.0);
    CHECK(table.rows[0][9] == 1.0);
}

TEST_CASE("CSV is deterministic and round-trips exactly") {
    const auto cfg = short_config();
    const auto a = cli::run(cfg);
    const auto b = cli::run(cfg);
    const auto text = cli::format_csv(a);
    CHECK(text == cli::format_csv(b));
    const auto table = cli::parse_csv(text);
    std::size_t row = 0;
    for (const auto& run : a.runs) {
        for (std::size_t k = 0; k < run.trajectory.size(); ++k, ++row) {
            const Vector x = run.trajectory.x_at(k);
            REQUIRE(table.rows.at(row)[2] == x(0));
            REQUIRE(table.rows.at(row)[3] == x(1));
        }
    }
    CHECK(row == table.rows.size());
}

TEST_CASE("format_real") {
    CHECK(cli::format_real(0.1) == "0.10000000000000001");
    CHECK(cli::format_real(1.0) == "1");
    CHECK(cli::format_real(-2.5e-300) == "-2.5e-300");
    for (double v : {M_PI, 1.0 / 3.0, 6.02214076e23, -1e-17}) CHECK(std::stod(cli::format_real(v)) == v);
}

TEST_CASE("SVG figure") {
    const auto result = cli::run(short_config());
    const auto svg = cli::format_svg(result);
    const auto xml = testing::check_xml(svg);
    CHECK_MESSAGE(xml.ok, xml.error);
    CHECK(xml.root == "svg");
    CHECK(testing::count_occurrences(svg, "<g id=\"panel-e1\"") == 1);
    CHECK(testing::count_occurrences(svg, "<g id=\"panel-e2\"") == 1);
    CHECK(testing::count_occurrences(svg, "<polyline") == 6);
    for (const char* label : {"gamma=1", "gamma=10", "gamma=100"}) CHECK(svg.find(label) != std::string::npos);
}

TEST_CASE("file emission is atomic and reports I/O failures") {
    TempDir dir;
    auto cfg = short_config();
    cfg.csv = dir.path / "e.csv";
    cfg.svg = dir.path / "e.svg";
    cfg.pe_report = dir.path / "pe.csv";
    cfg.pe_window = 0.2;
    const auto result = cli::run(cfg);
    REQUIRE(result.excitation.has_value());
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir.path)) {
        ++files;
        CHECK(entry.path().extension() != ".tmp");
    }
    CHECK(files == 3);
    CHECK(slurp(*cfg.csv) == cli::format_csv(result));
    const auto pe = slurp(*cfg.pe_report);
    CHECK(pe.rfind("window_start,window,min_eig_output,min_eig_regressor\n", 0) == 0);

    CHECK_THROWS_AS(cli::emit_csv(result, dir.path / "no" / "such" / "dir.csv"), cli::IoError);
}

TEST_CASE("exit codes") {
    TempDir dir;
    CHECK(run_main({"run", "--horizon", "0.01", "--gamma", "1"}) == cli::kOk);
    CHECK(run_main({"run", "--gamma", "0"}) == cli::kConfigError);
    CHECK(run_main({"run", "--config", (dir.path / "absent.cfg").string()}) == cli::kIoError);
    CHECK(run_main({"run", "--horizon", "0.01", "--csv", (dir.path / "x" / "y.csv").string()}) == cli::kIoError);
    CHECK(run_main({"run", "--horizon", "1", "--gamma", "1", "--x0", "1e13,0"}) == cli::kDiverged);
    CHECK(run_main({"run", "--bogus", "1"}) != cli::kOk);
    CHECK(run_main({}) != cli::kOk);
}

TEST_CASE("parallel gamma sweep equals the serial reference") {
    for (auto est : {"gradient", "drem"}) {
        const auto cfg =
            cli::parse_run_config({{"scenario", "c3"}, {"estimator", est}, {"gamma", "1,10,100"}, {"horizon", "2"}});
        const auto a = cli::run_sweep(cfg);
        const auto b = cli::run_sweep_serial(cfg);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].gamma == b[i].gamma);
            const auto& ta = a[i].trajectory;
            const auto& tb = b[i].trajectory;
            REQUIRE(ta.size() == tb.size());
            for (std::size_t k = 0; k < ta.size(); ++k) {
                REQUIRE(ta.x_at(k) == tb.x_at(k));
                REQUIRE(ta.theta_hat_at(k) == tb.theta_hat_at(k));
            }
        }
    }
}

TEST_CASE("summary mentions every gamma") {
    const auto text = cli::summary(cli::run(short_config()));
    for (const char* g : {"1", "10", "100"}) CHECK(text.find(g) != std::string::npos);
}
