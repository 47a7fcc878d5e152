#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mfwh/cli.hpp"

using namespace mfwh;
namespace fs = std::filesystem;

namespace {

const char* small_config = R"(
[run]
mode = gmres

[grid]
nx = 24
ny = 24
order = 4

[scheme]
time_scheme = trapezoidal
periods = 2

[freq.1]
omega = 5.1
amplitude = 25
decay = 15
x0 = 0.6
y0 = 0.45

[freq.2]
omega = 10.1
amplitude = 100
decay = 15
x0 = 0.4
y0 = 0.5

[output]
spectrum = true
mu_samples = 501
)";

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_run_config(in);
}

std::string config_error_key(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mfwh_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    if (pos != std::string::npos) s.replace(pos, from.size(), to);
    return s;
}

} // namespace

TEST(Config, ParsesShippedThreeFrequencyConfig) {
    const RunConfig c = load_run_config(std::string(MFWH_EXAMPLES_DIR) + "/square_3freq_np2.cfg");
    EXPECT_EQ(c.mode, RunMode::gmres);
    EXPECT_EQ(c.cells[0], 128);
    EXPECT_EQ(c.order, 4);
    EXPECT_EQ(c.periods, 2);
    ASSERT_EQ(c.frequencies.size(), 3u);
    EXPECT_EQ(c.frequencies[2].omega, 15.1);
    EXPECT_EQ(c.frequencies[1].source.amplitude, 100.0);
    EXPECT_EQ(c.frequencies[0].source.center[1], 0.45);
}

TEST(Config, SevenFrequencyConfigPeriods) {
    const RunConfig c = load_run_config(std::string(MFWH_EXAMPLES_DIR) + "/square_7freq.cfg");
    const auto pb = c.make_problem();
    const TimePlan plan = build_time_plan(pb, c.scheme, c.periods, c.make_grid(), c.order, c.plan);
    EXPECT_EQ(plan.periods_per_freq, (std::vector<int>{6, 8, 10, 12, 15, 18, 21}));
}

TEST(Config, DefaultsAndOverrides) {
    const RunConfig c = parse(small_config);
    EXPECT_EQ(c.dim, 2);
    EXPECT_EQ(c.bc, BoundaryCondition::dirichlet());
    EXPECT_EQ(c.tolerance, 1e-10);
    EXPECT_TRUE(c.write_spectrum);
    EXPECT_EQ(c.mu_samples, 501);
}

TEST(Config, ErrorsNameTheKey) {
    EXPECT_EQ(config_error_key(replace(small_config, "order = 4", "order = 3")), "grid.order");
    EXPECT_EQ(config_error_key(replace(small_config, "mode = gmres", "mode = fast")), "run.mode");
    EXPECT_EQ(config_error_key(replace(small_config, "nx = 24", "nx = many")), "grid.nx");
    EXPECT_EQ(config_error_key(replace(small_config, "omega = 10.1", "omega = 4")), "freq.2.omega");
    EXPECT_EQ(config_error_key(replace(small_config, "omega = 5.1", "omgea = 5.1")), "freq.1.omega");
    EXPECT_EQ(config_error_key(replace(small_config, "periods = 2", "periods = 2\ncolour = red")), "scheme.colour");
    EXPECT_EQ(config_error_key(replace(small_config, "[freq.2]", "[freq.3]")), "freq.2");
    EXPECT_EQ(config_error_key(replace(small_config, "time_scheme = trapezoidal", "time_scheme = rk4")),
              "scheme.time_scheme");
    EXPECT_EQ(config_error_key(replace(small_config, "decay = 15", "decay = -1")), "freq.1.decay");
}

TEST(Config, UnreadableFile) {
    EXPECT_THROW(load_run_config("/nonexistent/mfwh.cfg"), ConfigError);
}

TEST(Run, AnalyzeIsDeterministic) {
    const fs::path a = scratch("analyze_a"), b = scratch("analyze_b");
    RunConfig c = parse(small_config);
    std::ostringstream log;
    EXPECT_EQ(run(c, {RunMode::analyze, a.string()}, log), 0);
    EXPECT_EQ(run(c, {RunMode::analyze, b.string()}, log), 0);
    for (const char* f : {"mu_curve.csv", "spectrum.csv", "report.txt"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        if (std::string(f) != "report.txt") EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_FALSE(fs::exists(a / "residuals.csv"));
    EXPECT_FALSE(fs::exists(a / "u_m1.field"));
    const std::string curve = slurp(a / "mu_curve.csv");
    EXPECT_EQ(curve.substr(0, curve.find('\n')), "lambda,mu,abs_mu");
    const std::string spec = slurp(a / "spectrum.csv");
    EXPECT_EQ(spec.substr(0, spec.find('\n')), "nu,lambda_h,lambda_tilde,mu_d");
    EXPECT_NE(log.str().find("acr = "), std::string::npos);
}

TEST(Run, GmresWritesOutputs) {
    const fs::path dir = scratch("gmres");
    RunConfig c = parse(small_config);
    std::ostringstream log;
    EXPECT_EQ(run(c, {std::nullopt, dir.string()}, log), 0);
    for (const char* f : {"residuals.csv", "mu_curve.csv", "report.txt", "u_m1.field", "u_m2.field"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const Grid g = c.make_grid();
    std::ifstream in(dir / "u_m2.field");
    const GridFunction u = read_field(in, g);
    EXPECT_LE(mfwh::testing::relative_error(u, solve_direct(c.make_problem(), g, c.order, 1)), 1e-8);
}

TEST(Run, VerifyMode) {
    const fs::path dir = scratch("verify");
    std::ostringstream log;
    EXPECT_EQ(run(parse(small_config), {RunMode::verify, dir.string()}, log), 0);
    EXPECT_NE(log.str().find("verified = true"), std::string::npos);
    EXPECT_NE(log.str().find("relative_error_vs_direct = "), std::string::npos);
}

TEST(Run, DirectMode) {
    const fs::path dir = scratch("direct");
    std::ostringstream log;
    EXPECT_EQ(run(parse(small_config), {RunMode::direct, dir.string()}, log), 0);
    EXPECT_TRUE(fs::exists(dir / "u_m1.field"));
    EXPECT_NE(log.str().find("backward_error = "), std::string::npos);
}

TEST(Run, FpiDivergenceExitsTwo) {
    const fs::path dir = scratch("diverge");
    RunConfig c = load_run_config(std::string(MFWH_EXAMPLES_DIR) + "/square_3freq_np2.cfg");
    c.cells = {32, 32};
    c.periods = 1;
    c.max_iterations = 80;
    c.write_fields = false;
    std::ostringstream log;
    EXPECT_EQ(run(c, {RunMode::fpi, dir.string()}, log), 2);
    EXPECT_NE(log.str().find("diverged = true"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "residuals.csv"));
}

TEST(Run, ThreadsFromEnvironmentValidated) {
    ::setenv("MFWH_THREADS", "zero", 1);
    EXPECT_THROW(detail::threads_from_env(0), ConfigError);
    ::setenv("MFWH_THREADS", "3", 1);
    EXPECT_EQ(detail::threads_from_env(0), 3);
    ::unsetenv("MFWH_THREADS");
    EXPECT_EQ(detail::threads_from_env(2), 2);
}

TEST(Executable, ExitCodes) {
    const fs::path dir = scratch("exe");
    fs::create_directories(dir);
    const std::string cli = MFWH_CLI_PATH;
    auto status = [](const std::string& cmd) {
        const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status(cli + " /nonexistent/mfwh.cfg"), 1);
    std::ofstream(dir / "bad.cfg") << replace(small_config, "order = 4", "order = 5");
    EXPECT_EQ(status(cli + " " + (dir / "bad.cfg").string()), 1);
    std::ofstream(dir / "ok.cfg") << small_config;
    EXPECT_EQ(status(cli + " " + (dir / "ok.cfg").string() + " --mode analyze --out " + (dir / "out").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "mu_curve.csv"));
    EXPECT_EQ(status(cli + " " + (dir / "ok.cfg").string() + " --mode sideways"), 1);
}
