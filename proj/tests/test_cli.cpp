/**
 * @file test_cli.cpp
 * @brief End-to-end checks of the command-line tool: exit codes, error lines,
 *        the compare subcommand and thread-count independence of outputs.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "klshell/io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string output;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(KLSHELL_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) out += buf;
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_scenario(const fs::path& dir, const std::string& body) {
    const auto p = dir / "s.toml";
    std::ofstream(p) << body;
    return p;
}

const char* kSmall = R"(solver = "shell"
t_end = 2e-4
[material]
E = 210e9
nu = 0.3
rho = 7800.0
h = 0.1
[geometry]
extent_x = 3.0
extent_y = 3.0
nx = 31
ny = 31
[ic]
kind = "point_velocity"
component = "v_x"
magnitude = 100.0
[outputs]
snapshot_times = [0.0, 1e-4, 2e-4]
components = ["v_x", "v_y"]
)";

} // namespace

TEST(Cli, MissingScenarioFileGivesIoCategory) {
    const auto r = run("run /nonexistent/file.toml");
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(r.output.rfind("error: io: ", 0), 0u) << r.output;
    EXPECT_EQ(std::count(r.output.begin(), r.output.end(), '\n'), 1);
}

TEST(Cli, ValidationErrorNamesField) {
    const auto dir = klshell::test_support::scratch_dir("cli_bad");
    std::string body = kSmall;
    body.replace(body.find("nu = 0.3"), 8, "nu = 0.6");
    const auto r = run("run " + write_scenario(dir, body).string() + " --out " + (dir / "o").string());
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(r.output.rfind("error: validation: material.nu", 0), 0u) << r.output;
}

TEST(Cli, UsageErrorsAreReported) {
    const auto r = run("run");
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(r.output.rfind("error: usage: ", 0), 0u) << r.output;
    const auto o = run("run x.toml --order notanumber");
    EXPECT_NE(o.code, 0);
}

TEST(Cli, RunThenCompareSnapshots) {
    const auto dir = klshell::test_support::scratch_dir("cli_ok");
    const auto scen = write_scenario(dir, kSmall);
    const auto r = run("run " + scen.string() + " --out " + (dir / "o").string() + " --order 3 --courant 0.5");
    ASSERT_EQ(r.code, 0) << r.output;
    const auto a = (dir / "o" / "v_x_t2.csv").string();
    const auto b = (dir / "o" / "v_y_t2.csv").string();
    const auto same = run("compare " + a + " " + a);
    EXPECT_EQ(same.code, 0);
    EXPECT_EQ(same.output, "0\n");
    const auto diff = run("compare " + b + " " + a);
    EXPECT_EQ(diff.code, 0);
    EXPECT_GT(std::stod(diff.output), 0.0);
    const auto manifest = slurp(dir / "o" / "manifest.json");
    EXPECT_NE(manifest.find("\"status\": \"complete\""), std::string::npos);
}

TEST(Cli, OutputsIdenticalAcrossThreadCounts) {
    const auto dir = klshell::test_support::scratch_dir("cli_threads");
    const auto scen = write_scenario(dir, kSmall);
    ASSERT_EQ(run("run " + scen.string() + " --threads 1 --out " + (dir / "t1").string()).code, 0);
    ASSERT_EQ(run("run " + scen.string() + " --threads 4 --out " + (dir / "t4").string()).code, 0);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(dir / "t1")) {
        if (e.path().extension() != ".csv") continue;
        EXPECT_EQ(slurp(e.path()), slurp(dir / "t4" / e.path().filename())) << e.path();
        ++compared;
    }
    EXPECT_EQ(compared, 6u);
}
