#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "carleman_lab/report.hpp"

namespace fs = std::filesystem;
using carleman_lab::json;

namespace {

fs::path workdir(const std::string& name) {
    const fs::path d = fs::path(CARLEMAN_LAB_WORK) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump();
    return p;
}

int run_cli(const std::string& args, const fs::path& dir) {
    const std::string cmd = std::string("\"") + CARLEMAN_LAB_CLI + "\" " + args + " > \"" +
                            (dir / "stdout.txt").string() + "\" 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream f(p);
    for (std::string line; std::getline(f, line);) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

} // namespace

TEST(Cli, UnknownExperimentIsConfigError) {
    const auto d = workdir("unknown");
    EXPECT_EQ(run_cli("run \"" + write_config(d, {{"experiment", "spiral"}}).string() + "\"", d), 2);
    EXPECT_NE(slurp(d / "stdout.txt").find("unknown experiment"), std::string::npos);
}

TEST(Cli, UnknownKeyIsConfigError) {
    const auto d = workdir("unknown_key");
    const json cfg{{"experiment", "ledger"}, {"parameters", {{"bogus", 1}}}};
    EXPECT_EQ(run_cli("run \"" + write_config(d, cfg).string() + "\"", d), 2);
}

TEST(Cli, MissingConfigFile) {
    const auto d = workdir("missing");
    EXPECT_EQ(run_cli("run \"" + (d / "absent.json").string() + "\"", d), 2);
}

TEST(Cli, PrintSchema) {
    const auto d = workdir("schema");
    EXPECT_EQ(run_cli("run --print-schema", d), 0);
    const json s = json::parse(slurp(d / "stdout.txt"));
    EXPECT_TRUE(s.at("defaults").contains("uc-probe"));
}

TEST(Cli, IdentityDefaultsWriteReport) {
    const auto d = workdir("identity");
    const json cfg{{"experiment", "identity"}, {"output_dir", (d / "out").string()}};
    EXPECT_EQ(run_cli("run \"" + write_config(d, cfg).string() + "\" --threads 1", d), 0);
    const json rep = json::parse(slurp(d / "out" / "identity_report.json"));
    EXPECT_EQ(rep.at("experiment"), "identity");
    EXPECT_TRUE(rep.at("results").dump().find("refinement_ratios") != std::string::npos);
    EXPECT_EQ(rep.at("config").at("parameters").at("max_wavenumber"), 2.0);
    EXPECT_TRUE(fs::exists(d / "out" / "identity_table.csv"));
    const std::string out = slurp(d / "stdout.txt");
    EXPECT_NE(out.find("PASS c01"), std::string::npos);
    EXPECT_NE(out.find("PASS c02"), std::string::npos);
}

TEST(Cli, OutputDirectoryOverriddenByEnvironment) {
    const auto d = workdir("env");
    const json cfg{{"experiment", "ledger"}, {"output_dir", (d / "ignored").string()}};
    const std::string cmd = "CARLEMAN_LAB_OUT=\"" + (d / "env_out").string() + "\" \"" + CARLEMAN_LAB_CLI +
                            "\" run \"" + write_config(d, cfg).string() + "\" > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    ASSERT_TRUE(WIFEXITED(st));
    EXPECT_EQ(WEXITSTATUS(st), 0);
    EXPECT_TRUE(fs::exists(d / "env_out" / "ledger_report.json"));
    EXPECT_FALSE(fs::exists(d / "ignored"));
}

TEST(Cli, LedgerTableMatchesClosedForm) {
    const auto d = workdir("ledger");
    const json cfg{{"experiment", "ledger"},
                   {"output_dir", (d / "out").string()},
                   {"parameters", {{"N", 1.5}, {"deltas", {0.5, 0.45, 0.35}}}}};
    EXPECT_EQ(run_cli("run \"" + write_config(d, cfg).string() + "\"", d), 0);
    const auto rows = read_csv(d / "out" / "ledger_table.csv");
    ASSERT_EQ(rows.size(), 4u);
    const auto& h = rows[0];
    const auto col = [&](const std::string& n) { return std::find(h.begin(), h.end(), n) - h.begin(); };
    const auto cd = col("delta"), cb = col("log_B_closed"), cn = col("N");
    ASSERT_LT(std::size_t(cb), h.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double delta = std::stod(rows[r][cd]), N = std::stod(rows[r][cn]);
        EXPECT_EQ(N, 1.5);
        const double expect = N / std::pow(delta, 4) * std::log(1.0 / delta);
        EXPECT_NEAR(std::stod(rows[r][cb]), expect, 1e-14 * expect);
    }
}
