#include "tailbound/run.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tailbound/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tailbound_run_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& command, const json& config, const fs::path& dir, const fs::path& out,
        unsigned threads = 1) {
  const fs::path cfg = dir / (command + "_config.json");
  std::ofstream(cfg) << config.dump(2);
  const std::string cmd = std::string(TAILBOUND_CLI_PATH) + " " + command + " --config " + cfg.string() +
                          " --out " + out.string() + " --threads " + std::to_string(threads) + " > " +
                          (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(Cli, BoundForGaussianChernov) {
  const auto dir = scratch("bound");
  const json cfg = {{"phi", {{"id", "quadratic"}}}, {"entropy", {{"kind", "zero"}}}, {"u_grid", {1.0, 2.0, 3.0}}};
  ASSERT_EQ(cli("bound", cfg, dir, dir / "out"), 0) << slurp(dir / "stderr.txt");
  const auto rows = read_csv(dir / "out" / "bounds.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0][4], "upper");
  for (std::size_t i = 1; i < 4; ++i) {
    const double u = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][4]), std::exp(-0.5 * u * u), 1e-5 * std::exp(-0.5 * u * u));
  }
  const auto report = json::parse(slurp(dir / "out" / "bounds.json"));
  EXPECT_EQ(report.at("config").at("phi").at("id"), "quadratic");
}

TEST(Cli, ConjugateTable) {
  const auto dir = scratch("conjugate");
  const json cfg = {{"phi", {{"id", "poissonian"}}}, {"conjugate", {{"x_max", 2.0}, {"x_count", 21}}}};
  ASSERT_EQ(cli("conjugate", cfg, dir, dir / "out"), 0) << slurp(dir / "stderr.txt");
  const auto rows = read_csv(dir / "out" / "conjugate.csv");
  ASSERT_EQ(rows.size(), 22u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "phi_star", "dphi_star"}));
  EXPECT_NEAR(std::stod(rows[11][1]), 2.0 * std::log(2.0) - 1.0, 1e-6);
}

TEST(Cli, EntropyWritesProfileAndG) {
  const auto dir = scratch("entropy");
  const json cfg = {{"phi", {{"id", "quadratic"}}},
                    {"entropy", {{"kind", "log"}, {"w", 1.0}, {"kappa", 1.0}}}};
  ASSERT_EQ(cli("entropy", cfg, dir, dir / "out"), 0) << slurp(dir / "stderr.txt");
  const auto g = read_csv(dir / "out" / "g_curve.csv");
  EXPECT_EQ(g[0], (std::vector<std::string>{"p", "g"}));
  EXPECT_TRUE(fs::exists(dir / "out" / "entropy_profile.csv"));
}

TEST(Cli, VerifyGaussianPasses) {
  const auto dir = scratch("verify");
  const json cfg = {{"phi", {{"id", "quadratic"}}},
                    {"entropy", {{"kind", "zero"}}},
                    {"field", {{"model", "constant_gaussian"}}},
                    {"mc", {{"replicates", 20000}, {"seed", 11}}},
                    {"u_grid", {1.0, 2.0}}};
  ASSERT_EQ(cli("verify", cfg, dir, dir / "out"), 0) << slurp(dir / "stderr.txt");
  const auto rows = read_csv(dir / "out" / "verdict.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].back(), "PASS");
  EXPECT_EQ(rows[2].back(), "PASS");
}

TEST(Cli, VerifyFailsWhenBoundIsTooSmall) {
  // phi with a tiny radius scale understates the tail: verify must report FAIL.
  const auto dir = scratch("verify_fail");
  const json cfg = {{"phi", {{"id", "quadratic_form"}, {"B", {{0.05}}}}},
                    {"entropy", {{"kind", "zero"}}},
                    {"field", {{"model", "constant_gaussian"}}},
                    {"mc", {{"replicates", 20000}, {"seed", 11}}},
                    {"u_grid", {1.5}}};
  EXPECT_EQ(cli("verify", cfg, dir, dir / "out"), 1);
  const auto rows = read_csv(dir / "out" / "verdict.csv");
  EXPECT_EQ(rows[1].back(), "FAIL");
}

TEST(Cli, MalformedIdExitsTwoWithoutFiles) {
  const auto dir = scratch("bad");
  const json cfg = {{"phi", {{"id", "not_a_function"}}}, {"u_grid", {1.0}}};
  EXPECT_EQ(cli("bound", cfg, dir, dir / "out"), 2);
  EXPECT_NE(slurp(dir / "stderr.txt").find("error[CONFIG]"), std::string::npos);
  EXPECT_TRUE(!fs::exists(dir / "out") || fs::is_empty(dir / "out"));
}

TEST(Cli, OutputsAreIdenticalAcrossThreadCounts) {
  const auto dir = scratch("threads");
  const json cfg = {{"phi", {{"id", "poissonian"}}},
                    {"entropy", {{"kind", "zero"}}},
                    {"field", {{"model", "compound_poisson"}, {"mu", 5.0}}},
                    {"mc", {{"replicates", 20000}, {"seed", 4}}},
                    {"u_grid", {1.0, 2.0}}};
  ASSERT_EQ(cli("verify", cfg, dir, dir / "one", 1), 0) << slurp(dir / "stderr.txt");
  ASSERT_EQ(cli("verify", cfg, dir, dir / "many", 6), 0) << slurp(dir / "stderr.txt");
  for (const char* f : {"bounds.csv", "verdict.csv", "verify.json"})
    EXPECT_EQ(slurp(dir / "one" / f), slurp(dir / "many" / f)) << f;
}

TEST(Config, UnknownKeysAndDefaults) {
  EXPECT_THROW(tailbound::resolve_config("bound", json{{"phi", {{"idd", "quadratic"}}}}), tailbound::Error);
  EXPECT_THROW(tailbound::resolve_config("bound", json{{"nonsense", 1}}), tailbound::Error);
  const auto r = tailbound::resolve_config("bound", json{{"u_grid", {1.0}}});
  EXPECT_EQ(r.at("p_grid").at("count"), 512);
  EXPECT_FALSE(tailbound::is_command("plot"));
}

TEST(Run, ErrorsBecomeStatusAndMessage) {
  const auto dir = scratch("run_api");
  std::ostringstream log;
  tailbound::RunOptions opt;
  opt.out_dir = dir / "out";
  const json cfg = {{"phi", {{"id", "quadratic"}}}, {"conjugate", {{"x_max", 2.0}}}, {"u_grid", {5.0}}};
  const auto r = tailbound::run("bound", cfg, opt, log);
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(r.error_line.rfind("error[", 0), 0u);
  EXPECT_TRUE(r.files.empty());
}
