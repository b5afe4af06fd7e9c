#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "test_paths.hpp"

namespace {

namespace fs = std::filesystem;

const char* kSmallScenario = R"({
  "name": "cli-small",
  "chief0": { "r_km": [-13395, 0, -70841], "v_kmps": [0, 0.1055, 0] },
  "deputy0": { "rho_km": [-20, -10, 5], "rho_dot_kmps": [0, 0, 0] },
  "deputy_f": { "rho_km": [20, 10, -5], "rho_dot_kmps": [0, 0, 0] },
  "window_hours": 24,
  "n_grid_steps": 100,
  "strategy": { "kind": "numerical_integration" },
  "mpc": { "n_segments": 2, "seed": 3 },
  "montecarlo": { "n_grid_steps": 50, "window_min_tu": 0.3, "window_max_tu": 0.5 }
})";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lunarkd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    scenario_ = (dir_ / "small.json").string();
    std::ofstream(scenario_) << kSmallScenario;
  }
  void TearDown() override { fs::remove_all(dir_); }

  static int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(LUNARKD_CLI) + " " + args +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string write(const std::string& name, const std::string& text) const {
    const std::string p = (dir_ / name).string();
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
  std::string scenario_;
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("plan"), 2);
  EXPECT_EQ(run("--bogus plan " + scenario_), 2);
  EXPECT_EQ(run("--trials -3 montecarlo"), 2);
  EXPECT_EQ(run("--out " + out("mc") + " montecarlo"), 2);
  EXPECT_EQ(run("--seed 1 --out " + out("mc") + " montecarlo"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, ParseErrorsExitThree) {
  EXPECT_EQ(run("--out " + out("a") + " plan " + write("bad.json", "{ nope")), 3);
  std::string unknown = kSmallScenario;
  unknown.insert(1, "\"colour\": 1,");
  EXPECT_EQ(run("--out " + out("a") + " plan " + write("unknown.json", unknown)), 3);
  EXPECT_EQ(run("--strategy warp --out " + out("a") + " plan " + scenario_), 3);
  EXPECT_EQ(run("--out " + out("a") + " simulate " + scenario_ + " --plan " +
                write("plan.csv", "t,dv\n1,2\n")),
            3);
}

TEST_F(Cli, IoErrorsExitSix) {
  EXPECT_EQ(run("--out " + out("a") + " plan " + out("missing.json")), 6);
  EXPECT_EQ(run("--constants " + out("missing.json") + " --out " + out("a") + " plan " + scenario_), 6);
  write("blocker", "x");
  EXPECT_EQ(run("--out " + out("blocker/sub") + " plan " + scenario_), 6);
  EXPECT_EQ(run("--seed 1 --trials 1 --out " + out("mc") + " montecarlo --catalog " + out("none.csv")), 6);
}

TEST_F(Cli, SolverErrorExitsFour) {
  std::string text = kSmallScenario;
  const std::string from = "\"n_grid_steps\": 100,";
  text.replace(text.find(from), from.size(), "\"n_grid_steps\": 100, \"solver\": {\"max_refine_iters\": 1, \"init_keep\": 1},");
  EXPECT_EQ(run("--out " + out("a") + " plan " + write("budget.json", text)), 4);
}

TEST_F(Cli, PlanWritesArtifacts) {
  ASSERT_EQ(run("--out " + out("p") + " plan " + scenario_), 0);
  for (const char* f : {"plan.csv", "report.txt", "trajectory.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out("p/" + std::string(f)))) << f;
  }
  EXPECT_EQ(slurp(out("p/plan.csv")).substr(0, 35), "t_hours,dv_x_mps,dv_y_mps,dv_z_mps\n");
  const auto m = nlohmann::json::parse(slurp(out("p/manifest.json")));
  EXPECT_EQ(m.at("command"), "plan");
  EXPECT_EQ(m.at("strategy"), "numerical_integration");
  EXPECT_EQ(m.at("config_hash").get<std::string>().size(), 16u);

  // Flying the written plan reproduces the planned trajectory.
  ASSERT_EQ(run("--out " + out("s") + " simulate " + scenario_ + " --plan " + out("p/plan.csv")), 0);
  EXPECT_TRUE(fs::exists(out("s/trajectory.csv")));
}

TEST_F(Cli, StrategyOverride) {
  ASSERT_EQ(run("--strategy hcw --out " + out("h") + " plan " + scenario_), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(out("h/manifest.json"))).at("strategy"), "hcw");
  ASSERT_EQ(run("--strategy matrix_exponential --out " + out("m") + " plan " + scenario_), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(out("m/manifest.json"))).at("strategy"), "matrix_exponential");
  EXPECT_NE(slurp(out("h/plan.csv")), slurp(out("m/plan.csv")));
}

TEST_F(Cli, ConstantsFromEnvironment) {
  const std::string a = out("env_ok"), b = out("flag");
  EXPECT_EQ(run("--out " + a + " plan " + scenario_,
                "LUNARKD_CONSTANTS=" + lunarkd::test::data_path("constants.json")),
            0);
  EXPECT_EQ(run("--out " + b + " plan " + scenario_), 0);
  EXPECT_EQ(slurp(a + "/plan.csv"), slurp(b + "/plan.csv"));
  EXPECT_EQ(run("--out " + out("env_bad") + " plan " + scenario_, "LUNARKD_CONSTANTS=" + out("nope.json")), 6);
  // The flag wins over the environment.
  EXPECT_EQ(run("--constants " + lunarkd::test::data_path("constants.json") + " --out " + out("c") +
                    " plan " + scenario_,
                "LUNARKD_CONSTANTS=" + out("nope.json")),
            0);
}

TEST_F(Cli, ErrorsSubcommand) {
  ASSERT_EQ(run("--out " + out("e") + " errors " + scenario_ + " --samples 12"), 0);
  const std::string csv = slurp(out("e/errors.csv"));
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_NE(header.find("matrix_exponential_rms_km"), std::string::npos);
  EXPECT_NE(header.find("ya_norm_km"), std::string::npos);
  ASSERT_EQ(run("--strategy hcw --out " + out("e1") + " errors " + scenario_ + " --samples 12"), 0);
  const std::string one = slurp(out("e1/errors.csv"));
  EXPECT_EQ(one.substr(0, one.find('\n')), "t_hours,hcw_rms_km,hcw_norm_km");
}

TEST_F(Cli, MonteCarloIsDeterministic) {
  const std::string common = "--seed 5 --trials 2 ";
  ASSERT_EQ(run(common + "--out " + out("r1") + " montecarlo " + scenario_), 0);
  ASSERT_EQ(run(common + "--jobs 2 --out " + out("r2") + " montecarlo " + scenario_), 0);
  for (const char* f : {"campaign_trials.csv", "campaign_summary.csv"}) {
    EXPECT_EQ(slurp(out("r1/") + f), slurp(out("r2/") + f)) << f;
  }
  EXPECT_TRUE(fs::exists(out("r1/campaign_runtimes.csv")));
  ASSERT_EQ(run("--seed 6 --trials 2 --out " + out("r3") + " montecarlo " + scenario_), 0);
  EXPECT_NE(slurp(out("r1/campaign_trials.csv")), slurp(out("r3/campaign_trials.csv")));
  ASSERT_EQ(run(common + "--strategy ya --out " + out("r4") + " montecarlo " + scenario_), 0);
  const std::string summary = slurp(out("r4/campaign_summary.csv"));
  EXPECT_EQ(summary.find("hcw"), std::string::npos);
  EXPECT_NE(summary.find("ya,"), std::string::npos);
}

TEST_F(Cli, CatalogFromEnvironment) {
  EXPECT_EQ(run("--seed 1 --trials 1 --out " + out("mc") + " montecarlo " + scenario_,
                "LUNARKD_CATALOG=" + out("none.csv")),
            6);
}

TEST_F(Cli, MpcWritesComparison) {
  ASSERT_EQ(run("--out " + out("mpc") + " mpc " + scenario_), 0);
  const std::string s = slurp(out("mpc/mpc_summary.csv"));
  EXPECT_EQ(s.substr(0, s.find('\n')), "metric,mpc,open_loop");
  for (const char* f : {"mpc_segment_00.csv", "mpc_segment_01.csv", "mpc_executed.csv",
                        "open_loop_executed.csv", "mpc_trajectory.csv", "open_loop_trajectory.csv",
                        "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out("mpc/" + std::string(f)))) << f;
  }
}

}  // namespace
