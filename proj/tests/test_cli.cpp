#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "infodeleg/cli/commands.hpp"

namespace fs = std::filesystem;
using infodeleg::cli::dispatch;
using infodeleg::cli::Overrides;

namespace {

const fs::path kConfigs = INFODELEG_CONFIG_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "infodeleg_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run run(const std::string& command, const fs::path& config, Overrides o = {}) {
  std::ostringstream out, err;
  const int code = dispatch(command, config.string(), o, out, err);
  return {code, out.str(), err.str()};
}

Run run_in(const std::string& command, const std::string& config, const fs::path& dir, Overrides o = {}) {
  o.out_dir = dir.string();
  return run(command, kConfigs / config, o);
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const auto p = dir / "config.json";
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

const std::string kBase =
    R"("prior": {"kind": "uniform"}, "outside_option": {"kind": "beta", "params": {"a": 2, "b": 2}})";

}  // namespace

TEST(Cli, FullDelegationReport) {
  const auto dir = scratch("fd");
  const auto r = run_in("full-delegation", "uniform_beta22.json", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = read_json(dir / "full_delegation.json");
  EXPECT_NEAR(j["x_star"].get<double>(), 0.25, 1e-11);
  EXPECT_NEAR(j["y_star"].get<double>(), 0.625, 1e-11);
  EXPECT_NEAR(j["atom_mass"].get<double>(), 0.75, 1e-11);
  EXPECT_NEAR(j["experimenter_payoff"].get<double>(), 539.0 / 1024.0, 1e-11);
  EXPECT_TRUE(j["assumptions"]["informativeness_ok"].get<bool>());
  std::string header;
  const auto rows = read_csv(dir / "icdf_full_delegation.csv", &header);
  EXPECT_EQ(header, "m,I_H,I_delta_mu,I_F_star");
  EXPECT_NEAR(rows.back()[1], 0.5, 1e-11);
  EXPECT_NEAR(rows.back()[3], 0.5, 1e-11);
}

TEST(Cli, HighMeanPriorExitsWithMargin) {
  const auto r = run_in("full-delegation", "high_mean.json", scratch("hm"));
  EXPECT_EQ(r.code, 2);
  // Beta(16, 1) prior: mu = 16/17; Beta(2, 2) payoff g(mu) mu - G(mu).
  const double mu = 16.0 / 17.0;
  const double margin = 6 * mu * (1 - mu) * mu - (3 * mu * mu - 2 * mu * mu * mu);
  EXPECT_LT(margin, 0.0);
  EXPECT_NE(r.err.find(infodeleg::fmt(margin)), std::string::npos) << r.err;
}

TEST(Cli, ConfigErrorsExitOne) {
  const auto dir = scratch("bad");
  EXPECT_EQ(run("full-delegation", write_config(dir, "{ not json")).code, 1);
  EXPECT_EQ(run("full-delegation", write_config(dir, "{" + kBase + R"(, "colour": 1})")).code, 1);
  EXPECT_EQ(run("full-delegation", write_config(dir, R"({"prior": {"kind": "uniform"}})")).code, 1);
  EXPECT_EQ(run("oracle", write_config(dir, "{" + kBase + R"(, "oracle": {"n": 100}})")).code, 1);
  EXPECT_EQ(run("oracle", write_config(dir, "{" + kBase + R"(, "oracle": {"n": 49}})")).code, 1);
  EXPECT_EQ(run("oracle", write_config(dir, "{" + kBase + R"(, "oracle": {"epsilon": 0}})")).code, 1);
  EXPECT_EQ(run("optimize", write_config(dir, "{" + kBase + R"(, "objective": {"kind": "welfare_weighted", "lambda": 2}})")).code, 1);
  EXPECT_EQ(run("optimize", write_config(dir, "{" + kBase + R"(, "objective": {"kind": "custom", "polynomial": [0, 0, -1]}})")).code, 1);
  EXPECT_EQ(run("full-delegation", dir / "missing.json").code, 1);
  Overrides bad_grid;
  bad_grid.grid = 202;
  EXPECT_EQ(run("oracle", kConfigs / "uniform_beta22.json", bad_grid).code, 1);
  Overrides bad_scenario;
  bad_scenario.scenario = "w_shaped";
  EXPECT_EQ(run("verify", kConfigs / "uniform_beta22.json", bad_scenario).code, 1);
  EXPECT_EQ(run("frobnicate", kConfigs / "uniform_beta22.json").code, 1);
}

TEST(Cli, MicSweepTable) {
  const auto dir = scratch("sweep");
  ASSERT_EQ(run_in("mic-sweep", "uniform_beta22.json", dir).code, 0);
  std::string header;
  const auto rows = read_csv(dir / "mic_sweep.csv", &header);
  EXPECT_EQ(header, "y,s,t,x,U_D,U_E");
  ASSERT_EQ(rows.size(), 257u);
  EXPECT_NEAR(rows.front()[0], 0.625, 1e-11);
  const auto& last = rows.back();
  EXPECT_NEAR(last[0], 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(last[1], 0.0, 1e-9);
  EXPECT_NEAR(last[2], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(last[3], 1.0 / 6.0, 1e-9);
  const auto range = read_json(dir / "mic_range.json");
  EXPECT_EQ(range["binding_constraint"], "s >= 0");
  EXPECT_NEAR(range["y_max"].get<double>(), 2.0 / 3.0, 1e-9);
}

TEST(Cli, SweepLambdaZeroPeaksAtFirstRow) {
  const auto dir = scratch("l0");
  ASSERT_EQ(run_in("mic-sweep", "lambda0.json", dir).code, 0);
  const auto rows = read_csv(dir / "mic_sweep.csv");
  for (const auto& r : rows) {
    EXPECT_LE(r[4], rows.front()[4] + 1e-12);
    EXPECT_DOUBLE_EQ(r[4], r[5]);
  }
}

TEST(Cli, SweepOrderingForCustomObjective) {
  const auto dir = scratch("m2");
  ASSERT_EQ(run_in("mic-sweep", "custom_m2.json", dir).code, 0);
  const auto rows = read_csv(dir / "mic_sweep.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i][0], rows[i - 1][0]);
    EXPECT_LT(rows[i][3], rows[i - 1][3]) << "x must fall as y rises, row " << i;
  }
}

TEST(Cli, OptimizeReport) {
  const auto dir = scratch("opt");
  ASSERT_EQ(run_in("optimize", "uniform_beta22.json", dir).code, 0);
  const auto j = read_json(dir / "optimize.json");
  EXPECT_NEAR(j["y_opt"].get<double>(), 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(j["params"]["s"].get<double>(), 0.0, 1e-9);
  EXPECT_NEAR(j["params"]["x"].get<double>(), 1.0 / 6.0, 1e-9);
  EXPECT_NEAR(j["params"]["t"].get<double>(), 1.0 / 3.0, 1e-9);
  EXPECT_TRUE(j["binding_at_y_max"].get<bool>());
  EXPECT_NEAR(j["gain"].get<double>(), 1035.0 / 7776.0 - 0.126763916015625, 1e-10);
  EXPECT_TRUE(j["certificate"]["convex_ok"].get<bool>());
  EXPECT_TRUE(j["certificate"]["dominates_ok"].get<bool>());
  EXPECT_TRUE(j["certificate"]["support_contact_ok"].get<bool>());
  // Restriction: atom at x carrying [0, t], then the prior on [t, 1].
  const auto& segs = j["restriction"]["segments"];
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_NEAR(segs[0]["atom"]["location"].get<double>(), 1.0 / 6.0, 1e-9);
  EXPECT_NEAR(segs[0]["atom"]["mass"].get<double>(), 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(segs[1]["follows_prior"]["a"].get<double>(), 1.0 / 3.0, 1e-9);
  EXPECT_TRUE(fs::exists(dir / "certificate.csv"));
  EXPECT_TRUE(fs::exists(dir / "icdf_optimum.csv"));
}

TEST(Cli, OptimizeLambdaZeroStaysAtFullDelegation) {
  const auto dir = scratch("optl0");
  ASSERT_EQ(run_in("optimize", "lambda0.json", dir).code, 0);
  EXPECT_NEAR(read_json(dir / "optimize.json")["y_opt"].get<double>(), 0.625, 1e-9);
}

TEST(Cli, VerifyScenarios) {
  const auto dir = scratch("scen");
  const auto u = run_in("verify", "uninformed_dm.json", dir);
  EXPECT_EQ(u.code, 0) << u.out;
  EXPECT_NE(u.out.find("PASS uninformed_dm_support_bound"), std::string::npos);
  const auto m = run_in("verify", "m_shaped.json", dir);
  EXPECT_EQ(m.code, 0) << m.out;
  EXPECT_NE(m.out.find("PASS m_shaped_binary_support"), std::string::npos);
}

TEST(Cli, VerifyFullBatteryPasses) {
  const auto dir = scratch("verify");
  const auto r = run_in("verify", "uniform_beta22.json", dir);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  const auto text = slurp(dir / "verify.csv");
  EXPECT_EQ(text.rfind("check,parameter,passed,value\n", 0), 0u);
  EXPECT_NE(text.find("certificate,"), std::string::npos);
  EXPECT_NE(text.find("oracle_mic_ic,"), std::string::npos);
  EXPECT_NE(text.find("perturbation_derivative_positive,"), std::string::npos);
}

TEST(Cli, VerifyNamesFailedCheck) {
  // Affine u_D: the perturbation derivative is exactly zero, so the sign check fails.
  const auto dir = scratch("verify_fail");
  Overrides o;
  o.out_dir = (dir / "out").string();
  o.grid = 51;
  const auto cfg = write_config(dir, "{" + kBase + R"(, "objective": {"kind": "custom", "polynomial": [0, 1]}})");
  const auto r = run("verify", cfg, o);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("FAIL perturbation_derivative_positive"), std::string::npos) << r.out;
}

TEST(Cli, OracleDumps) {
  const auto dir = scratch("oracle");
  Overrides o;
  o.grid = 101;
  ASSERT_EQ(run_in("oracle", "uniform_beta22.json", dir, o).code, 0);
  const auto j = read_json(dir / "oracle.json");
  EXPECT_EQ(j["n"].get<int>(), 101);
  EXPECT_NEAR(j["value"].get<double>(), 539.0 / 1024.0, 0.01);
  // y* = 0.625 is off this grid, so its atom lands on the two neighbours.
  EXPECT_EQ(j["support_above_r0"].get<int>(), 2);
  std::vector<double> above;
  for (const auto& r : read_csv(dir / "oracle_posterior.csv")) {
    if (r[0] > 0.5 && r[1] > 1e-9) above.push_back(r[0]);
  }
  ASSERT_EQ(above.size(), 2u);
  EXPECT_NEAR(above[0], 0.62, 1e-12);
  EXPECT_NEAR(above[1], 0.63, 1e-12);
  EXPECT_EQ(read_csv(dir / "oracle_instance.csv").size(), 101u);
  EXPECT_TRUE(fs::exists(dir / "oracle_plan.csv"));
}

TEST(Cli, OutputsAreByteIdentical) {
  Overrides o;
  o.grid = 101;
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto* cmd : {"full-delegation", "mic-sweep", "optimize", "oracle"}) {
    ASSERT_EQ(run_in(cmd, "uniform_beta22.json", a, o).code, 0);
    ASSERT_EQ(run_in(cmd, "uniform_beta22.json", b, o).code, 0);
  }
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
  EXPECT_GE(files, 10u);
}

#ifdef INFODELEG_CLI
namespace {
int exit_status(const std::string& args) {
  const std::string cmd = std::string(INFODELEG_CLI) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}
}  // namespace

TEST(CliBinary, ExitCodes) {
  const auto dir = scratch("bin");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(exit_status("full-delegation --config " + (kConfigs / "uniform_beta22.json").string() + out), 0);
  EXPECT_EQ(exit_status("full-delegation --config " + (kConfigs / "high_mean.json").string() + out), 2);
  EXPECT_EQ(exit_status("full-delegation" + out), 1);
  EXPECT_EQ(exit_status("full-delegation --config " + (dir / "nope.json").string()), 1);
  EXPECT_EQ(exit_status("oracle --grid 50 --config " + (kConfigs / "uniform_beta22.json").string() + out), 1);
  EXPECT_EQ(exit_status(""), 1);
  EXPECT_EQ(exit_status("--help"), 0);
}
#endif
