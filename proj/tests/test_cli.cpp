#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kScenarios = LMPLAN_SCENARIO_DIR;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LMPLAN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lmplan_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, FullLiftRunSucceeds) {
  const fs::path out = scratch("full");
  EXPECT_EQ(run_cli("run " + kScenarios + "/weight_lift.cfg --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "weight_lift_full.csv"));
  EXPECT_TRUE(fs::exists(out / "weight_lift_full.json"));
  fs::remove_all(out);
}

TEST(Cli, BaselineLiftExitsUnstable) {
  const fs::path out = scratch("baseline");
  EXPECT_EQ(run_cli("run " + kScenarios + "/weight_lift.cfg --mode baseline --out " + out.string()), 2);
  EXPECT_TRUE(fs::exists(out / "weight_lift_baseline.json"));
  fs::remove_all(out);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli("run " + kScenarios + "/does_not_exist.cfg"), 1);
  EXPECT_EQ(run_cli("run"), 1);
  EXPECT_EQ(run_cli("fly " + kScenarios + "/weight_lift.cfg"), 1);
  EXPECT_EQ(run_cli("run " + kScenarios + "/weight_lift.cfg --mode sideways"), 1);
}

TEST(Cli, SolveThenCheckRoundTrip) {
  const fs::path out = scratch("solve");
  for (const char* name : {"weight_lift", "slippery_walk"}) {
    const std::string cfg = kScenarios + "/" + name + ".cfg";
    ASSERT_EQ(run_cli("solve " + cfg + " --out " + out.string()), 0) << name;
    const fs::path plan = out / (std::string(name) + "_plan.json");
    ASSERT_TRUE(fs::exists(plan));
    EXPECT_EQ(run_cli("check " + cfg + " " + plan.string()), 0) << name;
  }
  std::ofstream(out / "broken.json") << "{ not json";
  EXPECT_EQ(run_cli("check " + kScenarios + "/weight_lift.cfg " + (out / "broken.json").string()), 1);
  fs::remove_all(out);
}

TEST(Cli, StableOutputsAreByteIdentical) {
  const fs::path a = scratch("stable_a");
  const fs::path b = scratch("stable_b");
  const std::string cfg = kScenarios + "/rail_hold.cfg --stable --tick 100 ";
  ASSERT_EQ(run_cli("run " + cfg + "--out " + a.string()), 0);
  ASSERT_EQ(run_cli("run " + cfg + "--out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "rail_hold_full.csv"), slurp(b / "rail_hold_full.csv"));
  EXPECT_EQ(slurp(a / "rail_hold_full.json"), slurp(b / "rail_hold_full.json"));
  EXPECT_FALSE(slurp(a / "rail_hold_full.csv").empty());
  fs::remove_all(a);
  fs::remove_all(b);
}
