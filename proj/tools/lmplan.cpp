// Scenario runner: run closed-loop scenarios, solve a single planning
// instance, or re-check a stored plan.

#include "lmplan/plan_check.hpp"
#include "lmplan/planner.hpp"
#include "lmplan/report.hpp"
#include "lmplan/scenario_config.hpp"
#include "lmplan/sim.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kUnstable = 2;

struct Common {
  std::string config;
  std::string out = ".";
  std::string mode;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  double tick_ms = 0.0;
  bool stable = false;
};

lmplan::Scenario load(const Common& c, std::string& digest) {
  const std::string text = lmplan::read_file(c.config);
  lmplan::Scenario sc = lmplan::parse_scenario(text);
  lmplan::ScenarioOverrides o;
  std::string extra;
  if (!c.mode.empty()) {
    o.mode = lmplan::parse_mode(c.mode);
    extra += "\ncli.mode=" + c.mode;
  }
  if (c.seed) {
    o.seed = c.seed;
    extra += "\ncli.seed=" + std::to_string(c.seed);
  }
  if (c.horizon > 0) {
    o.horizon = c.horizon;
    extra += "\ncli.horizon=" + std::to_string(c.horizon);
  }
  if (c.tick_ms > 0) {
    o.tick_ms = c.tick_ms;
    extra += "\ncli.tick=" + std::to_string(c.tick_ms);
  }
  lmplan::apply_overrides(sc, o);
  digest = lmplan::config_digest(text + extra);
  return sc;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream f(path);
  if (!f) throw lmplan::ConfigError("cannot write " + path.string());
  return f;
}

int cmd_run(const Common& c) {
  std::string digest;
  const lmplan::Scenario sc = load(c, digest);
  lmplan::ScenarioResult res = lmplan::run_scenario(sc);
  if (c.stable) {
    for (auto& r : res.log) r.solve_ms = 0.0;
    res.metrics.solve = {};
    res.metrics.warm_solve = {};
    res.metrics.horizon_to_solve = 0.0;
  }
  const std::string stem = sc.name + "_" + lmplan::to_string(sc.task.mode);
  {
    auto csv = open_out(c.out, stem + ".csv");
    lmplan::write_trajectory_csv(csv, res.log);
  }
  {
    auto js = open_out(c.out, stem + ".json");
    js << lmplan::metrics_json(sc, res.metrics, digest).dump(2) << "\n";
  }
  const auto& m = res.metrics;
  std::cout << sc.name << " (" << lmplan::to_string(sc.task.mode) << "): plans=" << m.plans
            << " stale=" << m.stale_plans << " min_margin=" << m.min_zmp_margin
            << " friction_violations=" << m.friction_violations << " median_solve_ms=" << m.solve.median_ms << "\n";
  if (m.failed) {
    std::cerr << "scenario failed: " << m.failure << "\n";
    return kUnstable;
  }
  if (m.zmp_exit) {
    std::cerr << "ZMP left the support polygon at t=" << m.first_exit_time << " s\n";
    return kUnstable;
  }
  return kOk;
}

int cmd_solve(const Common& c) {
  std::string digest;
  const lmplan::Scenario sc = load(c, digest);
  const lmplan::PlanningInstance inst = lmplan::build_instance(sc.initial, sc.task, sc.planner, nullptr, 0.0);
  std::cout << inst.problem.dimension_report() << "\n";
  lmplan::Plan plan;
  try {
    plan = lmplan::plan_once(sc.initial, sc.task, sc.planner, nullptr, 0.0);
  } catch (const lmplan::PlanningError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kUnstable;
  }
  nlohmann::json j = lmplan::plan_to_json(plan);
  j["config_digest"] = digest;
  j["problem"] = {{"variables", inst.problem.dimension()},
                  {"equalities", inst.problem.eq.rows()},
                  {"linear_inequalities", inst.problem.ineq.linear_rows()},
                  {"nonlinear_inequalities", inst.problem.ineq.nonlinear_rows()}};
  if (c.stable) j["stats"]["solve_ms"] = 0.0;
  auto out = open_out(c.out, sc.name + "_plan.json");
  out << j.dump(2) << "\n";
  std::cout << "status=" << lmplan::to_string(plan.stats.status) << " iterations=" << plan.stats.iterations
            << " solve_ms=" << plan.stats.solve_ms << "\n";
  return kOk;
}

int cmd_check(const Common& c, const std::string& log_path) {
  std::string digest;
  const lmplan::Scenario sc = load(c, digest);
  std::ifstream in(log_path);
  if (!in) throw lmplan::ConfigError("cannot open '" + log_path + "'");
  lmplan::Plan plan;
  try {
    plan = lmplan::plan_from_json(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    throw lmplan::ConfigError(std::string("malformed plan log: ") + e.what());
  }
  const lmplan::RobotState& st = plan.created_from;
  plan.support = lmplan::generate_support_sequence({st.feet, st.r, st.v}, sc.task.v_des, sc.planner.gait,
                                                   st.gait_phase);
  if (plan.support.polygons.size() != plan.motion.pieces().size()) {
    std::cerr << "plan has " << plan.motion.pieces().size() << " motion splines but the schedule has "
              << plan.support.polygons.size() << " support phases\n";
    return kUnstable;
  }
  lmplan::RobotParams robot = sc.planner.robot;
  robot.rotation = st.rotation;
  const lmplan::CheckReport rep = lmplan::check_plan(plan, robot, sc.task.contact);
  std::cout << "samples=" << rep.samples << " junction=" << std::max(rep.junction_position, rep.junction_velocity)
            << " initial=" << std::max(rep.initial_position, rep.initial_velocity) << " zmp=" << rep.zmp
            << " friction=" << rep.friction << " free=" << rep.free_force << " torque=" << rep.torque
            << " box=" << rep.box << "\n";
  const auto bad = rep.failures();
  for (const auto& b : bad) std::cerr << b << "\n";
  return bad.empty() ? kOk : kUnstable;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Legged loco-manipulation planner: scenarios, single solves and plan checks"};
  app.require_subcommand(1);
  Common c;
  std::string log_path;

  auto add_common = [&c](CLI::App* sub) {
    sub->add_option("config", c.config, "scenario config file")->required();
    sub->add_option("--mode", c.mode, "planner mode")->check(CLI::IsMember({"full", "baseline"}));
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--horizon", c.horizon, "planning horizon in seconds")->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--tick", c.tick_ms, "replanning tick in milliseconds")->check(CLI::PositiveNumber);
    sub->add_flag("--stable", c.stable, "zero wall-clock timing fields so outputs are byte-stable");
  };
  CLI::App* run = app.add_subcommand("run", "run a closed-loop scenario");
  add_common(run);
  CLI::App* solve = app.add_subcommand("solve", "solve one planning instance from the initial state");
  add_common(solve);
  CLI::App* check = app.add_subcommand("check", "re-validate a stored plan");
  add_common(check);
  check->add_option("log", log_path, "plan JSON written by solve")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(c);
    if (*solve) return cmd_solve(c);
    if (*check) return cmd_check(c, log_path);
  } catch (const lmplan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const lmplan::ScheduleError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnstable;
  }
  return kUsage;
}
