// Solve-time benchmarks for the stationary (N = 36) and walking (N = 108)
// planning problems, cold and warm started.

#include "lmplan/planner.hpp"
#include "lmplan/scenario_config.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace lmplan;

namespace {

Scenario scenario(const std::string& name) { return load_scenario(std::string(LMPLAN_SCENARIO_DIR "/") + name + ".cfg"); }

RobotState walking_state(const Scenario& sc) {
  RobotState s = sc.initial;
  s.v = sc.task.v_des;
  return s;
}

void plan_cold(benchmark::State& st, const Scenario& sc, const RobotState& s, double now) {
  int n = 0;
  for (auto _ : st) {
    const Plan p = plan_once(s, sc.task, sc.planner, nullptr, now);
    n = kCoeffsPerSpline * static_cast<int>(p.motion.pieces().size() + p.force.pieces().size());
    benchmark::DoNotOptimize(p.horizon);
  }
  st.counters["N"] = n;
}

// Replans 50 ms after a previous plan, starting where that plan says the robot is.
void plan_warm(benchmark::State& st, const Scenario& sc, const RobotState& s, double now) {
  const Plan prev = plan_once(s, sc.task, sc.planner, nullptr, now);
  const PlanSample at = sample_plan(prev, 0.05);
  RobotState next = s;
  next.r = at.r;
  next.v = at.v;
  next.a = at.a;
  next.f_manip = at.f;
  next.gait_phase = s.gait_phase + 0.05;
  for (auto _ : st) {
    const Plan p = plan_once(next, sc.task, sc.planner, &prev, now + 0.05);
    benchmark::DoNotOptimize(p.horizon);
  }
}

void BM_StationaryCold(benchmark::State& st) {
  const Scenario sc = scenario("rail_hold");
  plan_cold(st, sc, sc.initial, 0.0);
}

void BM_StationaryWarm(benchmark::State& st) {
  const Scenario sc = scenario("rail_hold");
  plan_warm(st, sc, sc.initial, 0.0);
}

void BM_WalkingCold(benchmark::State& st) {
  const Scenario sc = scenario("table_push");
  plan_cold(st, sc, walking_state(sc), 0.0);
}

void BM_WalkingWarm(benchmark::State& st) {
  const Scenario sc = scenario("table_push");
  plan_warm(st, sc, walking_state(sc), 0.0);
}

}  // namespace

BENCHMARK(BM_StationaryCold)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StationaryWarm)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_WalkingCold)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_WalkingWarm)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
