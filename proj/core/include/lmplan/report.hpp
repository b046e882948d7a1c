#pragma once

#include "lmplan/plan.hpp"
#include "lmplan/sim.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace lmplan {

inline constexpr const char* kTrajectoryHeader =
    "t,rx,ry,rz,vx,vy,vz,ax,ay,az,fx,fy,fz,zmp_x,zmp_y,margin,solve_ms";

void write_trajectory_csv(std::ostream& out, const std::vector<TickRecord>& log);

nlohmann::json metrics_json(const Scenario& sc, const ScenarioMetrics& m, const std::string& digest);

nlohmann::json plan_to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& j);

}  // namespace lmplan
