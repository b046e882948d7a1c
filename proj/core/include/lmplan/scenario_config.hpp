#pragma once

#include "lmplan/sim.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace lmplan {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses flat `section.key = value` text. Lines starting with '#' and blank
/// lines are ignored; vectors are comma separated; unknown keys are errors.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Command-line overrides applied on top of a loaded scenario.
struct ScenarioOverrides {
  std::optional<PlanMode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon;   // seconds
  std::optional<double> tick_ms;
};

void apply_overrides(Scenario& sc, const ScenarioOverrides& o);

/// Rescales the gait timing so one cycle (or the stationary hold) lasts `horizon` seconds.
void set_horizon(PlannerConfig& cfg, double horizon);

/// 64-bit FNV-1a of the normalized key/value content, as 16 hex digits.
std::string config_digest(const std::string& text);

std::string read_file(const std::string& path);

}  // namespace lmplan
