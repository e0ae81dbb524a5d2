#pragma once

#include <cstdint>
#include <optional>

#include "ubranch/analytic.hpp"
#include "ubranch/rng.hpp"

namespace ubranch {

/// Observation of the events around the first visit of line J:
///   Z_J: line J is reached (before `reach_cutoff`);
///   A_J: at Y_J + t_J line J holds at least q_J particles;
///   B_J: some particle jumps from line J to line 2J during [Y_J + t_J, Y_J + t_J + 1].
struct LevelProbeConfig {
  LinesParams params;
  std::int64_t level = 2;
  double reach_cutoff = 50.0;
  std::int64_t cap = 1'000'000;
};

struct LevelProbeResult {
  bool reached = false;
  bool capped = false;
  double first_hit = 0.0;
  bool a_event = false;
  std::optional<bool> b_event;  ///< set only when a_event holds
  std::int64_t arrivals = 0;    ///< particles that landed on line J up to the decision
  std::uint64_t events = 0;     ///< simulated events below line J
};

/// Lines below J are simulated event by event. Line J itself is resolved in closed form:
/// every particle landing on J at time a founds an independent GW(J^g, C^{J+1}/(1-C)) family,
/// whose size at T = Y_J + t_J is drawn from the exact marginal, and whose chance of producing a
/// J -> 2J jump in [T, T+1] given that size follows from analytic::marked_death_prob.
/// Simulation stops as soon as both events are decided.
LevelProbeResult probe_level(const LevelProbeConfig& config, Rng& rng);

/// Reference route: simulates every particle on lines <= J explicitly. Used to cross-check
/// probe_level on small levels.
LevelProbeResult probe_level_direct(const LevelProbeConfig& config, Rng& rng);

}  // namespace ubranch
