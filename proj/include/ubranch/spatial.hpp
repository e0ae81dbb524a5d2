#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ubranch/heavy_tail.hpp"
#include "ubranch/lines.hpp"
#include "ubranch/rng.hpp"

namespace ubranch {

/// Branching intensity of a particle as a function of its position.
enum class BranchLaw {
  LogPower,  ///< (ln(1 + x))^gamma
  Constant,  ///< fixed rate, independent of position
};

struct SpatialParticle {
  double position = 0.0;
  double branch_rate = 0.0;
};

struct SpatialConfig {
  JumpMeasure measure{1.0, 1.0, 1.0};
  double gamma = 0.5;
  double horizon = 5.0;
  std::int64_t cap = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t replicate = 0;
  std::int64_t sample_grid = 101;
  double initial_position = 0.0;
  bool movement_enabled = true;
  BranchLaw law = BranchLaw::LogPower;
  double constant_rate = 1.0;
  /// When set to J, asserts online that every branch rate stays <= 2 J^gamma until some particle
  /// exceeds e^J, and that a particle in strip n branches at rate >= n^gamma.
  std::optional<std::int64_t> audit_level;

  void validate() const;
};

struct SpatialTrajectory {
  std::vector<double> sample_times;
  std::vector<std::int64_t> population_at;
  std::vector<double> max_position_at;  ///< M(t)
  std::map<std::int64_t, double> strip_first_hit;  ///< first time a particle lands in [e^n, e^{n+1})
  std::optional<double> cap_hit;
  double horizon = 0.0;
  double root_position = 0.0;  ///< final position of the initial particle
  std::uint64_t events = 0;
};

double log_power_rate(double position, double gamma);

/// floor(ln x) for x >= 1; -1 for x < 1 (below the first strip).
std::int64_t strip_index(double x);

/// Exact event-driven realization: each particle jumps at rate eta (sizes from nu/eta) and
/// branches at rate f(position). Positions are constant between jumps, so a fresh exponential
/// branching clock after every jump is equivalent to the integrated-intensity construction.
SpatialTrajectory simulate_spatial(const SpatialConfig& config);

SpatialTrajectory simulate_spatial(const JumpMeasure& measure, double gamma, double horizon,
                                   std::int64_t cap, std::uint64_t seed);

/// Lines system minorizing ln M(t): branch rate n^gamma, jump to line n' or higher at rate
/// e^{-n' D alpha}.
LinesTrajectory simulate_dominating_lines(double D, double alpha, double gamma, double horizon,
                                          std::int64_t cap, std::uint64_t seed,
                                          std::int64_t sample_grid = 101,
                                          std::uint64_t replicate = 0, bool jumps_enabled = true);

/// Same movement as simulate_spatial, constant branching rate 2 J^gamma.
SpatialTrajectory simulate_const_rate_dominator(const JumpMeasure& measure, std::int64_t J,
                                                double gamma, double horizon, std::int64_t cap,
                                                std::uint64_t seed, std::uint64_t replicate = 0);

}  // namespace ubranch
