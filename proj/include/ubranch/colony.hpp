#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ubranch/analytic.hpp"
#include "ubranch/rng.hpp"

namespace ubranch {

struct ColonyConfig {
  GWRates rates;
  double horizon = 10.0;
  std::int64_t cap = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t replicate = 0;
  /// Also track X'' (deaths ignored) and the death counter N on shared birth events.
  bool coupled = true;
  /// Keep a per-particle genealogy of X' (needed by reduced_counts).
  bool record_genealogy = false;
};

/// One particle of X': alive on [birth, death). `parent` is -1 for the founder.
struct Lineage {
  double birth = 0.0;
  double death = std::numeric_limits<double>::infinity();
  std::int64_t parent = -1;
};

/// Single-line colony: X' is GW(lambda, mu); X'' shares every birth of X' but keeps the dead
/// (they and their offspring keep splitting at rate lambda), so X'' is GW(lambda).
/// Paths are stored as step functions at event times, starting at t = 0.
struct ColonyRealization {
  std::vector<double> times;
  std::vector<std::int64_t> x_prime;
  std::vector<std::int64_t> x_double;
  std::vector<std::int64_t> deaths;
  std::vector<Lineage> genealogy;
  double horizon = 0.0;
  std::optional<double> cap_hit;
  std::optional<double> extinction_time;  ///< first time X' hits 0
  bool coupled = true;
  bool has_genealogy = false;

  std::size_t index_at(double t) const;
  std::int64_t x_prime_at(double t) const { return x_prime[index_at(t)]; }
  std::int64_t x_double_at(double t) const { return x_double[index_at(t)]; }
  std::int64_t deaths_at(double t) const { return deaths[index_at(t)]; }
};

ColonyRealization simulate_line_colony(const ColonyConfig& config);
ColonyRealization simulate_line_colony(const ColonyConfig& config, Rng& rng);

/// Number of particles alive at t whose descendants are still alive at survival_horizon,
/// read off the genealogy. Requires survival_horizon >= 5 t and a genealogy that covers
/// survival_horizon without hitting the cap.
std::int64_t reduced_counts(const ColonyRealization& colony, double t, double survival_horizon);

/// Same statistic as reduced_counts, drawn without storing a genealogy: the colony is run to t,
/// then each living particle's subtree is run until it dies out or survives to the horizon.
/// For lambda > mu a subtree that reaches `safe_size(rates)` particles is counted as surviving;
/// the neglected extinction probability is at most (mu/lambda)^safe_size <= 1e-30.
std::int64_t sample_reduced_count(const GWRates& rates, double t, double survival_horizon, Rng& rng);

std::int64_t safe_size(const GWRates& rates);

/// Draw from the marginal law of GW(lambda, mu) at time t, one founder (closed form).
std::int64_t sample_bd_marginal(const GWRates& rates, double t, Rng& rng);

}  // namespace ubranch
