#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ubranch/errors.hpp"
#include "ubranch/spatial.hpp"
#include "ubranch/stats.hpp"

using namespace ubranch;

namespace {
SpatialConfig small_config() {
  SpatialConfig c;
  c.horizon = 3.0;
  c.cap = 50'000;
  c.seed = 21;
  c.sample_grid = 31;
  return c;
}
}  // namespace

TEST_CASE("strip index") {
  CHECK(strip_index(1.0) == 0);
  CHECK(strip_index(std::numbers::e) == 1);
  CHECK(strip_index(10.0) == 2);
  CHECK(strip_index(0.5) == -1);
  CHECK(log_power_rate(0.0, 0.5) == 0.0);
  CHECK(log_power_rate(std::numbers::e - 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a particle at the origin cannot branch before it moves") {
  auto c = small_config();
  c.movement_enabled = false;
  const auto t = simulate_spatial(c);
  CHECK(t.population_at.back() == 1);
  CHECK(t.events == 0);
  CHECK(t.max_position_at.back() == 0.0);
  // With movement the population grows only once the root has left 0.
  c.movement_enabled = true;
  for (std::uint64_t r = 0; r < 200; ++r) {
    c.replicate = r;
    const auto m = simulate_spatial(c);
    for (std::size_t i = 0; i < m.sample_times.size(); ++i) {
      if (m.max_position_at[i] == 0.0) CHECK(m.population_at[i] == 1);
    }
  }
}

TEST_CASE("frozen particle at e - 1 is a rate-one Yule process") {
  const int n = 10'000;
  std::vector<double> pop(n);
  for (int r = 0; r < n; ++r) {
    auto c = small_config();
    c.horizon = 2.0;
    c.movement_enabled = false;
    c.initial_position = std::numbers::e - 1.0;
    c.replicate = static_cast<std::uint64_t>(r);
    pop[r] = static_cast<double>(simulate_spatial(c).population_at.back());
  }
  CHECK(stats::mean_ci(pop).ci.contains(std::exp(2.0)));
}

TEST_CASE("constant-rate dominator grows at 2 J^gamma") {
  const JumpMeasure m(1.0, 1.0, 1.0);
  const int n = 10'000;
  std::vector<double> pop(n);
  for (int r = 0; r < n; ++r) {
    const auto t = simulate_const_rate_dominator(m, 3, 0.5, 0.5, 1'000'000, 8, static_cast<std::uint64_t>(r));
    pop[r] = static_cast<double>(t.population_at.back());
  }
  CHECK(stats::mean_ci(pop).ci.contains(std::exp(2.0 * std::sqrt(3.0) * 0.5)));
  CHECK_THROWS_AS(simulate_const_rate_dominator(m, 0, 0.5, 0.5, 10, 8), DomainError);
}

TEST_CASE("spatial trajectories are deterministic and monotone") {
  const auto c = small_config();
  const auto a = simulate_spatial(c);
  const auto b = simulate_spatial(c);
  CHECK(a.population_at == b.population_at);
  CHECK(a.max_position_at == b.max_position_at);
  CHECK(a.strip_first_hit == b.strip_first_hit);
  for (std::uint64_t r = 0; r < 100; ++r) {
    auto d = c;
    d.replicate = r;
    const auto t = simulate_spatial(d);
    CHECK(t.max_position_at.front() == 0.0);
    for (std::size_t i = 1; i < t.sample_times.size(); ++i) {
      CHECK(t.max_position_at[i] >= t.max_position_at[i - 1]);
      CHECK(t.population_at[i] >= t.population_at[i - 1]);
    }
    for (const auto& [strip, time] : t.strip_first_hit) {
      CHECK(strip >= 0);
      CHECK(time >= 0.0);
      CHECK(time <= c.horizon);
    }
  }
}

TEST_CASE("spatial config validation") {
  auto c = small_config();
  c.gamma = 1.0;
  CHECK_THROWS_AS(simulate_spatial(c), InvariantError);
  c = small_config();
  c.horizon = -1.0;
  CHECK_THROWS_AS(simulate_spatial(c), InvariantError);
  c = small_config();
  c.cap = 0;
  CHECK_THROWS_AS(simulate_spatial(c), InvariantError);
  c = small_config();
  c.cap = 20;
  c.horizon = 50.0;
  CHECK(simulate_spatial(c).cap_hit);
}

TEST_CASE("online audit of the branch-rate sandwich") {
  auto c = small_config();
  c.audit_level = 6;
  for (std::uint64_t r = 0; r < 50; ++r) {
    c.replicate = r;
    CHECK_NOTHROW(simulate_spatial(c));
  }
}

TEST_CASE("dominating lines") {
  const auto zero = simulate_dominating_lines(1.0, 1.0, 0.5, 0.0, 100, 3);
  REQUIRE(zero.sample_times.size() == 1);
  CHECK(zero.population_at[0] == 1);
  CHECK(zero.max_line_at[0] == 1);
  const int n = 10'000;
  std::vector<double> pop(n);
  for (int r = 0; r < n; ++r) {
    const auto t = simulate_dominating_lines(1.0, 1.0, 0.5, 1.5, 1'000'000, 3, 11, static_cast<std::uint64_t>(r), false);
    CHECK(t.max_line_at.back() == 1);
    pop[r] = static_cast<double>(t.population_at.back());
  }
  CHECK(stats::mean_ci(pop).ci.contains(std::exp(1.5)));
  CHECK_THROWS_AS(simulate_dominating_lines(1.0, 1.0, 0.5, -1.0, 100, 3), DomainError);
}
