#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "ubranch/errors.hpp"
#include "ubranch/heavy_tail.hpp"
#include "ubranch/stats.hpp"

using namespace ubranch;

namespace {
constexpr double e = std::numbers::e;

// 3-sigma binomial band around p for n draws.
bool within_binomial(double observed, double p, double n) {
  return std::abs(observed - p) <= 3.0 * std::sqrt(p * (1 - p) / n) + 1e-12;
}
}  // namespace

TEST_CASE("Pareto tail in closed form") {
  const JumpMeasure m(1.0, 1.0, 1.0);
  CHECK(m.tail(1.0) == doctest::Approx(1.0));
  CHECK(m.tail(2.0) == doctest::Approx(0.5));
  CHECK(m.tail(0.5) == doctest::Approx(1.0));
  const JumpMeasure m2(2.0, 3.0, 4.0);
  CHECK(m2.tail(6.0) == doctest::Approx(1.0));
  // x^alpha tail(x) is constant for L = 1.
  for (double x : {10.0, 1e3, 1e6}) CHECK(x * x * m2.tail(x) == doctest::Approx(36.0));
  // For the log factor the ratio tail / (x^-alpha L(x)) stays fixed.
  const JumpMeasure ml(1.5, 1.0, 1.0, SlowVariation::log());
  const double r0 = ml.tail(10.0) * std::pow(10.0, 1.5) / (1.0 + std::log(10.0));
  for (double x : {1e2, 1e4, 1e6}) {
    CHECK(ml.tail(x) * std::pow(x, 1.5) / (1.0 + std::log(x)) == doctest::Approx(r0).epsilon(1e-9));
  }
}

TEST_CASE("measure parameter validation") {
  CHECK_THROWS_AS(JumpMeasure(0.0, 1.0, 1.0), InvariantError);
  CHECK_THROWS_AS(JumpMeasure(1.0, 0.0, 1.0), InvariantError);
  CHECK_THROWS_AS(JumpMeasure(1.0, 1.0, -1.0), InvariantError);
  CHECK_THROWS_AS(JumpMeasure(1.0, 0.5, 1.0, SlowVariation::log()), InvariantError);
}

TEST_CASE("jump sampler: median, support and tail") {
  const JumpMeasure m(1.0, 1.0, 1.0);
  Rng rng(2024);
  const int n = 100'000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = m.sample(rng);
  CHECK(*std::min_element(xs.begin(), xs.end()) >= 1.0);
  CHECK(std::abs(stats::quantile(xs, 0.5) - 2.0) <= 0.04);
  const double above10 = std::count_if(xs.begin(), xs.end(), [](double x) { return x >= 10.0; }) / double(n);
  CHECK(within_binomial(above10, m.tail(10.0), n));
}

TEST_CASE("sampler matches the tail for the log factor") {
  const JumpMeasure m(1.0, 1.0, 2.0, SlowVariation::log());
  CHECK(m.acceptance_rate() >= 0.5);
  Rng rng(7);
  const int n = 100'000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = m.sample(rng);
  for (double x : {1.5, 3.0, 10.0, 50.0, 300.0}) {
    const double p = std::count_if(xs.begin(), xs.end(), [&](double v) { return v >= x; }) / double(n);
    CHECK(within_binomial(p, m.tail(x) / m.eta(), n));
  }
}

TEST_CASE("compound Poisson paths") {
  const JumpMeasure m(1.0, 1.0, 2.0);
  Rng rng(11);
  const auto empty = sample_path(m, 0.0, rng);
  CHECK(empty.jump_times.empty());
  CHECK(empty.value_at(0.0) == 0.0);
  std::vector<double> counts(10'000);
  for (auto& c : counts) {
    const auto p = sample_path(m, 5.0, rng);
    c = static_cast<double>(p.jump_times.size());
    double prev = 0.0;
    for (double t = 0.0; t <= 5.0; t += 0.5) {
      CHECK(p.value_at(t) >= prev);
      prev = p.value_at(t);
    }
  }
  CHECK(stats::mean_ci(counts).ci.contains(10.0));
  CHECK_THROWS_AS(sample_path(m, -1.0, rng), DomainError);
}

TEST_CASE("tail split at e^2 - e") {
  const JumpMeasure m(1.0, 1.0, 1.0);
  const auto split = tail_split(m, e * e - e);
  CHECK(split.large.eta() == doctest::Approx(1.0 / (e * e - e)));
  CHECK(split.large.eta() == doctest::Approx(0.21411).epsilon(1e-4));
  CHECK(split.small.mass() + split.large.eta() == doctest::Approx(1.0).epsilon(1e-14));
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double s = split.small.sample(rng);
    CHECK(s >= 1.0);
    CHECK(s < e * e - e);
    CHECK(split.large.sample(rng) >= e * e - e);
  }
  // First arrival of the large component is Exp(large mass).
  std::vector<double> first(10'000);
  for (auto& f : first) f = exponential(rng, split.large.eta());
  CHECK(std::abs(stats::mean_ci(first).mean * split.large.eta() - 1.0) <= 0.03);
  CHECK_THROWS_AS(tail_split(m, 0.5), DomainError);
}

TEST_CASE("strip tail bound") {
  const JumpMeasure m(1.0, 1.0, 1.0);
  CHECK(strip_tail_bound_holds(m, 1, 1, 1.0));
  for (double alpha : {0.5, 1.0, 2.0}) {
    const JumpMeasure ma(alpha, 1.0, 1.0);
    for (std::int64_t n = 1; n <= 20; ++n)
      for (std::int64_t k = 1; k <= 20; ++k) CHECK(strip_tail_bound_holds(ma, n, k, 1.0));
    CHECK(fit_strip_constant(ma, 20, 20) <= 1.0);
  }
  CHECK_FALSE(strip_tail_bound_holds(m, 10, 10, 0.0));
  CHECK_THROWS_AS(strip_tail_bound_holds(m, 0, 1, 1.0), DomainError);
  const JumpMeasure ml(1.0, 1.0, 1.0, SlowVariation::log());
  const double D = fit_strip_constant(ml, 20, 20);
  CHECK(D > 0.0);
  CHECK(strip_tail_bound_holds(ml, 20, 20, D));
}

TEST_CASE("slow variation scan") {
  const auto flat = slow_variation_bounds(SlowVariation::constant(), 0.1, 1.0, 1e9);
  CHECK(flat.found);
  CHECK(flat.x0 == doctest::Approx(1.0));
  double prev = 0.0;
  for (double ex : {0.5, 0.2, 0.1}) {
    const auto r = slow_variation_bounds(SlowVariation::log(), ex, 1.0, 1e30);
    REQUIRE(r.found);
    CHECK(r.x0 >= prev);
    prev = r.x0;
  }
  CHECK(slow_variation_bounds(SlowVariation::log(), 0.5, 1.0, 1e9).found);
  CHECK_THROWS_AS(slow_variation_bounds(SlowVariation::log(), 0.0, 1.0, 10.0), DomainError);
}
