#include <cmath>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "ubranch/analytic.hpp"
#include "ubranch/errors.hpp"

using namespace ubranch;
using namespace ubranch::analytic;

namespace {

// Backward equation for u(t) = P(no marked death by t) of a GW(l, mu) family where marked
// deaths occur at rate m <= mu: u' = l u^2 + (mu - m) - (l + mu) u, u(0) = 1. Classical RK4.
double marked_death_rk4(double l, double mu, double m, double t, int steps = 20000) {
  const auto f = [&](double u) { return l * u * u + (mu - m) - (l + mu) * u; };
  double u = 1.0;
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(u);
    const double k2 = f(u + 0.5 * h * k1);
    const double k3 = f(u + 0.5 * h * k2);
    const double k4 = f(u + h * k3);
    u += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return 1.0 - u;
}

// Kolmogorov forward equations for P(n, t) of GW(l, mu) truncated at n_max, Euler steps.
std::vector<double> bd_forward(double l, double mu, double t, int n_max = 400, int steps = 200000) {
  std::vector<double> p(n_max + 2, 0.0), dp(n_max + 2, 0.0);
  p[1] = 1.0;
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    for (int n = 0; n <= n_max; ++n) {
      double d = -(l + mu) * n * p[n];
      if (n >= 2) d += l * (n - 1) * p[n - 1];
      d += mu * (n + 1) * p[n + 1];
      dp[n] = d;
    }
    for (int n = 0; n <= n_max; ++n) p[n] += h * dp[n];
  }
  return p;
}

LinesParams defaults() { return LinesParams{}; }

}  // namespace

TEST_CASE("gw_mean examples") {
  CHECK(gw_mean({1.0, 1.0}, 7.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gw_mean({3.0, 0.5}, 0.0) == 1.0);
  CHECK(gw_mean({1.0, 0.0}, 1.0) == doctest::Approx(2.718281828459045).epsilon(1e-14));
}

TEST_CASE("yule generating function and pmf") {
  CHECK(yule_gf(1.0, 2.3, 0.7) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(yule_gf(0.3, 0.0, 1.0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(yule_gf(0.5, std::log(2.0), 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(yule_gf(1.5, 1.0, 1.0), DomainError);

  for (int n = 1; n <= 30; ++n) {
    CHECK(yule_pmf(n, std::log(2.0), 1.0) == doctest::Approx(std::ldexp(1.0, -n)).epsilon(1e-12));
  }
  CHECK(yule_pmf(1, 1e-12, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(yule_pmf(0, 1.0, 1.0), DomainError);

  // Adaptive truncation: normalization and mean e^{lt}.
  const double t = 1.7, l = 0.9;
  double total = 0.0, mean = 0.0;
  for (std::int64_t n = 1; yule_tail(n, t, l) > 1e-15; ++n) {
    total += yule_pmf(n, t, l);
    mean += static_cast<double>(n) * yule_pmf(n, t, l);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mean == doctest::Approx(std::exp(l * t)).epsilon(1e-6));

  // pmf against the generating function: sum_n p_n s^n.
  double series = 0.0;
  for (int n = 1; n < 2000; ++n) series += yule_pmf(n, t, l) * std::pow(0.6, n);
  CHECK(series == doctest::Approx(yule_gf(0.6, t, l)).epsilon(1e-12));
}

TEST_CASE("birth-death generating function") {
  const GWRates r{2.0, 1.0};
  CHECK(bd_gf(1.0, 3.0, r) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(bd_gf(0.4, 0.0, r) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(bd_gf(0.0, 60.0, r) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(bd_gf(0.5, 1.0, {1.0, 1.0}), UnsupportedCriticalCase);

  double prev = 0.0;
  for (double t = 0.0; t <= 20.0; t += 0.25) {
    const double p0 = bd_gf(0.0, t, r);
    CHECK(p0 >= prev - 1e-15);
    prev = p0;
  }

  // Against the forward equations.
  const auto p = bd_forward(1.3, 0.6, 1.5);
  CHECK(bd_gf(0.0, 1.5, {1.3, 0.6}) == doctest::Approx(p[0]).epsilon(1e-4));
  double series = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) series += p[n] * std::pow(0.7, static_cast<double>(n));
  CHECK(bd_gf(0.7, 1.5, {1.3, 0.6}) == doctest::Approx(series).epsilon(1e-4));

  const auto m = bd_marginal({1.3, 0.6}, 1.5);
  CHECK(m.p_zero == doctest::Approx(p[0]).epsilon(1e-4));
  for (int n = 1; n <= 5; ++n) {
    const double pn = (1.0 - m.p_zero) * m.success * std::pow(1.0 - m.success, n - 1);
    CHECK(pn == doctest::Approx(p[n]).epsilon(1e-3));
  }
  // Critical marginal stays finite and sums to one in the geometric form.
  const auto crit = bd_marginal({1.0, 1.0}, 2.0);
  CHECK(crit.p_zero == doctest::Approx(2.0 / 3.0).epsilon(1e-12));  // lt / (1 + lt)
}

TEST_CASE("extinction probability") {
  CHECK(extinction_prob({2.0, 1.0}) == 0.5);
  CHECK(extinction_prob({1.0, 2.0}) == 1.0);
  CHECK(extinction_prob({1.0, 1.0}) == 1.0);
  CHECK(extinction_prob({1.0, 0.0}) == 0.0);
}

TEST_CASE("reduced generating function equals the Yule one at rate lambda - mu") {
  CHECK(reduced_gf(1.0, 2.0, {2.0, 1.0}) == doctest::Approx(1.0));
  CHECK(reduced_gf(0.25, 0.0, {2.0, 1.0}) == doctest::Approx(0.25));
  CHECK(reduced_gf(0.5, std::log(2.0), {2.0, 1.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  for (double s : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    for (double t : {0.0, 0.3, 1.0, 4.0}) {
      for (double mu : {0.1, 0.5, 1.5}) {
        const double l = mu + 0.8;
        CHECK(std::abs(reduced_gf(s, t, {l, mu}) - yule_gf(s, t, l - mu)) <= 1e-12);
      }
    }
  }
  CHECK_THROWS(reduced_gf(0.5, 1.0, {1.0, 0.0}));
  CHECK_THROWS(reduced_gf(0.5, 1.0, {1.0, 2.0}));
}

TEST_CASE("yule tail bound and relative tail") {
  CHECK(yule_tail_lower_bound(1.0) == doctest::Approx(0.1));
  CHECK(yule_tail_lower_bound(2.0) == doctest::Approx(0.01));
  CHECK(yule_tail_lower_bound(1e-9) == doctest::Approx(1.0));
  // (1 - e^{-3})^{ceil(e^3) - 1} = (1 - e^{-3})^{20}.
  const double exact = std::pow(1.0 - std::exp(-3.0), 20.0);
  CHECK(yule_relative_tail(1.0, 3.0, 1.0) == doctest::Approx(exact).epsilon(1e-13));
  CHECK(exact == doctest::Approx(0.3600963592).epsilon(1e-9));
  for (double lt = 3.0; lt <= 12.0; lt += 0.5) CHECK(yule_relative_tail(1.0, lt, 1.0) > 0.1);
}

TEST_CASE("jump target law") {
  CHECK(jump_target_pmf(1, 2, 0.5) == doctest::Approx(0.5));
  CHECK(jump_target_pmf(1, 3, 0.5) == doctest::Approx(0.25));
  double total = 0.0;
  for (int j = 4; j < 200; ++j) total += jump_target_pmf(3, j, 0.7);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(jump_target_pmf(2, 2, 0.5), DomainError);
}

TEST_CASE("long jump probability") {
  CHECK(long_jump_prob(1, 0.5) == doctest::Approx(0.5 * (1.0 - std::exp(-0.5))).epsilon(1e-12));
  CHECK(long_jump_prob(1, 0.5) == doctest::Approx(0.19673467).epsilon(1e-8));
  CHECK(long_jump_prob(20, 0.5) / std::pow(0.5, 40) == doctest::Approx(1.0).epsilon(1e-3));
  for (int J = 1; J < 30; ++J) {
    CHECK(long_jump_prob(J + 1, 0.5) < long_jump_prob(J, 0.5));
    // The lower bound alpha_J >= C^{2J} fails: the ratio stays below one.
    CHECK(long_jump_prob(J, 0.5) <= std::pow(0.5, 2.0 * J));
  }
}

TEST_CASE("schedules") {
  const auto p = defaults();
  const auto s4 = schedule_lower(4, p);
  CHECK(s4.t == doctest::Approx(5.0));
  CHECK(s4.q == doctest::Approx(std::exp(5.0 * (2.0 - 0.0625)) / 16.0).epsilon(1e-12));
  CHECK(s4.q == doctest::Approx(1007.18166).epsilon(1e-8));
  CHECK_FALSE(s4.degenerate);

  LinesParams small = p;
  small.C1 = 0.5;
  const auto s1 = schedule_lower(1, small);
  CHECK(s1.t == doctest::Approx(-0.5));
  CHECK(s1.degenerate);

  const auto onset = schedule_lower_onset(p, 500);
  REQUIRE(onset > 0);
  for (std::int64_t J = onset; J <= 500; ++J) {
    CHECK(schedule_lower(J, p).log_q >= 1.5 * static_cast<double>(J));
  }
  if (onset > 1) CHECK(schedule_lower(onset - 1, p).log_q < 1.5 * static_cast<double>(onset - 1));

  CHECK(schedule_upper(4, p) == doctest::Approx(1.0));
  CHECK(schedule_upper(1, p) == doctest::Approx(p.C2));
  for (int J = 1; J < 50; ++J) CHECK(schedule_upper(J + 1, p) > schedule_upper(J, p));
}

TEST_CASE("scaling constants") {
  const auto c = scaling_constants(defaults());
  CHECK(c.lower == doctest::Approx(std::pow((std::sqrt(2.0) - 1.0) / 6.0, 2.0)).epsilon(1e-12));
  CHECK(c.lower == doctest::Approx(0.004763).epsilon(1e-3));
  CHECK(c.upper == doctest::Approx(4.0));
  for (double g : {0.2, 0.5, 0.8}) {
    for (double C : {0.3, 0.5, 0.7}) {
      LinesParams q;
      q.gamma = g;
      q.C = C;
      q.C1 = -4.0 * std::log(C) + 1.0;
      q.C2 = -0.9 * std::log(C);
      const auto k = scaling_constants(q);
      CHECK(k.lower < k.upper);
    }
  }
}

TEST_CASE("max line tail bound") {
  const auto p = defaults();
  CHECK(max_line_tail_bound(1, p) == doctest::Approx(std::exp(0.5) / 2.0).epsilon(1e-12));
  CHECK(max_line_tail_bound(1, p) == doctest::Approx(0.824).epsilon(1e-3));
  // Eventually decreasing.
  for (int J = 3; J < 100; ++J) CHECK(max_line_tail_bound(J + 1, p) < max_line_tail_bound(J, p));
}

TEST_CASE("marked death probability against the Riccati equation") {
  for (auto [l, mu, m, t] : {std::tuple{2.0, 0.25, 0.0625, 1.0}, std::tuple{1.0, 1.0, 0.5, 2.0},
                             std::tuple{1.5, 3.0, 3.0, 0.7}, std::tuple{0.5, 0.1, 0.01, 5.0}}) {
    CHECK(marked_death_prob({l, mu}, m, t) == doctest::Approx(marked_death_rk4(l, mu, m, t)).epsilon(1e-8));
  }
  CHECK_THROWS_AS(marked_death_prob({2.0, 0.5}, 0.0, 3.0), DomainError);
}

TEST_CASE("parameter invariants") {
  CHECK_NOTHROW(defaults().validate());
  LinesParams p;
  p.C1 = 2.0;  // 1 + 2 ln 0.5 < 0
  try {
    p.validate();
    FAIL("expected an invariant error");
  } catch (const InvariantError& e) {
    CHECK(e.invariant() == "C1/2 + 2 ln C > 0");
  }
  p = defaults();
  p.C2 = 0.8;  // 0.5 e^0.8 > 1
  CHECK_THROWS_AS(p.validate(), InvariantError);
  p = defaults();
  p.gamma = 1.0;
  CHECK_THROWS_AS(p.validate_model(), InvariantError);
  CHECK_THROWS_AS(GWRates({0.0, 1.0}).validate(), InvariantError);
  CHECK_THROWS_AS(GWRates({1.0, -1.0}).validate(), InvariantError);
}
