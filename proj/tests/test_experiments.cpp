#include <cmath>
#include <vector>

#include "doctest.h"
#include "ubranch/errors.hpp"
#include "ubranch/experiments.hpp"

using namespace ubranch;

TEST_CASE("verdict combination") {
  using V = Verdict;
  CHECK(combine(std::vector<V>{V::Pass, V::Pass}) == V::Pass);
  CHECK(combine(std::vector<V>{V::Pass, V::Indeterminate}) == V::Indeterminate);
  CHECK(combine(std::vector<V>{V::Indeterminate, V::Fail, V::Pass}) == V::Fail);
  CHECK(to_string(V::Pass) == "pass");
}

TEST_CASE("parallel and serial runs give identical results") {
  const GWRates r{2.0, 1.0};
  const auto a = extinction_experiment(r, 500, 30.0, 1000, 0.05, {7, 1});
  const auto b = extinction_experiment(r, 500, 30.0, 1000, 0.05, {7, 4});
  CHECK(a.estimate == b.estimate);
  const auto c = yule_law_experiment(1.0, std::log(2.0), 2000, 0.03, {3, 1});
  const auto d = yule_law_experiment(1.0, std::log(2.0), 2000, 0.03, {3, 8});
  CHECK(c.estimate == d.estimate);
  const auto e = colony_mean_experiment({1.0, 0.0}, 1.0, 2000, {5, 1});
  const auto f = colony_mean_experiment({1.0, 0.0}, 1.0, 2000, {5, 3});
  CHECK(e.estimate == f.estimate);
  CHECK(e.ci_low == f.ci_low);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(1000, 6, [&](std::int64_t i) { ++hits[i]; });
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("quantile domination") {
  std::vector<double> a(2000), b(2000), c(2000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<double>(i % 50);
    b[i] = a[i] + 3.0;
  }
  const std::vector<double> levels{0.1, 0.5, 0.9};
  const auto self = domination_quantiles(a, a, levels, 200, 1);
  CHECK(self.summary.verdict == Verdict::Pass);
  for (const auto& l : self.levels) CHECK(l.upper_quantile == l.lower_quantile);
  CHECK(domination_quantiles(a, b, levels, 200, 1).summary.verdict == Verdict::Pass);
  CHECK(domination_quantiles(b, a, levels, 200, 1).summary.verdict == Verdict::Fail);
  CHECK_THROWS_AS(domination_quantiles(a, std::vector<double>(10), levels, 200, 1), DomainError);
  CHECK_THROWS_AS(domination_quantiles(std::vector<double>(10), std::vector<double>(10), levels, 200, 1),
                  DomainError);
}

TEST_CASE("band statistics on synthetic series") {
  ScalingBand band;
  band.times = {1.0, 2.0, 4.0, 8.0};
  // Flat ratios around 0.5; the control (ratio times t) grows with slope 1.
  band.ratios = {{0.5, 0.52, 0.49, 0.5}, {0.45, 0.47, 0.46, 0.48}};
  std::vector<std::vector<double>> control;
  for (const auto& s : band.ratios) {
    std::vector<double> c;
    for (std::size_t i = 0; i < s.size(); ++i) c.push_back(s[i] * band.times[i]);
    control.push_back(c);
  }
  finish_band(band, control);
  CHECK(band.verdict == Verdict::Pass);
  CHECK(band.band_low == doctest::Approx(0.45));
  CHECK(band.band_high == doctest::Approx(0.52));
  CHECK(std::abs(band.slope) < 0.05);
  CHECK(band.control_slope == doctest::Approx(1.0).epsilon(0.05));

  ScalingBand decaying = band;
  decaying.ratios = {{1.0, 0.5, 0.25, 0.125}};
  finish_band(decaying, {{1.0, 1.0, 1.0, 1.0}});
  CHECK(decaying.verdict == Verdict::Fail);
  CHECK(decaying.slope == doctest::Approx(-1.0));

  ScalingBand zero = band;
  zero.ratios = {{0.0, 0.5, 0.5, 0.5}};
  finish_band(zero, control);
  CHECK(zero.verdict == Verdict::Fail);
  CHECK(zero.nonpositive == 1);

  ScalingBand empty = band;
  empty.ratios.clear();
  finish_band(empty, {});
  CHECK(empty.verdict == Verdict::Indeterminate);
}

TEST_CASE("event verdict logic") {
  const auto summary = [](std::string name, double est, Verdict v) {
    ExperimentSummary s;
    s.name = std::move(name);
    s.estimate = est;
    s.verdict = v;
    return s;
  };
  std::vector<ExperimentSummary> ok{summary("event_A_J2", 0.8, Verdict::Pass), summary("event_B_J2", 0.9, Verdict::Pass),
                                    summary("event_A_J4", 0.95, Verdict::Pass), summary("event_B_J4", 1.0, Verdict::Pass)};
  CHECK(event_verdict(ok) == Verdict::Pass);
  auto drop = ok;
  drop[2].estimate = 0.7;
  std::vector<std::string> notes;
  CHECK(event_verdict(drop, &notes) == Verdict::Fail);
  CHECK_FALSE(notes.empty());
  auto low = ok;
  low[0].estimate = 0.3;
  CHECK(event_verdict(low) == Verdict::Fail);
  auto bad_b = ok;
  bad_b[3].verdict = Verdict::Fail;
  CHECK(event_verdict(bad_b) == Verdict::Fail);
  std::vector<ExperimentSummary> none{summary("event_A_J2", 0.0, Verdict::Indeterminate)};
  CHECK(event_verdict(none) == Verdict::Indeterminate);
}

TEST_CASE("event probabilities at a degenerate level are indeterminate") {
  EventProbConfig c;
  // C1 J^(1-gamma) - 1 < 0 at J = 1 while the parameter invariants still hold.
  c.params.C = 0.9;
  c.params.C1 = 0.5;
  c.params.C2 = 0.05;
  c.levels = {1};
  c.replicates = 5;
  const auto s = estimate_event_probs(c, {1, 1});
  REQUIRE(s.size() == 2);
  CHECK(s[0].verdict == Verdict::Indeterminate);
  CHECK(s[1].verdict == Verdict::Indeterminate);
}

TEST_CASE("closed-form checks") {
  CHECK(long_jump_ratio_check(0.5, 5, 20, 0.9).verdict == Verdict::Pass);
  CHECK(tail_bound_summability(LinesParams{}, 400, 1e-6).verdict == Verdict::Pass);
}
