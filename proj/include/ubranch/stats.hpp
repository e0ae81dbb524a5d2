#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "ubranch/rng.hpp"

namespace ubranch::stats {

/// Two-sided standard normal quantile for 99% coverage.
inline constexpr double kZ99 = 2.5758293035489004;

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double x) const { return low <= x && x <= high; }
  double width() const { return high - low; }
};

Interval wilson(std::int64_t successes, std::int64_t trials, double z = kZ99);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  Interval ci;
};

MeanEstimate mean_ci(std::span<const double> samples, double z = kZ99);

/// Total-variation distance between the empirical law of `counts` (value -> frequency) and a pmf
/// on the integers >= `support_min`. Mass of the pmf outside the observed range counts fully.
double total_variation(const std::map<std::int64_t, std::int64_t>& counts,
                       const std::function<double(std::int64_t)>& pmf, std::int64_t support_min);

/// Inverse of the empirical CDF: smallest sample x with F_n(x) >= level.
double quantile(std::vector<double> samples, double level);

/// Percentile bootstrap interval for the difference quantile(upper) - quantile(lower).
Interval bootstrap_quantile_gap(std::span<const double> lower, std::span<const double> upper,
                                double level, std::int64_t resamples, double coverage, Rng& rng);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace ubranch::stats
