#include "ubranch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ubranch/errors.hpp"

namespace ubranch::stats {

Interval wilson(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

MeanEstimate mean_ci(std::span<const double> samples, double z) {
  if (samples.size() < 2) throw DomainError("mean_ci: need at least two samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  return {mean, se, {mean - z * se, mean + z * se}};
}

double total_variation(const std::map<std::int64_t, std::int64_t>& counts,
                       const std::function<double(std::int64_t)>& pmf, std::int64_t support_min) {
  std::int64_t n = 0;
  std::int64_t top = support_min;
  for (const auto& [value, c] : counts) {
    n += c;
    top = std::max(top, value);
  }
  if (n == 0) throw DomainError("total_variation: empty sample");
  double diff = 0.0;
  double covered = 0.0;
  for (const auto& [value, c] : counts) {
    if (value < support_min) diff += static_cast<double>(c) / static_cast<double>(n);
  }
  for (std::int64_t k = support_min; k <= top; ++k) {
    const double p = pmf(k);
    covered += p;
    const auto it = counts.find(k);
    const double phat = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
    diff += std::abs(phat - p);
  }
  diff += std::max(0.0, 1.0 - covered);
  return diff / 2.0;
}

double quantile(std::vector<double> samples, double level) {
  if (samples.empty()) throw DomainError("quantile: empty sample");
  if (!(level > 0.0 && level <= 1.0)) throw DomainError("quantile: level must lie in (0,1]");
  const auto n = samples.size();
  auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n) - 1;
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k), samples.end());
  return samples[k];
}

Interval bootstrap_quantile_gap(std::span<const double> lower, std::span<const double> upper,
                                double level, std::int64_t resamples, double coverage, Rng& rng) {
  if (lower.empty() || upper.empty()) throw DomainError("bootstrap: empty sample");
  std::vector<double> gaps;
  gaps.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> a(lower.size());
  std::vector<double> b(upper.size());
  const auto draw = [&rng](std::span<const double> src, std::vector<double>& dst) {
    for (auto& x : dst) {
      auto i = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(src.size()));
      x = src[std::min(i, src.size() - 1)];
    }
  };
  for (std::int64_t r = 0; r < resamples; ++r) {
    draw(lower, a);
    draw(upper, b);
    const double qa = quantile(a, level);
    const double qb = quantile(b, level);
    // inf - inf is NaN; equal infinite quantiles tie.
    gaps.push_back(qa == qb ? 0.0 : qb - qa);
  }
  const double tail = (1.0 - coverage) / 2.0;
  return {quantile(gaps, std::max(tail, 1.0 / static_cast<double>(resamples))),
          quantile(gaps, 1.0 - tail)};
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw DomainError("least_squares: need >= 3 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("least_squares: degenerate x");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.slope_std_error = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

}  // namespace ubranch::stats
