#include "ubranch/heavy_tail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ubranch/errors.hpp"

namespace ubranch {

double SlowVariation::operator()(double x) const {
  if (kind == Kind::Constant) return scale;
  return scale * (1.0 + std::log(x));
}

JumpMeasure::JumpMeasure(double alpha, double x_min, double eta, SlowVariation slow)
    : alpha_(alpha), x_min_(x_min), eta_(eta), slow_(slow), proposal_alpha_(alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvariantError("alpha > 0", "alpha is " + std::to_string(alpha));
  }
  if (!(x_min > 0.0) || !std::isfinite(x_min)) {
    throw InvariantError("x_min > 0", "x_min is " + std::to_string(x_min));
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InvariantError("eta > 0", "eta is " + std::to_string(eta));
  }
  if (!(slow.scale > 0.0)) throw InvariantError("L_scale > 0", "L_scale is " + std::to_string(slow.scale));
  if (slow.kind == SlowVariation::Kind::Log) {
    if (x_min < 1.0) throw InvariantError("x_min >= 1 for L = log", "x_min is " + std::to_string(x_min));
    // tail must be nonincreasing: alpha (1 + ln x) >= 1 on the support.
    if (alpha * (1.0 + std::log(x_min)) < 1.0) {
      throw InvariantError("alpha (1 + ln x_min) >= 1 for L = log",
                           "tail would increase just above x_min");
    }
    // The density ratio against Pareto(alpha') peaks at exp(1/(alpha-alpha') + 1/alpha - 1);
    // pick alpha' on a grid to minimize the envelope.
    double best_alpha = alpha / 2.0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 100; ++k) {
      proposal_alpha_ = alpha * (1.0 - k / 100.0);
      const double delta = alpha - proposal_alpha_;
      const double peak = std::max(x_min, std::exp(1.0 / delta + 1.0 / alpha - 1.0));
      const double m = density_ratio(peak);
      if (m < best) {
        best = m;
        best_alpha = proposal_alpha_;
      }
    }
    proposal_alpha_ = best_alpha;
    envelope_ = best;
  }
}

double JumpMeasure::tail(double x) const {
  if (x <= x_min_) return eta_;
  const double decay = std::pow(x / x_min_, -alpha_);
  if (slow_.kind == SlowVariation::Kind::Constant) return eta_ * decay;
  return eta_ * decay * slow_(x) / slow_(x_min_);
}

double JumpMeasure::density_ratio(double x) const {
  const double delta = alpha_ - proposal_alpha_;
  return std::pow(x_min_ / x, delta) * (alpha_ * (1.0 + std::log(x)) - 1.0) /
         (proposal_alpha_ * (1.0 + std::log(x_min_)));
}

double JumpMeasure::sample(Rng& rng) const {
  if (slow_.kind == SlowVariation::Kind::Constant) {
    return x_min_ * std::pow(uniform_open(rng), -1.0 / alpha_);
  }
  for (;;) {
    const double x = x_min_ * std::pow(uniform_open(rng), -1.0 / proposal_alpha_);
    if (uniform_open(rng) * envelope_ <= density_ratio(x)) return x;
  }
}

JumpMeasure JumpMeasure::above(double threshold) const {
  if (threshold < x_min_) throw DomainError("above: threshold below the support");
  return JumpMeasure(alpha_, threshold, tail(threshold), slow_);
}

TruncatedMeasure::TruncatedMeasure(JumpMeasure parent, double threshold)
    : parent_(std::move(parent)), threshold_(threshold) {
  if (!(threshold > parent_.x_min())) throw DomainError("tail_split: threshold must exceed x_min");
  mass_ = parent_.eta() - parent_.tail(threshold);
}

double TruncatedMeasure::sample(Rng& rng) const {
  for (;;) {
    const double x = parent_.sample(rng);
    if (x < threshold_) return x;
  }
}

TailSplit tail_split(const JumpMeasure& measure, double threshold) {
  TruncatedMeasure small(measure, threshold);
  return TailSplit{small, measure.above(threshold)};
}

double CompoundPoissonPath::value_at(double t) const {
  const auto end = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  double v = 0.0;
  for (auto it = jump_times.begin(); it != end; ++it) v += jump_sizes[it - jump_times.begin()];
  return v;
}

CompoundPoissonPath sample_path(const JumpMeasure& measure, double horizon, Rng& rng) {
  if (!(horizon >= 0.0)) throw DomainError("sample_path: horizon must be >= 0");
  CompoundPoissonPath path;
  path.horizon = horizon;
  double t = 0.0;
  for (;;) {
    t += exponential(rng, measure.eta());
    if (t > horizon) break;
    path.jump_times.push_back(t);
    path.jump_sizes.push_back(measure.sample(rng));
  }
  return path;
}

namespace {
double strip_gap(std::int64_t n, std::int64_t k) {
  return std::exp(static_cast<double>(n + k)) - std::exp(static_cast<double>(n));
}
}  // namespace

bool strip_tail_bound_holds(const JumpMeasure& measure, std::int64_t n, std::int64_t k, double D) {
  if (n < 1 || k < 1) throw DomainError("strip_tail_bound_holds: n, k must be >= 1");
  const double lhs = measure.tail(strip_gap(n, k));
  return lhs >= std::exp(-static_cast<double>(k + n) * D * measure.alpha());
}

double fit_strip_constant(const JumpMeasure& measure, std::int64_t n_max, std::int64_t k_max) {
  double D = 0.0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    for (std::int64_t k = 1; k <= k_max; ++k) {
      const double need = -std::log(measure.tail(strip_gap(n, k))) /
                          (static_cast<double>(n + k) * measure.alpha());
      D = std::max(D, need);
    }
  }
  // Relative headroom so the fitted constant survives the >= comparison after rounding.
  return std::max(D, std::numeric_limits<double>::min()) * (1.0 + 1e-12);
}

SlowVariationReport slow_variation_bounds(const SlowVariation& slow, double exponent, double x_lo,
                                          double x_hi, std::int64_t points_per_decade) {
  if (!(exponent > 0.0)) throw DomainError("slow_variation_bounds: exponent must be > 0");
  if (!(x_lo >= 1.0 && x_hi > x_lo)) throw DomainError("slow_variation_bounds: need 1 <= x_lo < x_hi");
  const double decades = std::log10(x_hi / x_lo);
  const auto points = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(decades * points_per_decade)) + 1);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (std::int64_t i = 0; i < points; ++i) {
    grid[i] = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / static_cast<double>(points - 1));
  }
  grid.back() = x_hi;
  SlowVariationReport report;
  std::int64_t last_bad = -1;
  for (std::int64_t i = 0; i < points; ++i) {
    const double x = grid[i];
    const double l = slow(x);
    if (!(l >= std::pow(x, -exponent) && l <= std::pow(x, exponent))) {
      last_bad = i;
      ++report.violations;
    }
  }
  if (last_bad + 1 < points) {
    report.found = true;
    report.x0 = grid[static_cast<std::size_t>(last_bad + 1)];
  }
  return report;
}

}  // namespace ubranch
