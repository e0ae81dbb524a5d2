#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ubranch/rng.hpp"

namespace ubranch {

/// Slowly varying factor L: either a constant c, or c (1 + ln x) for x >= 1.
struct SlowVariation {
  enum class Kind { Constant, Log };
  Kind kind = Kind::Constant;
  double scale = 1.0;

  double operator()(double x) const;
  static SlowVariation constant(double c = 1.0) { return {Kind::Constant, c}; }
  static SlowVariation log(double c = 1.0) { return {Kind::Log, c}; }
  std::string name() const { return kind == Kind::Constant ? "const" : "log"; }
};

/// Finite jump measure on [x_min, inf) with regularly varying tail
///   nu([x, inf)) = eta (x / x_min)^{-alpha} L(x) / L(x_min),  x >= x_min,
/// and no mass below x_min.
class JumpMeasure {
 public:
  JumpMeasure(double alpha, double x_min, double eta, SlowVariation slow = SlowVariation::constant());

  double alpha() const noexcept { return alpha_; }
  double x_min() const noexcept { return x_min_; }
  double eta() const noexcept { return eta_; }
  const SlowVariation& slow_variation() const noexcept { return slow_; }

  /// nu([x, inf)).
  double tail(double x) const;

  /// Draw from nu / eta. Exact inversion for constant L; for the log factor, rejection from
  /// a Pareto(alpha', x_min) proposal with alpha' < alpha.
  double sample(Rng& rng) const;

  /// Acceptance probability of the rejection sampler (1 for constant L).
  double acceptance_rate() const noexcept { return 1.0 / envelope_; }

  /// nu restricted to [threshold, inf): same family with x_min = threshold.
  JumpMeasure above(double threshold) const;

 private:
  double density_ratio(double x) const;  // target density / proposal density

  double alpha_;
  double x_min_;
  double eta_;
  SlowVariation slow_;
  double proposal_alpha_;
  double envelope_ = 1.0;
};

/// nu restricted to [x_min, threshold).
class TruncatedMeasure {
 public:
  TruncatedMeasure(JumpMeasure parent, double threshold);
  double mass() const noexcept { return mass_; }
  double threshold() const noexcept { return threshold_; }
  double sample(Rng& rng) const;

 private:
  JumpMeasure parent_;
  double threshold_;
  double mass_;
};

struct TailSplit {
  TruncatedMeasure small;
  JumpMeasure large;
};

TailSplit tail_split(const JumpMeasure& measure, double threshold);

struct CompoundPoissonPath {
  std::vector<double> jump_times;
  std::vector<double> jump_sizes;
  double horizon = 0.0;

  double value_at(double t) const;
};

CompoundPoissonPath sample_path(const JumpMeasure& measure, double horizon, Rng& rng);

/// nu((e^{n+k} - e^n, inf)) >= e^{-(k+n) D alpha}.
bool strip_tail_bound_holds(const JumpMeasure& measure, std::int64_t n, std::int64_t k, double D);

/// Smallest D for which strip_tail_bound_holds on every (n, k) in [1, n_max] x [1, k_max].
double fit_strip_constant(const JumpMeasure& measure, std::int64_t n_max, std::int64_t k_max);

struct SlowVariationReport {
  bool found = false;
  double x0 = 0.0;  ///< smallest grid x such that x^{-e} <= L(y) <= x^{e} for all grid y >= x
  std::size_t violations = 0;
};

/// Scans a log-spaced grid on [x_lo, x_hi] for the onset of x^{-e} <= L(x) <= x^{e}.
SlowVariationReport slow_variation_bounds(const SlowVariation& slow, double exponent, double x_lo,
                                          double x_hi, std::int64_t points_per_decade = 200);

}  // namespace ubranch
