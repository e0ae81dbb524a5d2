#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ubranch/analytic.hpp"
#include "ubranch/heavy_tail.hpp"
#include "ubranch/stats.hpp"

namespace ubranch {

enum class Verdict { Pass, Fail, Indeterminate };

std::string to_string(Verdict v);

/// Fail if anything failed, Pass if everything passed, otherwise Indeterminate.
Verdict combine(std::span<const Verdict> verdicts);

struct ExperimentSummary {
  std::string name;
  std::map<std::string, std::string> parameters;
  std::int64_t replicates = 0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<double> oracle;
  Verdict verdict = Verdict::Indeterminate;
  double runtime_seconds = 0.0;
  std::vector<std::string> notes;
};

Verdict combine(std::span<const ExperimentSummary> summaries);

/// Runs body(r) for r in [0, n) on `threads` workers (0: hardware concurrency). Results must be
/// written to per-index slots; reductions happen afterwards in index order.
void parallel_for(std::int64_t n, std::int64_t threads, const std::function<void(std::int64_t)>& body);

struct RunOptions {
  std::uint64_t seed = 1;
  std::int64_t threads = 0;
};

// Closed-form oracle checks against simulation.

/// Fraction of GW(lambda, mu) colonies extinct by `horizon`; capped colonies count as survivors.
ExperimentSummary extinction_experiment(const GWRates& rates, std::int64_t replicates, double horizon,
                                        std::int64_t cap, double tolerance, const RunOptions& run);

/// Sample mean of a single colony at t against gw_mean.
ExperimentSummary colony_mean_experiment(const GWRates& rates, double t, std::int64_t replicates,
                                         const RunOptions& run);

/// Total-variation distance of the Yule count at t from the geometric law.
ExperimentSummary yule_law_experiment(double lambda, double t, std::int64_t replicates,
                                      double tolerance, const RunOptions& run);

/// Total-variation distance of the reduced count at t, given survival to `survival_horizon`,
/// from the geometric law of reduced_gf. `replicates` counts surviving colonies.
ExperimentSummary reduced_process_experiment(const GWRates& rates, double t, double survival_horizon,
                                             std::int64_t replicates, double tolerance,
                                             const RunOptions& run);

/// Total-variation distance of simulated jump offsets from (1-C) C^{k-1}.
ExperimentSummary jump_law_experiment(const LinesParams& params, std::int64_t min_jumps,
                                      double tolerance, const RunOptions& run);

/// Smallest lambda t at which the exact Yule relative tail reaches (1/10)^c for every c, plus a
/// Monte Carlo check of the tail at (lambda, t_check, c_check).
struct TailCalibration {
  ExperimentSummary scan;
  ExperimentSummary monte_carlo;
};

TailCalibration yule_tail_calibration(double lambda, std::span<const double> c_list, double t_check,
                                      double c_check, std::int64_t replicates, double tolerance,
                                      const RunOptions& run);

/// Partial sums of max_line_tail_bound are Cauchy to `epsilon` by J = j_max.
ExperimentSummary tail_bound_summability(const LinesParams& params, std::int64_t j_max, double epsilon);

/// Monte Carlo P(max line at schedule_upper(J) >= J) against max_line_tail_bound + 3 sigma.
std::vector<ExperimentSummary> upper_tail_check(const LinesParams& params,
                                                std::span<const std::int64_t> levels,
                                                std::int64_t replicates, const RunOptions& run);

/// strip_tail_bound_holds on [1, n_max] x [1, k_max] for each alpha, L = 1, eta = 1, x_min = 1.
ExperimentSummary strip_bound_check(std::span<const double> alphas, double D, std::int64_t n_max,
                                    std::int64_t k_max);

/// long_jump_prob(J, C) / C^{2J} for J in [j_lo, j_hi] must lie in (low, 1].
ExperimentSummary long_jump_ratio_check(double C, std::int64_t j_lo, std::int64_t j_hi, double low);

// Event diagnostics around the first visit of a line.

struct EventProbConfig {
  LinesParams params;
  std::vector<std::int64_t> levels{2, 4, 8};
  std::int64_t replicates = 200;
  /// Wait for line J until reach_factor * t_J + reach_budget.
  double reach_factor = 4.0;
  double reach_budget = 10.0;
  std::int64_t cap = 1'000'000;
  std::int64_t max_attempts = 10'000;
};

/// One A summary and one B summary per level, in level order: A estimates P(A_J | Z_J), B
/// estimates P(B_J | A_J). Degenerate levels yield an indeterminate summary.
std::vector<ExperimentSummary> estimate_event_probs(const EventProbConfig& config, const RunOptions& run);

/// Verdict of the event diagnostics: every A estimate >= 0.5 and nondecreasing in J, and at the
/// largest level B >= 1 - (2/e)^J - CI width.
Verdict event_verdict(std::span<const ExperimentSummary> summaries, std::vector<std::string>* notes = nullptr);

// Scaling bands.

struct ScalingBand {
  std::string statistic;
  double gamma = 0.5;
  double exponent = 2.0;  ///< 1 / (1 - gamma)
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::vector<double> times;                ///< grid points inside the window
  std::vector<std::vector<double>> ratios;  ///< ratios[r][i] at times[i], uncapped replicates
  std::vector<std::vector<double>> control_ratios;  ///< same statistic over t^1
  std::vector<std::uint64_t> replicate_ids;
  double band_low = 0.0;
  double band_high = 0.0;
  double median = 0.0;
  double slope = 0.0;  ///< least squares of ln ratio against ln t
  double slope_std_error = 0.0;
  double control_slope = 0.0;  ///< same fit with exponent 1
  double slope_tolerance = 0.15;
  double spread_limit = 100.0;
  std::int64_t capped = 0;
  std::int64_t nonpositive = 0;  ///< ratios <= 0, left out of the slope fit
  std::int64_t final_population_min = 0;
  Verdict verdict = Verdict::Indeterminate;
  std::vector<std::string> notes;
  double runtime_seconds = 0.0;
};

enum class LinesEngineKind { Gillespie, Exits };

struct LinesBandConfig {
  LinesParams params;
  double horizon = 8.0;
  std::int64_t cap = 1'000'000'000'000'000;
  std::int64_t replicates = 50;
  std::int64_t sample_grid = 101;
  std::int64_t max_attempts = 1000;
  double slope_tolerance = 0.15;
  double spread_limit = 100.0;
  LinesEngineKind engine = LinesEngineKind::Exits;
};

ScalingBand scaling_band_lines(const LinesBandConfig& config, const RunOptions& run);

struct SpatialBandConfig {
  JumpMeasure measure{1.0, 1.0, 1.0};
  double gamma = 0.5;
  double horizon = 8.0;
  std::int64_t cap = 1'000'000;
  std::int64_t replicates = 50;
  std::int64_t sample_grid = 101;
  std::int64_t max_attempts = 1000;
  double slope_tolerance = 0.15;
  double spread_limit = 100.0;
  std::int64_t min_final_population = 10;
};

ScalingBand scaling_band_spatial(const SpatialBandConfig& config, const RunOptions& run);

/// Builds the band statistics from ratio series; shared by both bands and by tests.
void finish_band(ScalingBand& band, const std::vector<std::vector<double>>& control_ratios);

// Quantile domination.

struct DominationLevel {
  double level = 0.0;
  double lower_quantile = 0.0;
  double upper_quantile = 0.0;
  stats::Interval gap_ci;  ///< bootstrap interval of upper - lower
  bool violated = false;
};

struct DominationResult {
  ExperimentSummary summary;
  std::vector<DominationLevel> levels;
};

/// Pass iff no level has quantile(upper) < quantile(lower) by more than the bootstrap CI width.
DominationResult domination_quantiles(std::span<const double> lower, std::span<const double> upper,
                                      std::span<const double> levels, std::int64_t resamples,
                                      std::uint64_t seed, std::int64_t min_samples = 1000);

struct DominationConfig {
  JumpMeasure measure{1.0, 1.0, 1.0};
  double gamma = 0.5;
  double D = 1.0;
  double horizon = 6.0;
  std::int64_t cap = 1'000'000;
  std::int64_t replicates = 1000;
  std::int64_t resamples = 2000;
  std::vector<double> levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

/// ln M(horizon) of the spatial model against the max line of its strip minorant.
/// A capped spatial run contributes ln M at the cap time, a lower bound of ln M(horizon).
DominationResult dominate_experiment(const DominationConfig& config, const RunOptions& run);

// Aggregate oracle suite.

/// Every closed-form oracle check of the library at desk-scale sizes.
std::vector<ExperimentSummary> validate_suite(const RunOptions& run);

}  // namespace ubranch
