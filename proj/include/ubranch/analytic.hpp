#pragma once

#include <cstdint>

namespace ubranch {

/// Rates of a continuous-time binary-splitting Galton-Watson process GW(lambda, mu).
struct GWRates {
  double lambda = 1.0;  ///< split intensity per particle
  double mu = 0.0;      ///< death intensity per particle

  /// Throws InvariantError unless lambda > 0, mu >= 0, both finite.
  void validate() const;
};

/// Parameters of the lines model and of its two time schedules.
struct LinesParams {
  double gamma = 0.5;  ///< branch rate on line J is J^gamma, gamma in (0,1)
  double C = 0.5;      ///< jump to line J' at rate C^J', C in (0,1)
  double C1 = 3.0;     ///< lower schedule t_J = C1 J^(1-gamma) - 1
  double C2 = 0.5;     ///< upper schedule t_J = C2 J^(1-gamma)

  /// Checks 0<gamma<1, 0<C<1, C1/2 + 2 ln C > 0 and C e^C2 < 1.
  void validate() const;
  /// Only the model part (gamma, C); used when schedules are irrelevant.
  void validate_model() const;
};

namespace analytic {

/// E Y(t) = e^{t(lambda-mu)}.
double gw_mean(const GWRates& rates, double t);

/// Yule generating function s e^{-lt} / (1 - (1 - e^{-lt}) s).
double yule_gf(double s, double t, double lambda);

/// P(H_t = n) = e^{-lt} (1 - e^{-lt})^{n-1} for the Yule process started from one particle.
double yule_pmf(std::int64_t n, double t, double lambda);

/// P(H_t >= m) = (1 - e^{-lt})^{m-1}.
double yule_tail(std::int64_t m, double t, double lambda);

/// Generating function of GW(lambda, mu) from one particle. Throws UnsupportedCriticalCase
/// when lambda == mu.
double bd_gf(double s, double t, const GWRates& rates);

double extinction_prob(const GWRates& rates);

/// Generating function of the skeleton (particles with infinite descent) given survival.
/// Requires lambda > mu > 0.
double reduced_gf(double s, double t, const GWRates& rates);

/// (1/10)^c.
double yule_tail_lower_bound(double c);

/// (1-C) C^{j-i-1}, the law of the landing line j of a jump from line i.
double jump_target_pmf(std::int64_t i, std::int64_t j, double C);

/// Probability that a fixed particle on line J jumps to line 2J within one time unit:
/// (1-C) C^{J-1} (1 - exp(-C^{J+1}/(1-C))).
double long_jump_prob(std::int64_t J, double C);

struct LowerSchedule {
  double t = 0.0;          ///< C1 J^(1-gamma) - 1
  double q = 0.0;          ///< exp(t (J^gamma - C^{J+1}/(1-C))) / J^2
  double log_q = 0.0;
  bool degenerate = false;  ///< t <= 0: J too small for this C1
};

LowerSchedule schedule_lower(std::int64_t J, const LinesParams& params);

/// Smallest J0 such that q_J >= e^{C1 J / 2} for every J in [J0, j_max]; 0 if none.
std::int64_t schedule_lower_onset(const LinesParams& params, std::int64_t j_max = 2000);

/// C2 J^(1-gamma).
double schedule_upper(std::int64_t J, const LinesParams& params);

struct ScalingConstants {
  double lower = 0.0;  ///< ((2^{1-gamma} - 1) / (2 C1))^{1/(1-gamma)}
  double upper = 0.0;  ///< (1/C2)^{1/(1-gamma)}
};

ScalingConstants scaling_constants(const LinesParams& params);

/// Upper bound C2 J^{1-gamma} (C e^{C2})^J / (1-C) on P(max line at schedule_upper(J) >= J).
double max_line_tail_bound(std::int64_t J, const LinesParams& params);

/// Exact P(H_t >= c E H_t) = (1 - e^{-lt})^{ceil(c e^{lt}) - 1} for the Yule process.
double yule_relative_tail(double c, double t, double lambda);

/// Marginal law of GW(lambda, mu) at time t from one particle:
/// P(0) = p_zero, P(n) = (1 - p_zero) success (1 - success)^{n-1} for n >= 1.
/// Valid for all rates including lambda == mu.
struct BirthDeathMarginal {
  double p_zero = 0.0;
  double success = 1.0;
};

BirthDeathMarginal bd_marginal(const GWRates& rates, double t);

/// Probability that a GW family started by one particle records at least one "marked" death
/// within time t, where deaths occur at total rate mu and a fraction marked_rate/mu of them are
/// marked. Solves the backward Riccati equation in closed form.
double marked_death_prob(const GWRates& rates, double marked_rate, double t);

}  // namespace analytic
}  // namespace ubranch
