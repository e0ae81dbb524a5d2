#include "ubranch/analytic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ubranch/errors.hpp"

namespace ubranch {

namespace {

void require_time(double t, const char* op) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError(std::string(op) + ": time must be finite and >= 0");
  }
}

void require_unit(double s, const char* op) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError(std::string(op) + ": s must lie in [0,1]");
}

void require_rate(double lambda, const char* op) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError(std::string(op) + ": rate must be finite and > 0");
  }
}

}  // namespace

void GWRates::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvariantError("lambda > 0", "birth intensity is " + std::to_string(lambda));
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw InvariantError("mu >= 0", "death intensity is " + std::to_string(mu));
  }
}

void LinesParams::validate_model() const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvariantError("0 < gamma < 1", "gamma is " + std::to_string(gamma));
  }
  if (!(C > 0.0 && C < 1.0)) throw InvariantError("0 < C < 1", "C is " + std::to_string(C));
}

void LinesParams::validate() const {
  validate_model();
  if (!(C1 > 0.0)) throw InvariantError("C1 > 0", "C1 is " + std::to_string(C1));
  if (!(C2 > 0.0)) throw InvariantError("C2 > 0", "C2 is " + std::to_string(C2));
  if (!(C1 / 2.0 + 2.0 * std::log(C) > 0.0)) {
    throw InvariantError("C1/2 + 2 ln C > 0",
                         "C1 = " + std::to_string(C1) + " needs C1 > " +
                             std::to_string(-4.0 * std::log(C)));
  }
  if (!(C * std::exp(C2) < 1.0)) {
    throw InvariantError("C e^C2 < 1", "C2 = " + std::to_string(C2) + " needs C2 < " +
                                           std::to_string(-std::log(C)));
  }
}

namespace analytic {

double gw_mean(const GWRates& rates, double t) {
  rates.validate();
  if (!std::isfinite(t)) throw DomainError("gw_mean: time must be finite");
  return std::exp(t * (rates.lambda - rates.mu));
}

double yule_gf(double s, double t, double lambda) {
  require_unit(s, "yule_gf");
  require_time(t, "yule_gf");
  require_rate(lambda, "yule_gf");
  const double p = std::exp(-lambda * t);
  return s * p / (1.0 - (1.0 - p) * s);
}

double yule_pmf(std::int64_t n, double t, double lambda) {
  if (n < 1) throw DomainError("yule_pmf: n must be >= 1");
  require_time(t, "yule_pmf");
  require_rate(lambda, "yule_pmf");
  const double p = std::exp(-lambda * t);
  if (n == 1) return p;
  // (1-p)^(n-1) via log1p keeps precision when p is near 1.
  return p * std::exp(static_cast<double>(n - 1) * std::log1p(-p));
}

double yule_tail(std::int64_t m, double t, double lambda) {
  require_time(t, "yule_tail");
  require_rate(lambda, "yule_tail");
  if (m <= 1) return 1.0;
  const double q = -std::expm1(-lambda * t);
  if (q <= 0.0) return 0.0;
  return std::exp(static_cast<double>(m - 1) * std::log(q));
}

double bd_gf(double s, double t, const GWRates& rates) {
  rates.validate();
  require_unit(s, "bd_gf");
  require_time(t, "bd_gf");
  if (rates.lambda == rates.mu) {
    throw UnsupportedCriticalCase("bd_gf: lambda == mu is singular for this formula");
  }
  const double lam = rates.lambda;
  const double mu = rates.mu;
  const double e = std::exp((mu - lam) * t);
  const double num = mu * (s - 1.0) - e * (lam * s - mu);
  const double den = lam * (s - 1.0) - e * (lam * s - mu);
  return num / den;
}

double extinction_prob(const GWRates& rates) {
  rates.validate();
  return rates.mu < rates.lambda ? rates.mu / rates.lambda : 1.0;
}

double reduced_gf(double s, double t, const GWRates& rates) {
  rates.validate();
  if (!(rates.lambda > rates.mu && rates.mu > 0.0)) {
    throw DomainError("reduced_gf: requires lambda > mu > 0");
  }
  require_unit(s, "reduced_gf");
  require_time(t, "reduced_gf");
  const double p = std::exp(-(rates.lambda - rates.mu) * t);
  return s * p / (1.0 - (1.0 - p) * s);
}

double yule_tail_lower_bound(double c) {
  if (!(c > 0.0)) throw DomainError("yule_tail_lower_bound: c must be > 0");
  return std::pow(0.1, c);
}

double jump_target_pmf(std::int64_t i, std::int64_t j, double C) {
  if (i < 1 || j <= i) throw DomainError("jump_target_pmf: requires j > i >= 1");
  if (!(C > 0.0 && C < 1.0)) throw DomainError("jump_target_pmf: C must lie in (0,1)");
  return (1.0 - C) * std::pow(C, static_cast<double>(j - i - 1));
}

double long_jump_prob(std::int64_t J, double C) {
  if (J < 1) throw DomainError("long_jump_prob: J must be >= 1");
  if (!(C > 0.0 && C < 1.0)) throw DomainError("long_jump_prob: C must lie in (0,1)");
  const double Jd = static_cast<double>(J);
  const double exit_rate = std::pow(C, Jd + 1.0) / (1.0 - C);
  return (1.0 - C) * std::pow(C, Jd - 1.0) * -std::expm1(-exit_rate);
}

LowerSchedule schedule_lower(std::int64_t J, const LinesParams& params) {
  params.validate_model();
  if (J < 1) throw DomainError("schedule_lower: J must be >= 1");
  const double Jd = static_cast<double>(J);
  LowerSchedule out;
  out.t = params.C1 * std::pow(Jd, 1.0 - params.gamma) - 1.0;
  const double net = std::pow(Jd, params.gamma) - std::pow(params.C, Jd + 1.0) / (1.0 - params.C);
  out.log_q = out.t * net - 2.0 * std::log(Jd);
  out.q = std::exp(out.log_q);
  out.degenerate = !(out.t > 0.0);
  return out;
}

std::int64_t schedule_lower_onset(const LinesParams& params, std::int64_t j_max) {
  std::int64_t onset = 0;
  for (std::int64_t J = j_max; J >= 1; --J) {
    const auto s = schedule_lower(J, params);
    if (s.log_q >= params.C1 * static_cast<double>(J) / 2.0) {
      onset = J;
    } else {
      break;
    }
  }
  return onset;
}

double schedule_upper(std::int64_t J, const LinesParams& params) {
  if (J < 1) throw DomainError("schedule_upper: J must be >= 1");
  return params.C2 * std::pow(static_cast<double>(J), 1.0 - params.gamma);
}

ScalingConstants scaling_constants(const LinesParams& params) {
  params.validate();
  const double expo = 1.0 / (1.0 - params.gamma);
  ScalingConstants out;
  out.lower = std::pow((std::pow(2.0, 1.0 - params.gamma) - 1.0) / (2.0 * params.C1), expo);
  out.upper = std::pow(1.0 / params.C2, expo);
  return out;
}

double max_line_tail_bound(std::int64_t J, const LinesParams& params) {
  if (J < 1) throw DomainError("max_line_tail_bound: J must be >= 1");
  const double Jd = static_cast<double>(J);
  const double log_term = Jd * (std::log(params.C) + params.C2);
  return params.C2 * std::pow(Jd, 1.0 - params.gamma) * std::exp(log_term) / (1.0 - params.C);
}

double yule_relative_tail(double c, double t, double lambda) {
  if (!(c > 0.0)) throw DomainError("yule_relative_tail: c must be > 0");
  const double threshold = std::ceil(c * std::exp(lambda * t));
  const double q = -std::expm1(-lambda * t);
  if (threshold <= 1.0) return 1.0;
  return std::exp((threshold - 1.0) * std::log(q));
}

BirthDeathMarginal bd_marginal(const GWRates& rates, double t) {
  rates.validate();
  require_time(t, "bd_marginal");
  const double lam = rates.lambda;
  const double mu = rates.mu;
  BirthDeathMarginal out;
  if (t == 0.0) return out;
  if (lam == mu) {
    const double x = lam * t;
    out.p_zero = x / (1.0 + x);
    out.success = 1.0 / (1.0 + x);
    return out;
  }
  const double net = lam - mu;
  const double em = std::expm1(net * t);
  if (!std::isfinite(em)) {
    out.p_zero = mu / lam;
    out.success = 0.0;
    return out;
  }
  // lambda (e^{(l-m)t} - 1) + (l - m) = lambda e^{(l-m)t} - mu keeps its sign with `net`.
  const double den = lam * em + net;
  out.p_zero = mu * em / den;
  out.success = net / den;
  return out;
}

double marked_death_prob(const GWRates& rates, double marked_rate, double t) {
  rates.validate();
  require_time(t, "marked_death_prob");
  if (!(marked_rate > 0.0 && marked_rate <= rates.mu)) {
    throw DomainError("marked_death_prob: requires 0 < marked_rate <= mu");
  }
  // u(t) = P(no marked death by t) solves u' = lambda u^2 - (lambda + mu) u + (mu - rho),
  // u(0) = 1. With y = u - 1 the roots of the quadratic are y_hi > 0 > y_lo.
  const double lam = rates.lambda;
  const double net = lam - rates.mu;
  const double root_d = std::sqrt(net * net + 4.0 * lam * marked_rate);
  const double y_hi = 2.0 * marked_rate / (net + root_d);
  const double neg_y_lo = (net + root_d) / (2.0 * lam);
  const double decay = std::exp(-root_d * t);
  return y_hi * (-std::expm1(-root_d * t)) / (decay + y_hi / neg_y_lo);
}

}  // namespace analytic
}  // namespace ubranch
