#include "ubranch/level_probe.hpp"

#include <cmath>

#include "ubranch/colony.hpp"
#include "ubranch/errors.hpp"
#include "ubranch/lines.hpp"

namespace ubranch {

namespace {

struct LevelSetup {
  analytic::LowerSchedule schedule;
  GWRates line_rates;
  double long_jump_rate = 0.0;
};

LevelSetup setup(const LevelProbeConfig& config) {
  config.params.validate_model();
  if (config.level < 1) throw DomainError("probe_level: level must be >= 1");
  LevelSetup s;
  s.schedule = analytic::schedule_lower(config.level, config.params);
  if (s.schedule.degenerate) throw DomainError("probe_level: t_J <= 0 for this level");
  const double J = static_cast<double>(config.level);
  const double C = config.params.C;
  s.line_rates = {std::pow(J, config.params.gamma), std::pow(C, J + 1.0) / (1.0 - C)};
  s.long_jump_rate = std::pow(C, 2.0 * J);
  return s;
}

// Runs lines below J until the first landing on J. Particles landing above J are dropped:
// they never return and cannot influence line J.
bool reach_level(LinesEngine& engine, const LevelProbeConfig& config, LevelProbeResult& out,
                 bool keep_arrival) {
  const std::int64_t J = config.level;
  if (J == 1) {
    engine.add_particles(1);
    if (!keep_arrival) engine.remove_particles(1);
    out.reached = true;
    out.first_hit = 0.0;
    return true;
  }
  engine.add_particles(1);
  for (;;) {
    const auto ev = engine.step(config.reach_cutoff);
    if (!ev) return false;
    if (ev->kind == LinesEventKind::Jump && ev->to >= J) {
      if (ev->to > J || !keep_arrival) engine.remove_particles(ev->to);
      if (ev->to == J) {
        out.reached = true;
        out.first_hit = ev->time;
        return true;
      }
    } else if (engine.state().population >= config.cap) {
      out.capped = true;
      return false;
    }
  }
}

}  // namespace

LevelProbeResult probe_level(const LevelProbeConfig& config, Rng& rng) {
  const LevelSetup s = setup(config);
  const std::int64_t J = config.level;
  LevelProbeResult out;
  LinesEngine engine(LinesModel::from_params(config.params), Rng(rng()));
  if (!reach_level(engine, config, out, false)) {
    out.events = engine.events();
    return out;
  }

  const double T = out.first_hit + s.schedule.t;
  const double q = s.schedule.q;
  const double p_family = analytic::marked_death_prob(s.line_rates, s.long_jump_rate, 1.0);
  const double log_keep = std::log1p(-p_family);
  double landed = 0.0;
  bool b = false;
  const auto land = [&](double a) {
    ++out.arrivals;
    if (a <= T) {
      const auto size = sample_bd_marginal(s.line_rates, T - a, rng);
      landed += static_cast<double>(size);
      if (!b && size > 0) b = bernoulli(rng, -std::expm1(static_cast<double>(size) * log_keep));
    } else if (!b) {
      b = bernoulli(rng, analytic::marked_death_prob(s.line_rates, s.long_jump_rate, T + 1.0 - a));
    }
  };
  land(out.first_hit);

  for (;;) {
    const bool a_known = landed >= q;
    if (a_known && b) break;
    const double until = a_known ? T + 1.0 : T;
    const auto ev = engine.step(until);
    if (!ev) break;
    if (ev->kind == LinesEventKind::Jump && ev->to >= J) {
      engine.remove_particles(ev->to);
      if (ev->to == J) land(ev->time);
    } else if (engine.state().population >= config.cap) {
      out.capped = true;
      break;
    }
  }
  out.events = engine.events();
  if (out.capped) return out;
  out.a_event = landed >= q;
  if (out.a_event) out.b_event = b;
  return out;
}

LevelProbeResult probe_level_direct(const LevelProbeConfig& config, Rng& rng) {
  const LevelSetup s = setup(config);
  const std::int64_t J = config.level;
  LevelProbeResult out;
  LinesEngine engine(LinesModel::from_params(config.params), Rng(rng()));
  if (!reach_level(engine, config, out, true)) {
    out.events = engine.events();
    return out;
  }
  out.arrivals = 1;
  const double T = out.first_hit + s.schedule.t;
  bool b = false;
  for (double until : {T, T + 1.0}) {
    for (;;) {
      const auto ev = engine.step(until);
      if (!ev) break;
      if (ev->kind == LinesEventKind::Jump && ev->to >= J) {
        if (ev->to == J) ++out.arrivals;
        if (ev->from == J && ev->to == 2 * J && ev->time >= T) b = true;
        if (ev->to > J) engine.remove_particles(ev->to);
      } else if (engine.state().population >= config.cap) {
        out.capped = true;
        out.events = engine.events();
        return out;
      }
    }
    if (until == T) {
      out.a_event = static_cast<double>(engine.state().count(J)) >= s.schedule.q;
      if (!out.a_event) break;
    }
  }
  out.events = engine.events();
  if (out.a_event) out.b_event = b;
  return out;
}

}  // namespace ubranch
