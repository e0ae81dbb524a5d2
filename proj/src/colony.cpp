#include "ubranch/colony.hpp"

#include <algorithm>
#include <cmath>

#include "ubranch/errors.hpp"

namespace ubranch {

std::size_t ColonyRealization::index_at(double t) const {
  if (t < 0.0 || t > horizon) throw DomainError("colony: t outside [0, horizon]");
  if (cap_hit && t > times.back()) throw DomainError("colony: t beyond the cap time");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

ColonyRealization simulate_line_colony(const ColonyConfig& config) {
  Rng rng = make_stream(config.seed, config.replicate);
  return simulate_line_colony(config, rng);
}

ColonyRealization simulate_line_colony(const ColonyConfig& config, Rng& rng) {
  config.rates.validate();
  if (!(config.horizon >= 0.0)) throw DomainError("colony: horizon must be >= 0");
  if (config.cap < 1) throw DomainError("colony: cap must be >= 1");

  const double lam = config.rates.lambda;
  const double mu = config.rates.mu;
  ColonyRealization out;
  out.horizon = config.horizon;
  out.coupled = config.coupled;
  out.has_genealogy = config.record_genealogy;

  std::int64_t live = 1;    // X'
  std::int64_t marked = 0;  // X'' - X'
  std::int64_t dead = 0;    // N
  std::vector<std::int64_t> alive_ids;
  if (config.record_genealogy) {
    out.genealogy.push_back(Lineage{0.0, std::numeric_limits<double>::infinity(), -1});
    alive_ids.push_back(0);
  }
  const auto record = [&](double t) {
    out.times.push_back(t);
    out.x_prime.push_back(live);
    out.x_double.push_back(live + marked);
    out.deaths.push_back(dead);
  };
  record(0.0);

  double now = 0.0;
  for (;;) {
    const double rate_live_birth = lam * static_cast<double>(live);
    const double rate_death = mu * static_cast<double>(live);
    const double rate_marked_birth = config.coupled ? lam * static_cast<double>(marked) : 0.0;
    const double total = rate_live_birth + rate_death + rate_marked_birth;
    if (!(total > 0.0)) break;
    const double dt = exponential(rng, total);
    if (now + dt > config.horizon) break;
    now += dt;
    const double pick = uniform_open(rng) * total;
    if (pick < rate_live_birth) {
      ++live;
      if (config.record_genealogy) {
        const auto slot = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(alive_ids.size()));
        const auto parent = alive_ids[std::min(slot, alive_ids.size() - 1)];
        alive_ids.push_back(static_cast<std::int64_t>(out.genealogy.size()));
        out.genealogy.push_back(Lineage{now, std::numeric_limits<double>::infinity(), parent});
      }
    } else if (pick < rate_live_birth + rate_death) {
      --live;
      ++dead;
      if (config.coupled) ++marked;
      if (config.record_genealogy) {
        auto slot = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(alive_ids.size()));
        slot = std::min(slot, alive_ids.size() - 1);
        out.genealogy[alive_ids[slot]].death = now;
        alive_ids[slot] = alive_ids.back();
        alive_ids.pop_back();
      }
      if (live == 0 && !out.extinction_time) out.extinction_time = now;
    } else {
      ++marked;
    }
    record(now);
    const std::int64_t tracked = config.coupled ? live + marked : live;
    if (tracked >= config.cap) {
      out.cap_hit = now;
      break;
    }
  }
  return out;
}

std::int64_t reduced_counts(const ColonyRealization& colony, double t, double survival_horizon) {
  if (!colony.has_genealogy) throw DomainError("reduced_counts: realization has no genealogy");
  if (!(t >= 0.0) || survival_horizon < 5.0 * t) {
    throw DomainError("reduced_counts: survival_horizon must be >= 5 t");
  }
  if (survival_horizon > colony.horizon) {
    throw DomainError("reduced_counts: survival_horizon beyond the realization horizon");
  }
  if (colony.cap_hit && *colony.cap_hit <= survival_horizon) {
    throw DomainError("reduced_counts: realization was capped before survival_horizon");
  }
  const auto& g = colony.genealogy;
  std::vector<char> counted(g.size(), 0);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i].birth <= survival_horizon && g[i].death > survival_horizon)) continue;
    auto j = static_cast<std::int64_t>(i);
    while (g[j].birth > t) j = g[j].parent;
    if (!counted[j]) {
      counted[j] = 1;
      ++total;
    }
  }
  return total;
}

std::int64_t safe_size(const GWRates& rates) {
  rates.validate();
  if (rates.mu == 0.0) return 1;
  if (rates.mu >= rates.lambda) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(std::ceil(-30.0 * std::log(10.0) / std::log(rates.mu / rates.lambda)));
}

namespace {

// Runs a count-only GW chain from `n` particles for `duration`; stops early at `stop_at`.
std::int64_t run_counts(const GWRates& rates, std::int64_t n, double duration, std::int64_t stop_at,
                        Rng& rng) {
  const double per_capita = rates.lambda + rates.mu;
  const double p_birth = rates.lambda / per_capita;
  double now = 0.0;
  while (n > 0 && n < stop_at) {
    now += exponential(rng, per_capita * static_cast<double>(n));
    if (now > duration) break;
    n += uniform_open(rng) < p_birth ? 1 : -1;
  }
  return n;
}

}  // namespace

std::int64_t sample_reduced_count(const GWRates& rates, double t, double survival_horizon, Rng& rng) {
  rates.validate();
  if (!(t >= 0.0) || survival_horizon < 5.0 * t) {
    throw DomainError("sample_reduced_count: survival_horizon must be >= 5 t");
  }
  const std::int64_t alive = run_counts(rates, 1, t, std::numeric_limits<std::int64_t>::max(), rng);
  const std::int64_t safe = safe_size(rates);
  std::int64_t survivors = 0;
  for (std::int64_t i = 0; i < alive; ++i) {
    if (run_counts(rates, 1, survival_horizon - t, safe, rng) > 0) ++survivors;
  }
  return survivors;
}

std::int64_t sample_bd_marginal(const GWRates& rates, double t, Rng& rng) {
  const auto m = analytic::bd_marginal(rates, t);
  if (uniform_open(rng) < m.p_zero) return 0;
  return geometric_count(rng, m.success);
}

}  // namespace ubranch
