#include "ubranch/spatial.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ubranch/errors.hpp"
#include "ubranch/rate_tree.hpp"

namespace ubranch {

double log_power_rate(double position, double gamma) {
  return std::pow(std::log1p(position), gamma);
}

std::int64_t strip_index(double x) {
  if (!(x >= 1.0)) return -1;
  return static_cast<std::int64_t>(std::floor(std::log(x)));
}

void SpatialConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvariantError("0 < gamma < 1", "gamma is " + std::to_string(gamma));
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvariantError("horizon >= 0", "horizon is " + std::to_string(horizon));
  }
  if (cap < 1) throw InvariantError("cap >= 1", "cap is " + std::to_string(cap));
  if (sample_grid < 2) throw InvariantError("sample_grid >= 2", "sample_grid is " + std::to_string(sample_grid));
  if (!(initial_position >= 0.0)) throw InvariantError("initial_position >= 0", "negative start");
  if (law == BranchLaw::Constant && !(constant_rate > 0.0)) {
    throw InvariantError("constant_rate > 0", "rate is " + std::to_string(constant_rate));
  }
}

namespace {

class SpatialEngine {
 public:
  SpatialEngine(const SpatialConfig& config, Rng rng) : config_(config), rng_(std::move(rng)) {
    move_rate_ = config.movement_enabled ? config.measure.eta() : 0.0;
    if (config.audit_level) {
      const double J = static_cast<double>(*config.audit_level);
      audit_cap_ = 2.0 * std::pow(J, config.gamma);
      audit_threshold_ = std::exp(J);
    }
    add(config.initial_position);
    max_position_ = config.initial_position;
    note_strip(config.initial_position, 0.0);
  }

  bool step(double until) {
    const double n = static_cast<double>(positions_.size());
    const double move_total = move_rate_ * n;
    const double total = move_total + rates_.total();
    if (!(total > 0.0)) {
      now_ = until;
      return false;
    }
    const double dt = exponential(rng_, total);
    if (now_ + dt > until) {
      now_ = until;
      return false;
    }
    now_ += dt;
    const double pick = uniform_open(rng_) * total;
    if (pick < move_total) {
      auto i = static_cast<std::size_t>(uniform_open(rng_) * n);
      if (i >= positions_.size()) i = positions_.size() - 1;
      const double x = positions_[i] + config_.measure.sample(rng_);
      positions_[i] = x;
      rates_.set(i, rate_at(x));
      if (x > max_position_) max_position_ = x;
      note_strip(x, now_);
      audit(rates_.value(i), x);
    } else {
      const std::size_t i = rates_.find(pick - move_total);
      add(positions_[i]);
    }
    if (++events_ % LinesEngine::kReconcileInterval == 0) {
      rates_.rebuild(rates_values());
    }
    return true;
  }

  std::int64_t population() const { return static_cast<std::int64_t>(positions_.size()); }
  double max_position() const { return max_position_; }
  double now() const { return now_; }
  double root_position() const { return positions_.front(); }
  std::uint64_t events() const { return events_; }
  std::map<std::int64_t, double>& strip_hits() { return strip_hits_; }

 private:
  std::vector<double> rates_values() const {
    std::vector<double> v(rates_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = rate_at(positions_[i]);
    return v;
  }

  double rate_at(double x) const {
    return config_.law == BranchLaw::Constant ? config_.constant_rate
                                              : log_power_rate(x, config_.gamma);
  }

  void add(double x) {
    positions_.push_back(x);
    rates_.push_back(rate_at(x));
    audit(rates_.value(positions_.size() - 1), x);
  }

  void note_strip(double x, double t) {
    const auto n = strip_index(x);
    if (n >= 0) strip_hits_.try_emplace(n, t);
  }

  void audit(double rate, double x) {
    if (!config_.audit_level || config_.law != BranchLaw::LogPower) return;
    if (max_position_ <= audit_threshold_ && rate > audit_cap_) {
      throw std::logic_error("spatial audit: branch rate above 2 J^gamma below level e^J");
    }
    const auto n = strip_index(x);
    if (n >= 1 && rate < std::pow(static_cast<double>(n), config_.gamma)) {
      throw std::logic_error("spatial audit: branch rate in strip n below n^gamma");
    }
  }

  const SpatialConfig& config_;
  Rng rng_;
  std::vector<double> positions_;
  RateTree rates_;
  double move_rate_ = 0.0;
  double now_ = 0.0;
  double max_position_ = 0.0;
  std::uint64_t events_ = 0;
  double audit_cap_ = 0.0;
  double audit_threshold_ = 0.0;
  std::map<std::int64_t, double> strip_hits_;
};

}  // namespace

SpatialTrajectory simulate_spatial(const SpatialConfig& config) {
  config.validate();
  SpatialEngine engine(config, make_stream(config.seed, config.replicate));
  SpatialTrajectory traj;
  traj.horizon = config.horizon;
  bool capped = engine.population() >= config.cap;
  if (capped) traj.cap_hit = 0.0;
  for (double g : sample_grid(config.horizon, config.sample_grid)) {
    while (!capped && engine.step(g)) {
      if (engine.population() >= config.cap) {
        traj.cap_hit = engine.now();
        capped = true;
      }
    }
    if (capped && g > *traj.cap_hit) break;
    traj.sample_times.push_back(g);
    traj.population_at.push_back(engine.population());
    traj.max_position_at.push_back(engine.max_position());
  }
  traj.strip_first_hit = std::move(engine.strip_hits());
  traj.root_position = engine.root_position();
  traj.events = engine.events();
  return traj;
}

SpatialTrajectory simulate_spatial(const JumpMeasure& measure, double gamma, double horizon,
                                   std::int64_t cap, std::uint64_t seed) {
  SpatialConfig config;
  config.measure = measure;
  config.gamma = gamma;
  config.horizon = horizon;
  config.cap = cap;
  config.seed = seed;
  return simulate_spatial(config);
}

LinesTrajectory simulate_dominating_lines(double D, double alpha, double gamma, double horizon,
                                          std::int64_t cap, std::uint64_t seed,
                                          std::int64_t grid_points, std::uint64_t replicate,
                                          bool jumps_enabled) {
  if (!(horizon >= 0.0)) throw DomainError("simulate_dominating_lines: horizon must be >= 0");
  if (cap < 1) throw DomainError("simulate_dominating_lines: cap must be >= 1");
  LinesModel model{gamma, JumpKernel::strip_minorant(D, alpha), jumps_enabled};
  return simulate_lines_model(model, horizon, cap, grid_points, 1, make_stream(seed, replicate));
}

SpatialTrajectory simulate_const_rate_dominator(const JumpMeasure& measure, std::int64_t J,
                                                double gamma, double horizon, std::int64_t cap,
                                                std::uint64_t seed, std::uint64_t replicate) {
  if (J < 1) throw DomainError("simulate_const_rate_dominator: J must be >= 1");
  SpatialConfig config;
  config.measure = measure;
  config.gamma = gamma;
  config.horizon = horizon;
  config.cap = cap;
  config.seed = seed;
  config.replicate = replicate;
  config.law = BranchLaw::Constant;
  config.constant_rate = 2.0 * std::pow(static_cast<double>(J), gamma);
  return simulate_spatial(config);
}

}  // namespace ubranch
