#include "ubranch/lines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ubranch/errors.hpp"

namespace ubranch {

double JumpKernel::exit_rate(std::int64_t line) const {
  return scale * std::pow(base, static_cast<double>(line) + 1.0);
}

JumpKernel JumpKernel::strip_minorant(double D, double alpha) {
  if (!(D > 0.0) || !(alpha > 0.0)) throw DomainError("strip_minorant: D and alpha must be > 0");
  return {1.0, std::exp(-D * alpha)};
}

LinesEngine::LinesEngine(LinesModel model, Rng rng) : model_(model), rng_(std::move(rng)) {
  if (!(model_.gamma > 0.0 && model_.gamma < 1.0)) {
    throw InvariantError("0 < gamma < 1", "gamma is " + std::to_string(model_.gamma));
  }
  if (!(model_.kernel.base >= 0.0 && model_.kernel.base < 1.0) || !(model_.kernel.scale >= 0.0)) {
    throw DomainError("LinesEngine: jump kernel needs base in [0,1) and scale >= 0");
  }
  ensure_line(1);
}

void LinesEngine::ensure_line(std::int64_t line) {
  if (line < 1) throw DomainError("lines are indexed from 1");
  auto have = static_cast<std::int64_t>(state_.counts.size());
  if (line < have) return;
  const auto want = std::max<std::int64_t>(line + 1, 2 * have);
  for (std::int64_t j = have; j < want; ++j) {
    state_.counts.push_back(0);
    const double br = j == 0 ? 0.0 : std::pow(static_cast<double>(j), model_.gamma);
    const double ex = (j == 0 || !model_.jumps_enabled) ? 0.0 : model_.kernel.exit_rate(j);
    branch_rate_.push_back(br);
    exit_rate_.push_back(ex);
    branch_tree_.push_back(0.0);
    jump_tree_.push_back(0.0);
  }
}

void LinesEngine::sync_totals() {
  state_.total_branch_rate = branch_tree_.total();
  state_.total_jump_rate = jump_tree_.total();
}

void LinesEngine::add_particles(std::int64_t line, std::int64_t n) {
  ensure_line(line);
  state_.counts[line] += n;
  state_.population += n;
  branch_tree_.add(line, branch_rate_[line] * static_cast<double>(n));
  jump_tree_.add(line, exit_rate_[line] * static_cast<double>(n));
  if (n > 0) state_.max_line = std::max(state_.max_line, line);
  sync_totals();
}

void LinesEngine::remove_particles(std::int64_t line, std::int64_t n) {
  if (state_.count(line) < n) throw DomainError("remove_particles: not enough particles");
  state_.counts[line] -= n;
  state_.population -= n;
  if (state_.counts[line] == 0) {
    branch_tree_.set(line, 0.0);
    jump_tree_.set(line, 0.0);
  } else {
    branch_tree_.add(line, -branch_rate_[line] * static_cast<double>(n));
    jump_tree_.add(line, -exit_rate_[line] * static_cast<double>(n));
  }
  sync_totals();
}

void LinesEngine::reconcile() {
  std::vector<double> br(state_.counts.size());
  std::vector<double> ex(state_.counts.size());
  for (std::size_t j = 0; j < state_.counts.size(); ++j) {
    br[j] = branch_rate_[j] * static_cast<double>(state_.counts[j]);
    ex[j] = exit_rate_[j] * static_cast<double>(state_.counts[j]);
  }
  const auto rel = [](double cached, double exact) {
    if (exact == 0.0) return std::abs(cached);
    return std::abs(cached - exact) / exact;
  };
  branch_tree_.rebuild(br);
  jump_tree_.rebuild(ex);
  max_reconcile_error_ = std::max(max_reconcile_error_,
                                  rel(state_.total_branch_rate, branch_tree_.total()));
  max_reconcile_error_ = std::max(max_reconcile_error_,
                                  rel(state_.total_jump_rate, jump_tree_.total()));
  sync_totals();
}

std::optional<LinesEvent> LinesEngine::step(double until) {
  const double total = state_.total_branch_rate + state_.total_jump_rate;
  if (!(total > 0.0)) {
    state_.now = std::max(state_.now, until);
    return std::nullopt;
  }
  const double dt = exponential(rng_, total);
  if (state_.now + dt > until) {
    state_.now = until;
    return std::nullopt;
  }
  state_.now += dt;
  const double pick = uniform_open(rng_) * total;
  LinesEvent ev{};
  ev.time = state_.now;
  // A pick landing exactly on the boundary resolves as a branch.
  if (pick <= state_.total_branch_rate || state_.total_jump_rate <= 0.0) {
    const auto line = static_cast<std::int64_t>(branch_tree_.find(pick));
    ev = {LinesEventKind::Branch, line, line, state_.now};
    ++state_.counts[line];
    ++state_.population;
    branch_tree_.add(line, branch_rate_[line]);
    jump_tree_.add(line, exit_rate_[line]);
  } else {
    const auto from = static_cast<std::int64_t>(jump_tree_.find(pick - state_.total_branch_rate));
    const auto to = from + geometric_offset(rng_, model_.kernel.base);
    ensure_line(to);
    ev = {LinesEventKind::Jump, from, to, state_.now};
    --state_.counts[from];
    if (state_.counts[from] == 0) {
      branch_tree_.set(from, 0.0);
      jump_tree_.set(from, 0.0);
    } else {
      branch_tree_.add(from, -branch_rate_[from]);
      jump_tree_.add(from, -exit_rate_[from]);
    }
    ++state_.counts[to];
    branch_tree_.add(to, branch_rate_[to]);
    jump_tree_.add(to, exit_rate_[to]);
    state_.max_line = std::max(state_.max_line, to);
  }
  sync_totals();
  if (++events_ % kReconcileInterval == 0) reconcile();
  return ev;
}

void LinesSimConfig::validate() const {
  params.validate_model();
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvariantError("horizon >= 0", "horizon is " + std::to_string(horizon));
  }
  if (cap < 1) throw InvariantError("cap >= 1", "cap is " + std::to_string(cap));
  if (sample_grid < 2) {
    throw InvariantError("sample_grid >= 2", "sample_grid is " + std::to_string(sample_grid));
  }
  if (start_line < 1) throw InvariantError("start_line >= 1", "start_line is " + std::to_string(start_line));
}

std::vector<double> sample_grid(double horizon, std::int64_t points) {
  if (horizon == 0.0) return {0.0};
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (std::int64_t k = 0; k < points; ++k) {
    grid[k] = horizon * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  grid.back() = horizon;
  return grid;
}

LinesTrajectory simulate_lines_model(const LinesModel& model, double horizon, std::int64_t cap,
                                     std::int64_t grid_points, std::int64_t start_line, Rng rng) {
  LinesEngine engine(model, std::move(rng));
  engine.add_particles(start_line, 1);

  LinesTrajectory traj;
  traj.horizon = horizon;
  traj.start_line = start_line;
  traj.first_hit[start_line] = 0.0;
  const auto grid = sample_grid(horizon, grid_points);

  bool capped = engine.state().population >= cap;
  if (capped) traj.cap_hit = 0.0;
  for (double g : grid) {
    while (!capped) {
      const auto ev = engine.step(g);
      if (!ev) break;
      if (ev->kind == LinesEventKind::Jump) {
        traj.first_hit.try_emplace(ev->to, ev->time);
      } else if (engine.state().population >= cap) {
        traj.cap_hit = ev->time;
        capped = true;
      }
    }
    if (capped && g > *traj.cap_hit) break;
    traj.sample_times.push_back(g);
    traj.population_at.push_back(engine.state().population);
    traj.max_line_at.push_back(engine.state().max_line);
  }
  traj.events = engine.events();
  engine.reconcile();
  traj.max_reconcile_error = engine.max_reconcile_error();
  return traj;
}

LinesTrajectory simulate_lines(const LinesSimConfig& config) {
  config.validate();
  LinesModel model = LinesModel::from_params(config.params);
  model.jumps_enabled = config.jumps_enabled;
  return simulate_lines_model(model, config.horizon, config.cap, config.sample_grid,
                              config.start_line, make_stream(config.seed, config.replicate));
}

std::int64_t max_line_at(const LinesTrajectory& traj, double t) {
  if (!(t >= 0.0) || t > traj.horizon) throw DomainError("max_line_at: t outside [0, horizon]");
  if (traj.sample_times.empty() || t < traj.sample_times.front()) {
    throw DomainError("max_line_at: no sample at or before t");
  }
  if (traj.cap_hit && t > traj.sample_times.back() &&
      traj.sample_times.back() < traj.horizon) {
    throw DomainError("max_line_at: t lies beyond the cap time of this trajectory");
  }
  const auto it = std::upper_bound(traj.sample_times.begin(), traj.sample_times.end(), t);
  return traj.max_line_at[static_cast<std::size_t>(it - traj.sample_times.begin()) - 1];
}

}  // namespace ubranch

namespace ubranch {

namespace {

// One line of the exit-driven engine: `count` particles at time `since`, next exit at `exit`.
struct LineClock {
  std::int64_t count = 0;
  double since = 0.0;
  double exit = std::numeric_limits<double>::infinity();
};

class ExitDrivenLines {
 public:
  ExitDrivenLines(const LinesModel& model, Rng rng) : model_(model), rng_(std::move(rng)) {}

  void add(std::int64_t line, double t) {
    grow(line);
    advance(line, t);
    ++lines_[line].count;
    population_ += 1;
    max_line_ = std::max(max_line_, line);
    redraw(line);
  }

  // Line with the earliest pending exit, or 0 if none.
  std::int64_t next() const {
    std::int64_t best = 0;
    double when = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < lines_.size(); ++j) {
      if (lines_[j].exit < when) {
        when = lines_[j].exit;
        best = static_cast<std::int64_t>(j);
      }
    }
    return best;
  }

  double exit_time(std::int64_t line) const { return lines_[line].exit; }

  // Performs the pending exit of `line` and returns the landing line.
  std::int64_t fire(std::int64_t line) {
    auto& c = lines_[line];
    const double t = c.exit;
    const double theta = survive_success(line, t - c.since);
    // Size just before the exit is size-biased: one extra geometric family minus the exiting
    // particle itself.
    const std::int64_t extra = failures(c.count + 1, theta);
    population_ += extra - 1;
    c.count = c.count - 1 + extra;
    c.since = t;
    redraw(line);
    const std::int64_t to = line + geometric_offset(rng_, model_.kernel.base);
    add(to, t);
    ++jumps_;
    return to;
  }

  // Moves every line to time t given that no exit happened before t.
  void advance_all(double t) {
    for (std::size_t j = 1; j < lines_.size(); ++j) {
      if (lines_[j].count == 0) continue;
      advance(static_cast<std::int64_t>(j), t);
      redraw(static_cast<std::int64_t>(j));
    }
  }

  std::int64_t population() const { return population_; }
  std::int64_t max_line() const { return max_line_; }
  std::uint64_t jumps() const { return jumps_; }

 private:
  void grow(std::int64_t line) {
    if (line < 1) throw DomainError("lines are indexed from 1");
    if (static_cast<std::size_t>(line) >= lines_.size()) lines_.resize(static_cast<std::size_t>(line) + 1);
  }

  double branch(std::int64_t line) const { return std::pow(static_cast<double>(line), model_.gamma); }
  double exit_rate(std::int64_t line) const {
    return model_.jumps_enabled ? model_.kernel.exit_rate(line) : 0.0;
  }

  // Success parameter of the geometric size of one family after time u, given it had no exit.
  double survive_success(std::int64_t line, double u) const {
    const double lambda = branch(line);
    const double mu = exit_rate(line);
    const double kappa = lambda + mu;
    return (mu + lambda * std::exp(-kappa * u)) / kappa;
  }

  std::int64_t failures(std::int64_t n, double success) {
    if (n <= 0 || success >= 1.0) return 0;
    std::negative_binomial_distribution<std::int64_t> nb(n, success);
    return nb(rng_);
  }

  void advance(std::int64_t line, double t) {
    auto& c = lines_[line];
    if (c.count > 0 && t > c.since) {
      const std::int64_t extra = failures(c.count, survive_success(line, t - c.since));
      c.count += extra;
      population_ += extra;
    }
    c.since = t;
  }

  // P(no exit within u | n) = Q(u)^n with Q(u) = e^{-ku} / (1 - a (1 - e^{-ku})), a = l/k.
  void redraw(std::int64_t line) {
    auto& c = lines_[line];
    const double mu = exit_rate(line);
    if (c.count == 0 || !(mu > 0.0)) {
      c.exit = std::numeric_limits<double>::infinity();
      return;
    }
    const double lambda = branch(line);
    const double kappa = lambda + mu;
    const double a = lambda / kappa;
    const double delta = -std::expm1(std::log(uniform_open(rng_)) / static_cast<double>(c.count));
    const double gap = delta / ((mu / kappa) + a * delta);
    c.exit = gap >= 1.0 ? std::numeric_limits<double>::infinity()
                        : c.since - std::log1p(-gap) / kappa;
  }

  LinesModel model_;
  Rng rng_;
  std::vector<LineClock> lines_;
  std::int64_t population_ = 0;
  std::int64_t max_line_ = 0;
  std::uint64_t jumps_ = 0;
};

}  // namespace

LinesTrajectory simulate_lines_by_exits(const LinesModel& model, double horizon, std::int64_t cap,
                                        std::int64_t grid_points, std::int64_t start_line, Rng rng) {
  if (!(model.gamma > 0.0 && model.gamma < 1.0)) {
    throw InvariantError("0 < gamma < 1", "gamma is " + std::to_string(model.gamma));
  }
  if (!(horizon >= 0.0)) throw DomainError("simulate_lines_by_exits: horizon must be >= 0");
  if (cap < 1 || cap > kMaxExitDrivenCap) {
    throw DomainError("simulate_lines_by_exits: cap must lie in [1, 1e15]");
  }
  ExitDrivenLines sim(model, std::move(rng));
  sim.add(start_line, 0.0);

  LinesTrajectory traj;
  traj.horizon = horizon;
  traj.start_line = start_line;
  traj.first_hit[start_line] = 0.0;
  bool capped = sim.population() >= cap;
  if (capped) traj.cap_hit = 0.0;
  for (double g : sample_grid(horizon, grid_points)) {
    while (!capped) {
      const std::int64_t line = sim.next();
      if (line == 0 || sim.exit_time(line) > g) break;
      const double t = sim.exit_time(line);
      traj.first_hit.try_emplace(sim.fire(line), t);
      if (sim.population() >= cap) {
        traj.cap_hit = t;
        capped = true;
      }
    }
    if (capped && g > *traj.cap_hit) break;
    sim.advance_all(g);
    if (sim.population() >= cap && !capped) {
      traj.cap_hit = g;
      capped = true;
    }
    traj.sample_times.push_back(g);
    traj.population_at.push_back(sim.population());
    traj.max_line_at.push_back(sim.max_line());
  }
  traj.events = sim.jumps();
  return traj;
}

}  // namespace ubranch
