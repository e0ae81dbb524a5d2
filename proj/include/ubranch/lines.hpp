#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ubranch/analytic.hpp"
#include "ubranch/rate_tree.hpp"
#include "ubranch/rng.hpp"

namespace ubranch {

/// Upward-jump law of a lines system: total jump rate from line J is scale * base^{J+1}
/// and the landing offset k >= 1 has pmf (1 - base) base^{k-1}.
struct JumpKernel {
  double scale = 2.0;
  double base = 0.5;

  double exit_rate(std::int64_t line) const;

  /// Jump to line J' at rate C^{J'}.
  static JumpKernel geometric_lines(double C) { return {1.0 / (1.0 - C), C}; }
  /// Jump to line n' or higher at rate e^{-n' D alpha}.
  static JumpKernel strip_minorant(double D, double alpha);
};

struct LinesModel {
  double gamma = 0.5;
  JumpKernel kernel;
  bool jumps_enabled = true;

  static LinesModel from_params(const LinesParams& params) {
    return {params.gamma, JumpKernel::geometric_lines(params.C), true};
  }
};

/// Aggregated population: particles on one line are exchangeable, so a count per line suffices.
struct LinesState {
  std::vector<std::int64_t> counts;  ///< counts[J], index 0 unused
  double total_branch_rate = 0.0;
  double total_jump_rate = 0.0;
  double now = 0.0;
  std::int64_t max_line = 0;  ///< highest line ever occupied
  std::int64_t population = 0;

  std::int64_t count(std::int64_t line) const {
    return line < static_cast<std::int64_t>(counts.size()) ? counts[line] : 0;
  }
};

enum class LinesEventKind { Branch, Jump };

struct LinesEvent {
  LinesEventKind kind;
  std::int64_t from;
  std::int64_t to;  ///< equals `from` for branch events
  double time;
};

/// Exact Gillespie engine for a lines system. Between calls to `step` the state is frozen, so
/// callers can add or remove particles (e.g. absorb arrivals at a level) without bias.
class LinesEngine {
 public:
  static constexpr std::uint64_t kReconcileInterval = std::uint64_t{1} << 16;

  LinesEngine(LinesModel model, Rng rng);

  void add_particles(std::int64_t line, std::int64_t n = 1);
  void remove_particles(std::int64_t line, std::int64_t n = 1);

  /// Performs the next event if it happens no later than `until`; otherwise moves the clock to
  /// `until` and returns nullopt. Redrawing after a refusal is exact by memorylessness.
  std::optional<LinesEvent> step(double until);

  const LinesState& state() const noexcept { return state_; }
  std::uint64_t events() const noexcept { return events_; }
  /// Largest relative gap between cached and recomputed total rates seen at a reconciliation.
  double max_reconcile_error() const noexcept { return max_reconcile_error_; }
  void reconcile();

 private:
  void ensure_line(std::int64_t line);
  void sync_totals();

  LinesModel model_;
  Rng rng_;
  LinesState state_;
  std::vector<double> branch_rate_;
  std::vector<double> exit_rate_;
  RateTree branch_tree_;
  RateTree jump_tree_;
  std::uint64_t events_ = 0;
  double max_reconcile_error_ = 0.0;
};

struct LinesSimConfig {
  LinesParams params;
  double horizon = 10.0;
  std::int64_t cap = 1'000'000;
  std::uint64_t seed = 1;
  std::int64_t sample_grid = 101;
  std::int64_t start_line = 1;
  bool jumps_enabled = true;
  /// Stream index under `seed`; replicate r of a batch uses make_stream(seed, r).
  std::uint64_t replicate = 0;

  void validate() const;
};

struct LinesTrajectory {
  std::vector<double> sample_times;
  std::vector<std::int64_t> population_at;
  std::vector<std::int64_t> max_line_at;
  std::map<std::int64_t, double> first_hit;  ///< Y_J for every line ever occupied
  std::optional<double> cap_hit;
  double horizon = 0.0;
  std::int64_t start_line = 1;
  std::uint64_t events = 0;
  double max_reconcile_error = 0.0;
};

/// Runs the engine for `model` from one particle on `start_line` and records a trajectory.
LinesTrajectory simulate_lines_model(const LinesModel& model, double horizon, std::int64_t cap,
                                     std::int64_t sample_grid, std::int64_t start_line, Rng rng);

/// Exact event-driven realization of the lines model described by `config`.
LinesTrajectory simulate_lines(const LinesSimConfig& config);

/// Same law as simulate_lines_model, simulated jump by jump. Between jumps every line is a
/// birth-death family whose deaths are its exits, so the next exit time of a line holding n
/// particles and its size just before that exit have closed forms (negative binomial).
/// Births are never enumerated; cost grows with the number of jumps only.
/// The cap is checked at jumps and grid times, so `cap_hit` is the first such time at which
/// the population is >= cap.
inline constexpr std::int64_t kMaxExitDrivenCap = 1'000'000'000'000'000;

LinesTrajectory simulate_lines_by_exits(const LinesModel& model, double horizon, std::int64_t cap,
                                        std::int64_t sample_grid, std::int64_t start_line, Rng rng);

/// Max occupied line at the last grid point <= t.
std::int64_t max_line_at(const LinesTrajectory& traj, double t);

/// Uniform sample grid on [0, horizon]; a single point when horizon == 0.
std::vector<double> sample_grid(double horizon, std::int64_t points);

}  // namespace ubranch
