#include "ubranch/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <limits>
#include <thread>

#include "ubranch/colony.hpp"
#include "ubranch/errors.hpp"
#include "ubranch/level_probe.hpp"
#include "ubranch/lines.hpp"
#include "ubranch/spatial.hpp"

namespace ubranch {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string num(std::int64_t x) { return std::to_string(x); }

ExperimentSummary proportion_summary(std::string name, std::int64_t hits, std::int64_t trials) {
  ExperimentSummary s;
  s.name = std::move(name);
  s.replicates = trials;
  s.estimate = trials > 0 ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
  const auto ci = stats::wilson(hits, trials);
  s.ci_low = std::min(ci.low, s.estimate);
  s.ci_high = std::max(ci.high, s.estimate);
  return s;
}

std::int64_t worker_count(std::int64_t threads, std::int64_t n) {
  std::int64_t w = threads > 0 ? threads : static_cast<std::int64_t>(std::thread::hardware_concurrency());
  return std::clamp<std::int64_t>(w, 1, std::max<std::int64_t>(n, 1));
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

Verdict combine(std::span<const Verdict> verdicts) {
  bool all_pass = true;
  for (Verdict v : verdicts) {
    if (v == Verdict::Fail) return Verdict::Fail;
    if (v != Verdict::Pass) all_pass = false;
  }
  return all_pass ? Verdict::Pass : Verdict::Indeterminate;
}

Verdict combine(std::span<const ExperimentSummary> summaries) {
  std::vector<Verdict> v;
  for (const auto& s : summaries) v.push_back(s.verdict);
  return combine(std::span<const Verdict>(v));
}

void parallel_for(std::int64_t n, std::int64_t threads, const std::function<void(std::int64_t)>& body) {
  if (n <= 0) return;
  const std::int64_t workers = worker_count(threads, n);
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::int64_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::int64_t i = next++; i < n && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ExperimentSummary extinction_experiment(const GWRates& rates, std::int64_t replicates, double horizon,
                                        std::int64_t cap, double tolerance, const RunOptions& run) {
  const auto start = Clock::now();
  rates.validate();
  std::vector<char> extinct(static_cast<std::size_t>(replicates), 0);
  std::vector<char> capped(static_cast<std::size_t>(replicates), 0);
  parallel_for(replicates, run.threads, [&](std::int64_t r) {
    ColonyConfig c{rates, horizon, cap, run.seed, static_cast<std::uint64_t>(r), false, false};
    const auto colony = simulate_line_colony(c);
    extinct[r] = colony.extinction_time.has_value();
    capped[r] = colony.cap_hit.has_value();
  });
  const auto hits = std::count(extinct.begin(), extinct.end(), 1);
  auto s = proportion_summary("extinction", hits, replicates);
  s.oracle = analytic::extinction_prob(rates);
  s.parameters = {{"lambda", num(rates.lambda)}, {"mu", num(rates.mu)}, {"horizon", num(horizon)},
                  {"cap", num(cap)}, {"tolerance", num(tolerance)}, {"seed", num(static_cast<std::int64_t>(run.seed))}};
  const auto n_capped = std::count(capped.begin(), capped.end(), 1);
  if (n_capped > 0) {
    s.notes.push_back(num(static_cast<std::int64_t>(n_capped)) +
                      " colonies reached the cap and count as survivors");
  }
  s.verdict = std::abs(s.estimate - *s.oracle) <= tolerance ? Verdict::Pass : Verdict::Fail;
  s.runtime_seconds = seconds_since(start);
  return s;
}

ExperimentSummary colony_mean_experiment(const GWRates& rates, double t, std::int64_t replicates,
                                         const RunOptions& run) {
  const auto start = Clock::now();
  std::vector<double> sizes(static_cast<std::size_t>(replicates));
  parallel_for(replicates, run.threads, [&](std::int64_t r) {
    ColonyConfig c{rates, t, std::numeric_limits<std::int64_t>::max(), run.seed,
                   static_cast<std::uint64_t>(r), false, false};
    const auto colony = simulate_line_colony(c);
    sizes[r] = static_cast<double>(colony.x_prime.back());
  });
  const auto est = stats::mean_ci(sizes);
  ExperimentSummary s;
  s.name = "colony_mean";
  s.replicates = replicates;
  s.estimate = est.mean;
  s.ci_low = est.ci.low;
  s.ci_high = est.ci.high;
  s.oracle = analytic::gw_mean(rates, t);
  s.parameters = {{"lambda", num(rates.lambda)}, {"mu", num(rates.mu)}, {"t", num(t)},
                  {"seed", num(static_cast<std::int64_t>(run.seed))}};
  s.verdict = est.ci.contains(*s.oracle) ? Verdict::Pass : Verdict::Fail;
  s.runtime_seconds = seconds_since(start);
  return s;
}

namespace {

ExperimentSummary tv_summary(std::string name, const std::map<std::int64_t, std::int64_t>& counts,
                             const std::function<double(std::int64_t)>& pmf, std::int64_t support_min,
                             std::int64_t n, double tolerance) {
  ExperimentSummary s;
  s.name = std::move(name);
  s.replicates = n;
  s.estimate = stats::total_variation(counts, pmf, support_min);
  s.ci_low = s.estimate;
  s.ci_high = s.estimate;
  s.oracle = 0.0;
  s.parameters["tolerance"] = num(tolerance);
  s.verdict = s.estimate <= tolerance ? Verdict::Pass : Verdict::Fail;
  return s;
}

}  // namespace

ExperimentSummary yule_law_experiment(double lambda, double t, std::int64_t replicates,
                                      double tolerance, const RunOptions& run) {
  const auto start = Clock::now();
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(replicates));
  parallel_for(replicates, run.threads, [&](std::int64_t r) {
    ColonyConfig c{{lambda, 0.0}, t, std::numeric_limits<std::int64_t>::max(), run.seed,
                   static_cast<std::uint64_t>(r), false, false};
    sizes[r] = simulate_line_colony(c).x_prime.back();
  });
  std::map<std::int64_t, std::int64_t> counts;
  for (auto v : sizes) ++counts[v];
  auto s = tv_summary("yule_law", counts, [&](std::int64_t n) { return analytic::yule_pmf(n, t, lambda); },
                      1, replicates, tolerance);
  s.parameters.insert({{"lambda", num(lambda)}, {"t", num(t)}, {"seed", num(static_cast<std::int64_t>(run.seed))}});
  s.runtime_seconds = seconds_since(start);
  return s;
}

ExperimentSummary reduced_process_experiment(const GWRates& rates, double t, double survival_horizon,
                                             std::int64_t replicates, double tolerance,
                                             const RunOptions& run) {
  const auto start = Clock::now();
  if (!(rates.lambda > rates.mu && rates.mu > 0.0)) {
    throw DomainError("reduced_process_experiment: needs lambda > mu > 0");
  }
  // Survival has probability 1 - mu/lambda; draw in fixed-size batches and keep the first
  // `replicates` survivors in index order.
  std::vector<std::int64_t> kept;
  std::int64_t attempts = 0;
  const std::int64_t batch = std::max<std::int64_t>(replicates, 64);
  while (static_cast<std::int64_t>(kept.size()) < replicates) {
    if (attempts > 1000 * replicates) throw DomainError("reduced_process_experiment: too few survivors");
    std::vector<std::int64_t> out(static_cast<std::size_t>(batch));
    parallel_for(batch, run.threads, [&](std::int64_t i) {
      Rng rng = make_stream(run.seed, static_cast<std::uint64_t>(attempts + i));
      out[i] = sample_reduced_count(rates, t, survival_horizon, rng);
    });
    for (auto v : out) {
      if (v > 0 && static_cast<std::int64_t>(kept.size()) < replicates) kept.push_back(v);
    }
    attempts += batch;
  }
  std::map<std::int64_t, std::int64_t> counts;
  for (auto v : kept) ++counts[v];
  const double skeleton_rate = rates.lambda - rates.mu;
  auto s = tv_summary("reduced_process", counts,
                      [&](std::int64_t n) { return analytic::yule_pmf(n, t, skeleton_rate); }, 1,
                      replicates, tolerance);
  s.parameters.insert({{"lambda", num(rates.lambda)}, {"mu", num(rates.mu)}, {"t", num(t)},
                       {"survival_horizon", num(survival_horizon)},
                       {"seed", num(static_cast<std::int64_t>(run.seed))}});
  s.notes.push_back("survival judged at the horizon; subtrees reaching " +
                    num(safe_size(rates)) + " particles count as surviving");
  s.runtime_seconds = seconds_since(start);
  return s;
}

ExperimentSummary jump_law_experiment(const LinesParams& params, std::int64_t min_jumps,
                                      double tolerance, const RunOptions& run) {
  const auto start = Clock::now();
  params.validate_model();
  std::map<std::int64_t, std::int64_t> counts;
  std::int64_t jumps = 0;
  for (std::uint64_t r = 0; jumps < min_jumps; ++r) {
    LinesEngine engine(LinesModel::from_params(params), make_stream(run.seed, r));
    engine.add_particles(1);
    while (jumps < min_jumps && engine.state().population < 100'000) {
      const auto ev = engine.step(50.0);
      if (!ev) break;
      if (ev->kind == LinesEventKind::Jump) {
        ++counts[ev->to - ev->from];
        ++jumps;
      }
    }
  }
  auto s = tv_summary("jump_law", counts,
                      [&](std::int64_t k) { return analytic::jump_target_pmf(1, 1 + k, params.C); }, 1,
                      jumps, tolerance);
  s.parameters.insert({{"C", num(params.C)}, {"gamma", num(params.gamma)},
                       {"seed", num(static_cast<std::int64_t>(run.seed))}});
  s.runtime_seconds = seconds_since(start);
  return s;
}

TailCalibration yule_tail_calibration(double lambda, std::span<const double> c_list, double t_check,
                                      double c_check, std::int64_t replicates, double tolerance,
                                      const RunOptions& run) {
  const auto start = Clock::now();
  if (!(lambda > 0.0)) throw DomainError("yule_tail_calibration: lambda must be > 0");
  TailCalibration out;
  auto& scan = out.scan;
  scan.name = "yule_tail_scan";
  scan.parameters = {{"lambda", num(lambda)}};
  std::string cs;
  for (double c : c_list) cs += (cs.empty() ? "" : ",") + num(c);
  scan.parameters["c_list"] = cs;
  // Scan lambda t on a 0.01 grid from 0.1; report the onset after which every later grid point
  // up to 20 also satisfies the bound.
  const double step = 0.01;
  double onset = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; 0.1 + i * step <= 20.0 + 1e-9; ++i) {
    const double lt = 0.1 + i * step;
    bool ok = true;
    for (double c : c_list) {
      ok = ok && analytic::yule_relative_tail(c, lt / lambda, lambda) >= analytic::yule_tail_lower_bound(c);
    }
    if (!ok) {
      onset = std::numeric_limits<double>::quiet_NaN();
    } else if (std::isnan(onset)) {
      onset = lt;
    }
  }
  scan.estimate = std::isnan(onset) ? 0.0 : onset;
  scan.ci_low = scan.ci_high = scan.estimate;
  scan.verdict = std::isnan(onset) ? Verdict::Fail : Verdict::Pass;
  scan.notes.push_back(std::isnan(onset) ? "no onset of the (1/10)^c bound on lambda t in [0.1, 20]"
                                         : "smallest lambda t on the 0.01 grid from which the exact tail stays above (1/10)^c: " + num(onset));

  auto& mc = out.monte_carlo;
  const double exact = analytic::yule_relative_tail(c_check, t_check, lambda);
  const auto threshold = static_cast<std::int64_t>(std::ceil(c_check * std::exp(lambda * t_check)));
  std::vector<char> hit(static_cast<std::size_t>(replicates));
  parallel_for(replicates, run.threads, [&](std::int64_t r) {
    ColonyConfig c{{lambda, 0.0}, t_check, std::numeric_limits<std::int64_t>::max(), run.seed,
                   static_cast<std::uint64_t>(r), false, false};
    hit[r] = simulate_line_colony(c).x_prime.back() >= threshold;
  });
  mc = proportion_summary("yule_tail_monte_carlo", std::count(hit.begin(), hit.end(), 1), replicates);
  mc.oracle = exact;
  mc.parameters = {{"lambda", num(lambda)}, {"t", num(t_check)}, {"c", num(c_check)},
                   {"tolerance", num(tolerance)}, {"seed", num(static_cast<std::int64_t>(run.seed))}};
  const double bound = analytic::yule_tail_lower_bound(c_check);
  mc.notes.push_back("exact tail " + num(exact) + " against the lower bound " + num(bound));
  mc.verdict = std::abs(mc.estimate - exact) <= tolerance && exact >= bound ? Verdict::Pass : Verdict::Fail;
  scan.runtime_seconds = mc.runtime_seconds = seconds_since(start);
  return out;
}

ExperimentSummary tail_bound_summability(const LinesParams& params, std::int64_t j_max, double epsilon) {
  const auto start = Clock::now();
  params.validate();
  std::vector<double> terms(static_cast<std::size_t>(j_max) + 1, 0.0);
  for (std::int64_t J = 1; J <= j_max; ++J) terms[J] = analytic::max_line_tail_bound(J, params);
  // Remaining mass after J, summed from the top to avoid cancellation.
  std::vector<double> rest(static_cast<std::size_t>(j_max) + 2, 0.0);
  for (std::int64_t J = j_max; J >= 1; --J) rest[J] = rest[J + 1] + terms[J];
  std::int64_t onset = 0;
  for (std::int64_t J = 1; J <= j_max; ++J) {
    if (rest[J + 1] <= epsilon) {
      onset = J;
      break;
    }
  }
  ExperimentSummary s;
  s.name = "tail_bound_summability";
  s.replicates = 0;
  s.estimate = rest[1];
  s.ci_low = s.ci_high = s.estimate;
  s.parameters = {{"gamma", num(params.gamma)}, {"C", num(params.C)}, {"C2", num(params.C2)},
                  {"j_max", num(j_max)}, {"epsilon", num(epsilon)}};
  s.verdict = onset > 0 && std::isfinite(rest[1]) ? Verdict::Pass : Verdict::Fail;
  s.notes.push_back(onset > 0 ? "partial sums within " + num(epsilon) + " of the sum at J = " + num(j_max) +
                                    " from J = " + num(onset)
                              : "partial sums not Cauchy to epsilon by j_max");
  s.runtime_seconds = seconds_since(start);
  return s;
}

std::vector<ExperimentSummary> upper_tail_check(const LinesParams& params,
                                                std::span<const std::int64_t> levels,
                                                std::int64_t replicates, const RunOptions& run) {
  params.validate();
  std::vector<ExperimentSummary> out;
  for (std::int64_t J : levels) {
    const auto start = Clock::now();
    const double t = analytic::schedule_upper(J, params);
    std::vector<char> hit(static_cast<std::size_t>(replicates));
    std::vector<char> capped(static_cast<std::size_t>(replicates));
    parallel_for(replicates, run.threads, [&](std::int64_t r) {
      LinesSimConfig c;
      c.params = params;
      c.horizon = t;
      c.cap = 10'000'000;
      c.seed = run.seed + static_cast<std::uint64_t>(J);
      c.replicate = static_cast<std::uint64_t>(r);
      c.sample_grid = 2;
      const auto traj = simulate_lines(c);
      capped[r] = traj.cap_hit.has_value();
      // A capped run is counted as reaching J, which can only raise the estimate.
      hit[r] = capped[r] || traj.max_line_at.back() >= J;
    });
    auto s = proportion_summary("upper_tail_J" + num(J), std::count(hit.begin(), hit.end(), 1), replicates);
    const double bound = analytic::max_line_tail_bound(J, params);
    s.oracle = bound;
    s.parameters = {{"J", num(J)}, {"t_J", num(t)}, {"gamma", num(params.gamma)}, {"C", num(params.C)},
                    {"C2", num(params.C2)}, {"seed", num(static_cast<std::int64_t>(run.seed))}};
    const auto n_capped = std::count(capped.begin(), capped.end(), 1);
    if (n_capped > 0) s.notes.push_back(num(static_cast<std::int64_t>(n_capped)) + " capped runs counted as hits");
    if (bound >= 1.0) {
      s.verdict = Verdict::Pass;
      s.notes.push_back("bound >= 1, automatic pass");
    } else {
      const double sigma = std::sqrt(bound * (1.0 - bound) / static_cast<double>(replicates));
      s.verdict = s.estimate <= bound + 3.0 * sigma ? Verdict::Pass : Verdict::Fail;
      s.notes.push_back("threshold bound + 3 sigma = " + num(bound + 3.0 * sigma));
    }
    s.runtime_seconds = seconds_since(start);
    out.push_back(std::move(s));
  }
  return out;
}

ExperimentSummary strip_bound_check(std::span<const double> alphas, double D, std::int64_t n_max,
                                    std::int64_t k_max) {
  const auto start = Clock::now();
  ExperimentSummary s;
  s.name = "strip_tail_bound";
  std::int64_t checked = 0;
  std::int64_t failed = 0;
  for (double a : alphas) {
    JumpMeasure m(a, 1.0, 1.0);
    for (std::int64_t n = 1; n <= n_max; ++n) {
      for (std::int64_t k = 1; k <= k_max; ++k) {
        ++checked;
        if (!strip_tail_bound_holds(m, n, k, D)) {
          ++failed;
          if (failed <= 5) s.notes.push_back("fails at alpha=" + num(a) + " n=" + num(n) + " k=" + num(k));
        }
      }
    }
  }
  s.replicates = checked;
  s.estimate = static_cast<double>(failed);
  s.ci_low = s.ci_high = s.estimate;
  s.oracle = 0.0;
  s.parameters = {{"D", num(D)}, {"n_max", num(n_max)}, {"k_max", num(k_max)}};
  s.verdict = failed == 0 ? Verdict::Pass : Verdict::Fail;
  s.runtime_seconds = seconds_since(start);
  return s;
}

ExperimentSummary long_jump_ratio_check(double C, std::int64_t j_lo, std::int64_t j_hi, double low) {
  const auto start = Clock::now();
  ExperimentSummary s;
  s.name = "long_jump_ratio";
  double worst_low = std::numeric_limits<double>::infinity();
  double worst_high = 0.0;
  bool below_power = false;
  for (std::int64_t J = j_lo; J <= j_hi; ++J) {
    const double ratio = analytic::long_jump_prob(J, C) / std::pow(C, 2.0 * static_cast<double>(J));
    worst_low = std::min(worst_low, ratio);
    worst_high = std::max(worst_high, ratio);
    below_power = below_power || ratio < 1.0;
  }
  s.replicates = j_hi - j_lo + 1;
  s.estimate = worst_low;
  s.ci_low = worst_low;
  s.ci_high = worst_high;
  s.oracle = 1.0;
  s.parameters = {{"C", num(C)}, {"J_lo", num(j_lo)}, {"J_hi", num(j_hi)}, {"low", num(low)}};
  s.verdict = worst_low > low && worst_high <= 1.0 ? Verdict::Pass : Verdict::Fail;
  if (below_power) {
    s.notes.push_back("diagnostic: alpha_J >= C^{2J} is violated on this range; alpha_J / C^{2J} < 1 and tends to 1");
  }
  s.runtime_seconds = seconds_since(start);
  return s;
}

std::vector<ExperimentSummary> estimate_event_probs(const EventProbConfig& config, const RunOptions& run) {
  config.params.validate();
  std::vector<ExperimentSummary> out;
  for (std::int64_t J : config.levels) {
    const auto start = Clock::now();
    const auto schedule = analytic::schedule_lower(J, config.params);
    const std::map<std::string, std::string> params = {
        {"J", num(J)}, {"gamma", num(config.params.gamma)}, {"C", num(config.params.C)},
        {"C1", num(config.params.C1)}, {"t_J", num(schedule.t)}, {"q_J", num(schedule.q)},
        {"seed", num(static_cast<std::int64_t>(run.seed))}};
    if (schedule.degenerate) {
      for (const char* kind : {"A", "B"}) {
        ExperimentSummary s;
        s.name = std::string("event_") + kind + "_J" + num(J);
        s.parameters = params;
        s.verdict = Verdict::Indeterminate;
        s.notes.push_back("t_J <= 0: level below the validity of the schedule, not run");
        out.push_back(std::move(s));
      }
      continue;
    }
    LevelProbeConfig probe;
    probe.params = config.params;
    probe.level = J;
    probe.reach_cutoff = config.reach_factor * schedule.t + config.reach_budget;
    probe.cap = config.cap;
    std::vector<LevelProbeResult> results(static_cast<std::size_t>(config.replicates));
    std::vector<std::int64_t> attempts(static_cast<std::size_t>(config.replicates), 0);
    parallel_for(config.replicates, run.threads, [&](std::int64_t r) {
      Rng rng = make_stream(run.seed + static_cast<std::uint64_t>(J), static_cast<std::uint64_t>(r));
      for (std::int64_t k = 0; k < config.max_attempts; ++k) {
        ++attempts[r];
        auto res = probe_level(probe, rng);
        if (res.reached && !res.capped) {
          results[r] = res;
          return;
        }
      }
    });
    std::int64_t reached = 0, a_hits = 0, b_hits = 0, total_attempts = 0;
    for (std::size_t r = 0; r < results.size(); ++r) {
      total_attempts += attempts[r];
      if (!results[r].reached) continue;
      ++reached;
      if (results[r].a_event) {
        ++a_hits;
        if (results[r].b_event.value_or(false)) ++b_hits;
      }
    }
    auto a = proportion_summary("event_A_J" + num(J), a_hits, reached);
    a.parameters = params;
    a.parameters["reach_cutoff"] = num(probe.reach_cutoff);
    a.notes.push_back("Z_J by rejection: " + num(reached) + " conditioned replicates from " +
                      num(total_attempts) + " attempts");
    a.verdict = reached == config.replicates ? (a.estimate >= 0.5 ? Verdict::Pass : Verdict::Fail)
                                             : Verdict::Indeterminate;
    auto b = proportion_summary("event_B_J" + num(J), b_hits, a_hits);
    b.parameters = params;
    b.oracle = 1.0 - std::pow(2.0 / std::exp(1.0), static_cast<double>(J));
    b.notes.push_back("oracle is the lower bound 1 - (2/e)^J");
    b.verdict = a_hits == 0 ? Verdict::Indeterminate
                            : (b.estimate >= *b.oracle - (b.ci_high - b.ci_low) ? Verdict::Pass : Verdict::Fail);
    a.runtime_seconds = b.runtime_seconds = seconds_since(start);
    out.push_back(std::move(a));
    out.push_back(std::move(b));
  }
  return out;
}

Verdict event_verdict(std::span<const ExperimentSummary> summaries, std::vector<std::string>* notes) {
  std::vector<const ExperimentSummary*> as, bs;
  for (const auto& s : summaries) {
    if (s.name.rfind("event_A_", 0) == 0) as.push_back(&s);
    if (s.name.rfind("event_B_", 0) == 0) bs.push_back(&s);
  }
  const auto note = [&](const std::string& n) {
    if (notes) notes->push_back(n);
  };
  Verdict v = Verdict::Pass;
  double prev = -1.0;
  bool any = false;
  for (const auto* a : as) {
    if (a->verdict == Verdict::Indeterminate) continue;
    any = true;
    if (a->estimate < 0.5) {
      note(a->name + " below 0.5");
      v = Verdict::Fail;
    }
    if (a->estimate < prev) {
      note(a->name + " decreases relative to the previous level");
      v = Verdict::Fail;
    }
    prev = a->estimate;
  }
  const ExperimentSummary* last_b = nullptr;
  for (const auto* b : bs) {
    if (b->verdict != Verdict::Indeterminate) last_b = b;
  }
  if (!any || last_b == nullptr) return Verdict::Indeterminate;
  if (last_b->verdict != Verdict::Pass) {
    note(last_b->name + " below 1 - (2/e)^J minus CI width");
    v = Verdict::Fail;
  }
  return v;
}

void finish_band(ScalingBand& band, const std::vector<std::vector<double>>& control_ratios) {
  std::vector<double> all;
  std::vector<double> xs, ys;
  band.nonpositive = 0;
  for (const auto& series : band.ratios) {
    for (std::size_t i = 0; i < series.size(); ++i) {
      all.push_back(series[i]);
      if (series[i] > 0.0 && std::isfinite(series[i])) {
        xs.push_back(std::log(band.times[i]));
        ys.push_back(std::log(series[i]));
      } else {
        ++band.nonpositive;
      }
    }
  }
  if (all.empty()) {
    band.verdict = Verdict::Indeterminate;
    band.notes.push_back("no uncapped replicate");
    return;
  }
  band.band_low = *std::min_element(all.begin(), all.end());
  band.band_high = *std::max_element(all.begin(), all.end());
  band.median = stats::quantile(all, 0.5);
  if (xs.size() >= 3) {
    const auto fit = stats::least_squares(xs, ys);
    band.slope = fit.slope;
    band.slope_std_error = fit.slope_std_error;
  } else {
    band.slope = std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<double> cx, cy;
  for (const auto& series : control_ratios) {
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (series[i] > 0.0 && std::isfinite(series[i])) {
        cx.push_back(std::log(band.times[i]));
        cy.push_back(std::log(series[i]));
      }
    }
  }
  band.control_slope = cx.size() >= 3 ? stats::least_squares(cx, cy).slope
                                      : std::numeric_limits<double>::quiet_NaN();

  const bool positive = band.band_low > 0.0;
  const bool narrow = positive && band.band_high / band.band_low <= band.spread_limit;
  const bool flat = std::abs(band.slope) <= band.slope_tolerance;
  const bool control_rejected = !(std::abs(band.control_slope) <= band.slope_tolerance);
  if (!positive) band.notes.push_back("band_low <= 0");
  if (positive && !narrow) band.notes.push_back("band_high / band_low above " + num(band.spread_limit));
  if (!flat) band.notes.push_back("slope of ln ratio against ln t outside +-" + num(band.slope_tolerance));
  if (!control_rejected) band.notes.push_back("control with exponent 1 passes the slope test");
  band.verdict = positive && narrow && flat && control_rejected ? Verdict::Pass : Verdict::Fail;
}

namespace {

std::vector<double> window_times(const std::vector<double>& grid, double t_lo) {
  std::vector<double> out;
  for (double t : grid) {
    if (t >= t_lo && t > 0.0) out.push_back(t);
  }
  return out;
}

// Draws replicates in batches and keeps the first `wanted` accepted ones in index order, so
// the selection does not depend on the number of threads.
template <class Traj, class Run, class Accept>
std::vector<std::pair<std::uint64_t, Traj>> first_accepted(std::int64_t wanted, std::int64_t max_attempts,
                                                           std::int64_t threads, Run run, Accept accept,
                                                           std::int64_t& rejected) {
  std::vector<std::pair<std::uint64_t, Traj>> kept;
  rejected = 0;
  std::int64_t next = 0;
  while (static_cast<std::int64_t>(kept.size()) < wanted && next < max_attempts) {
    const std::int64_t batch = std::min(std::max<std::int64_t>(wanted - static_cast<std::int64_t>(kept.size()), 1),
                                        max_attempts - next);
    std::vector<Traj> out(static_cast<std::size_t>(batch));
    parallel_for(batch, threads, [&](std::int64_t i) { out[i] = run(static_cast<std::uint64_t>(next + i)); });
    for (std::int64_t i = 0; i < batch; ++i) {
      if (static_cast<std::int64_t>(kept.size()) >= wanted) break;
      if (accept(out[i])) {
        kept.emplace_back(static_cast<std::uint64_t>(next + i), std::move(out[i]));
      } else {
        ++rejected;
      }
    }
    next += batch;
  }
  return kept;
}

}  // namespace

ScalingBand scaling_band_lines(const LinesBandConfig& config, const RunOptions& run) {
  const auto start = Clock::now();
  config.params.validate_model();
  if (!(config.horizon > 0.0)) throw DomainError("scaling_band_lines: horizon must be > 0");
  ScalingBand band;
  band.statistic = "max_line";
  band.gamma = config.params.gamma;
  band.exponent = 1.0 / (1.0 - band.gamma);
  band.t_lo = config.horizon / 2.0;
  band.t_hi = config.horizon;
  band.slope_tolerance = config.slope_tolerance;
  band.spread_limit = config.spread_limit;
  const auto grid = sample_grid(config.horizon, config.sample_grid);
  band.times = window_times(grid, band.t_lo);
  const LinesModel model = LinesModel::from_params(config.params);

  std::int64_t rejected = 0;
  auto kept = first_accepted<LinesTrajectory>(
      config.replicates, config.max_attempts, run.threads,
      [&](std::uint64_t r) {
        Rng rng = make_stream(run.seed, r);
        return config.engine == LinesEngineKind::Exits
                   ? simulate_lines_by_exits(model, config.horizon, config.cap, config.sample_grid, 1, rng)
                   : simulate_lines_model(model, config.horizon, config.cap, config.sample_grid, 1, rng);
      },
      [](const LinesTrajectory& t) { return !t.cap_hit.has_value(); }, rejected);
  band.capped = rejected;

  std::vector<std::vector<double>> control;
  band.final_population_min = std::numeric_limits<std::int64_t>::max();
  for (const auto& [id, traj] : kept) {
    std::vector<double> series, ctrl;
    const std::size_t offset = traj.sample_times.size() - band.times.size();
    for (std::size_t i = 0; i < band.times.size(); ++i) {
      const double t = band.times[i];
      const double m = static_cast<double>(traj.max_line_at[offset + i]);
      series.push_back(m / std::pow(t, band.exponent));
      ctrl.push_back(m / t);
    }
    band.ratios.push_back(std::move(series));
    control.push_back(std::move(ctrl));
    band.replicate_ids.push_back(id);
    band.final_population_min = std::min(band.final_population_min, traj.population_at.back());
  }
  if (band.capped > 0) {
    band.notes.push_back(num(band.capped) + " capped replicates excluded; the kept ones are biased toward slower growth");
  }
  band.control_ratios = control;
  finish_band(band, band.control_ratios);
  if (static_cast<std::int64_t>(kept.size()) < config.replicates) {
    band.notes.push_back("only " + num(static_cast<std::int64_t>(kept.size())) + " uncapped replicates");
    if (kept.empty()) band.verdict = Verdict::Fail;
    else band.verdict = Verdict::Indeterminate;
  }
  band.runtime_seconds = seconds_since(start);
  return band;
}

ScalingBand scaling_band_spatial(const SpatialBandConfig& config, const RunOptions& run) {
  const auto start = Clock::now();
  if (!(config.horizon > 0.0)) throw DomainError("scaling_band_spatial: horizon must be > 0");
  ScalingBand band;
  band.statistic = "ln_max_position";
  band.gamma = config.gamma;
  band.exponent = 1.0 / (1.0 - config.gamma);
  band.t_lo = config.horizon / 2.0;
  band.t_hi = config.horizon;
  band.slope_tolerance = config.slope_tolerance;
  band.spread_limit = config.spread_limit;
  const auto grid = sample_grid(config.horizon, config.sample_grid);
  band.times = window_times(grid, band.t_lo);

  std::int64_t rejected = 0;
  auto kept = first_accepted<SpatialTrajectory>(
      config.replicates, config.max_attempts, run.threads,
      [&](std::uint64_t r) {
        SpatialConfig c;
        c.measure = config.measure;
        c.gamma = config.gamma;
        c.horizon = config.horizon;
        c.cap = config.cap;
        c.seed = run.seed;
        c.replicate = r;
        c.sample_grid = config.sample_grid;
        return simulate_spatial(c);
      },
      [](const SpatialTrajectory& t) { return !t.cap_hit.has_value(); }, rejected);
  band.capped = rejected;

  std::vector<std::vector<double>> control;
  band.final_population_min = std::numeric_limits<std::int64_t>::max();
  for (const auto& [id, traj] : kept) {
    std::vector<double> series, ctrl;
    const std::size_t offset = traj.sample_times.size() - band.times.size();
    for (std::size_t i = 0; i < band.times.size(); ++i) {
      const double t = band.times[i];
      const double m = traj.max_position_at[offset + i];
      // Before the first jump M = 0; the ratio is then reported as 0.
      const double lm = m > 0.0 ? std::log(m) : 0.0;
      series.push_back(lm / std::pow(t, band.exponent));
      ctrl.push_back(lm / t);
    }
    band.ratios.push_back(std::move(series));
    control.push_back(std::move(ctrl));
    band.replicate_ids.push_back(id);
    band.final_population_min = std::min(band.final_population_min, traj.population_at.back());
  }
  if (band.capped > 0) {
    band.notes.push_back(num(band.capped) + " capped replicates excluded; the kept ones are biased toward slower growth");
  }
  band.control_ratios = control;
  finish_band(band, band.control_ratios);
  if (static_cast<std::int64_t>(kept.size()) < config.replicates) {
    band.notes.push_back("only " + num(static_cast<std::int64_t>(kept.size())) + " uncapped replicates");
    band.verdict = kept.empty() ? Verdict::Fail : Verdict::Indeterminate;
  } else if (band.final_population_min < config.min_final_population) {
    band.notes.push_back("some replicate ends with fewer than " + num(config.min_final_population) +
                         " particles; horizon too short");
    band.verdict = Verdict::Indeterminate;
  }
  band.runtime_seconds = seconds_since(start);
  return band;
}

DominationResult domination_quantiles(std::span<const double> lower, std::span<const double> upper,
                                      std::span<const double> levels, std::int64_t resamples,
                                      std::uint64_t seed, std::int64_t min_samples) {
  const auto start = Clock::now();
  if (lower.size() != upper.size()) throw DomainError("domination_quantiles: mismatched sample sizes");
  if (static_cast<std::int64_t>(lower.size()) < min_samples) {
    throw DomainError("domination_quantiles: need at least " + num(min_samples) + " samples per side");
  }
  DominationResult out;
  auto& s = out.summary;
  s.name = "domination";
  s.replicates = static_cast<std::int64_t>(lower.size());
  Rng rng = make_stream(seed, 0);
  std::vector<double> lo(lower.begin(), lower.end());
  std::vector<double> up(upper.begin(), upper.end());
  std::int64_t violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (double level : levels) {
    DominationLevel d;
    d.level = level;
    d.lower_quantile = stats::quantile(lo, level);
    d.upper_quantile = stats::quantile(up, level);
    d.gap_ci = stats::bootstrap_quantile_gap(lower, upper, level, resamples, 0.99, rng);
    const double gap = d.lower_quantile == d.upper_quantile ? 0.0 : d.upper_quantile - d.lower_quantile;
    d.violated = gap < -d.gap_ci.width();
    worst = std::min(worst, gap + d.gap_ci.width());
    if (d.violated) {
      ++violations;
      s.notes.push_back("level " + num(level) + ": upper quantile " + num(d.upper_quantile) +
                        " below lower " + num(d.lower_quantile) + " by more than the CI width " +
                        num(d.gap_ci.width()));
    }
    out.levels.push_back(d);
  }
  s.estimate = static_cast<double>(violations);
  s.ci_low = s.ci_high = s.estimate;
  s.oracle = 0.0;
  s.parameters = {{"resamples", num(resamples)}, {"seed", num(static_cast<std::int64_t>(seed))}};
  s.notes.push_back("smallest gap + CI width over levels: " + num(worst));
  s.verdict = violations == 0 ? Verdict::Pass : Verdict::Fail;
  s.runtime_seconds = seconds_since(start);
  return out;
}

DominationResult dominate_experiment(const DominationConfig& config, const RunOptions& run) {
  const auto start = Clock::now();
  std::vector<double> ln_m(static_cast<std::size_t>(config.replicates));
  std::vector<double> lines(static_cast<std::size_t>(config.replicates));
  std::vector<char> capped(static_cast<std::size_t>(config.replicates));
  const LinesModel minorant{config.gamma, JumpKernel::strip_minorant(config.D, config.measure.alpha()), true};
  parallel_for(config.replicates, run.threads, [&](std::int64_t r) {
    SpatialConfig c;
    c.measure = config.measure;
    c.gamma = config.gamma;
    c.horizon = config.horizon;
    c.cap = config.cap;
    c.seed = run.seed;
    c.replicate = static_cast<std::uint64_t>(r);
    c.sample_grid = 2;
    const auto x = simulate_spatial(c);
    const double m = x.max_position_at.back();
    ln_m[r] = m > 0.0 ? std::log(m) : -std::numeric_limits<double>::infinity();
    capped[r] = x.cap_hit.has_value();
    const auto y = simulate_lines_by_exits(minorant, config.horizon, kMaxExitDrivenCap, 2, 1,
                                           make_stream(run.seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(r)));
    lines[r] = static_cast<double>(y.max_line_at.back());
  });
  auto out = domination_quantiles(lines, ln_m, config.levels, config.resamples, run.seed, 1000);
  out.summary.name = "domination_spatial_over_lines";
  out.summary.parameters.insert({{"horizon", num(config.horizon)}, {"D", num(config.D)},
                                 {"alpha", num(config.measure.alpha())}, {"gamma", num(config.gamma)},
                                 {"replicates", num(config.replicates)}});
  const auto n_capped = std::count(capped.begin(), capped.end(), 1);
  if (n_capped > 0) {
    out.summary.notes.push_back(num(static_cast<std::int64_t>(n_capped)) +
                                " spatial runs capped; their ln M at the cap time is a lower bound");
  }
  out.summary.runtime_seconds = seconds_since(start);
  return out;
}

std::vector<ExperimentSummary> validate_suite(const RunOptions& run) {
  std::vector<ExperimentSummary> out;
  out.push_back(extinction_experiment({2.0, 1.0}, 5000, 30.0, 1000, 0.02, run));
  out.push_back(colony_mean_experiment({1.5, 0.5}, 2.0, 100'000, run));
  out.push_back(yule_law_experiment(1.0, std::log(2.0), 10000, 0.02, run));
  out.push_back(reduced_process_experiment({2.0, 1.0}, 2.0, 12.0, 10'000, 0.05, run));
  LinesParams params;
  out.push_back(jump_law_experiment(params, 10000, 0.02, run));
  const std::vector<double> cs{0.5, 1.0, 2.0};
  auto cal = yule_tail_calibration(1.0, cs, 3.0, 1.0, 10000, 0.02, run);
  out.push_back(std::move(cal.scan));
  out.push_back(std::move(cal.monte_carlo));
  out.push_back(tail_bound_summability(params, 10000, 1e-12));
  const std::vector<double> alphas{0.5, 1.0, 2.0};
  out.push_back(strip_bound_check(alphas, 1.0, 20, 20));
  out.push_back(long_jump_ratio_check(0.5, 5, 20, 0.9));
  return out;
}

}  // namespace ubranch
