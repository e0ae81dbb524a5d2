#include "ubranch/cli.hpp"

#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ubranch/errors.hpp"
#include "ubranch/experiments.hpp"
#include "ubranch/lines.hpp"
#include "ubranch/report.hpp"
#include "ubranch/spatial.hpp"

namespace ubranch::cli {

namespace {

using nlohmann::json;
using report::format_number;

void print_summary(std::ostream& out, const ExperimentSummary& s) {
  out << '[' << to_string(s.verdict) << "] " << s.name << " estimate=" << format_number(s.estimate) << " ci=["
      << format_number(s.ci_low) << ", " << format_number(s.ci_high) << ']';
  if (s.oracle) out << " oracle=" << format_number(*s.oracle);
  out << " n=" << s.replicates << '\n';
}

void print_band(std::ostream& out, const ScalingBand& b) {
  out << '[' << to_string(b.verdict) << "] scaling_" << b.statistic << " band=[" << format_number(b.band_low) << ", "
      << format_number(b.band_high) << "] median=" << format_number(b.median) << " slope=" << format_number(b.slope)
      << " control_slope=" << format_number(b.control_slope) << " replicates=" << b.ratios.size()
      << " capped=" << b.capped << '\n';
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass: return kPass;
    case Verdict::Fail: return kFail;
    case Verdict::Indeterminate: return kIndeterminate;
  }
  return kIndeterminate;
}

struct Outputs {
  std::string csv;
  json results;
  Verdict verdict = Verdict::Pass;
};

LinesModel lines_model(const RunConfig& c) {
  LinesModel m = LinesModel::from_params(c.lines);
  m.jumps_enabled = c.jumps;
  return m;
}

SpatialConfig spatial_config(const RunConfig& c, std::uint64_t replicate) {
  SpatialConfig s;
  s.measure = c.measure();
  s.gamma = c.spatial_gamma;
  s.horizon = c.resolved_horizon();
  s.cap = c.resolved_cap();
  s.seed = c.seed;
  s.replicate = replicate;
  s.sample_grid = c.sample_grid;
  s.initial_position = c.initial_position;
  s.movement_enabled = c.movement;
  return s;
}

Outputs simulate(const RunConfig& c, std::ostream& out) {
  Outputs o;
  const auto n = c.resolved_replicates();
  std::vector<std::uint64_t> ids(static_cast<std::size_t>(n));
  for (std::int64_t r = 0; r < n; ++r) ids[r] = static_cast<std::uint64_t>(r);
  o.results = json::array();
  std::int64_t capped = 0;
  if (c.model == ModelKind::Spatial) {
    std::vector<SpatialTrajectory> trajs(static_cast<std::size_t>(n));
    parallel_for(n, c.threads, [&](std::int64_t r) { trajs[r] = simulate_spatial(spatial_config(c, ids[r])); });
    o.csv = report::spatial_csv(trajs, ids, c.seed);
    for (std::size_t r = 0; r < trajs.size(); ++r) {
      o.results.push_back(report::to_json(trajs[r], ids[r]));
      capped += trajs[r].cap_hit.has_value();
    }
  } else {
    std::vector<LinesTrajectory> trajs(static_cast<std::size_t>(n));
    const double h = c.resolved_horizon();
    const auto cap = c.resolved_cap();
    parallel_for(n, c.threads, [&](std::int64_t r) {
      if (c.model == ModelKind::Dominator) {
        trajs[r] = simulate_dominating_lines(c.D, c.alpha, c.spatial_gamma, h, cap, c.seed, c.sample_grid, ids[r],
                                             c.jumps);
      } else if (c.engine == "exits") {
        trajs[r] = simulate_lines_by_exits(lines_model(c), h, cap, c.sample_grid, c.start_line,
                                           make_stream(c.seed, ids[r]));
      } else {
        LinesSimConfig s;
        s.params = c.lines;
        s.horizon = h;
        s.cap = cap;
        s.seed = c.seed;
        s.sample_grid = c.sample_grid;
        s.start_line = c.start_line;
        s.jumps_enabled = c.jumps;
        s.replicate = ids[r];
        trajs[r] = simulate_lines(s);
      }
    });
    o.csv = report::lines_csv(trajs, ids, c.seed);
    for (std::size_t r = 0; r < trajs.size(); ++r) {
      o.results.push_back(report::to_json(trajs[r], ids[r]));
      capped += trajs[r].cap_hit.has_value();
    }
  }
  out << "[pass] simulate_" << to_string(c.model) << " replicates=" << n << " capped=" << capped << '\n';
  return o;
}

Outputs summaries_output(std::vector<ExperimentSummary> summaries, std::ostream& out) {
  Outputs o;
  o.results = json::array();
  for (const auto& s : summaries) {
    print_summary(out, s);
    o.results.push_back(report::to_json(s));
  }
  o.verdict = combine(std::span<const ExperimentSummary>(summaries));
  return o;
}

Outputs events(const RunConfig& c, std::ostream& out) {
  EventProbConfig e;
  e.params = c.lines;
  e.levels = c.resolved_levels();
  e.replicates = c.resolved_replicates();
  e.reach_factor = c.reach_factor;
  e.reach_budget = c.reach_budget;
  e.cap = c.resolved_cap();
  e.max_attempts = c.max_attempts;
  const auto summaries = estimate_event_probs(e, {c.seed, c.threads});
  std::vector<std::string> notes;
  const Verdict v = event_verdict(summaries, &notes);
  Outputs o = summaries_output(summaries, out);
  o.verdict = v;
  for (const auto& n : notes) out << "  " << n << '\n';
  o.results = {{"summaries", o.results}, {"verdict", to_string(v)}, {"notes", notes}};
  return o;
}

Outputs scaling(const RunConfig& c, std::ostream& out) {
  ScalingBand band;
  const RunOptions run{c.seed, c.threads};
  if (c.model == ModelKind::Lines) {
    LinesBandConfig b;
    b.params = c.lines;
    b.horizon = c.resolved_horizon();
    b.cap = c.resolved_cap();
    b.replicates = c.resolved_replicates();
    b.sample_grid = c.sample_grid;
    b.max_attempts = c.max_attempts;
    b.slope_tolerance = c.slope_tolerance;
    b.spread_limit = c.spread_limit;
    b.engine = c.engine == "gillespie" ? LinesEngineKind::Gillespie : LinesEngineKind::Exits;
    band = scaling_band_lines(b, run);
  } else if (c.model == ModelKind::Spatial) {
    SpatialBandConfig b;
    b.measure = c.measure();
    b.gamma = c.spatial_gamma;
    b.horizon = c.resolved_horizon();
    b.cap = c.resolved_cap();
    b.replicates = c.resolved_replicates();
    b.sample_grid = c.sample_grid;
    b.max_attempts = c.max_attempts;
    b.slope_tolerance = c.slope_tolerance;
    b.spread_limit = c.spread_limit;
    b.min_final_population = c.min_final_population;
    band = scaling_band_spatial(b, run);
  } else {
    throw ConfigError("run.model", "scaling supports the lines and spatial models");
  }
  print_band(out, band);
  for (const auto& n : band.notes) out << "  " << n << '\n';
  Outputs o;
  o.csv = report::band_csv(band, c.seed);
  o.results = report::to_json(band);
  o.verdict = band.verdict;
  return o;
}

Outputs upper_tail(const RunConfig& c, std::ostream& out) {
  const auto levels = c.resolved_levels();
  auto summaries = upper_tail_check(c.lines, levels, c.resolved_replicates(), {c.seed, c.threads});
  summaries.insert(summaries.begin(), tail_bound_summability(c.lines, c.j_max, c.epsilon));
  return summaries_output(std::move(summaries), out);
}

Outputs tail_calibration(const RunConfig& c, std::ostream& out) {
  auto cal = yule_tail_calibration(c.lambda, c.c_list, c.t_check, c.c_check, c.resolved_replicates(), c.tolerance,
                                   {c.seed, c.threads});
  for (const auto& n : cal.scan.notes) out << "  " << n << '\n';
  return summaries_output({cal.scan, cal.monte_carlo}, out);
}

Outputs dominate(const RunConfig& c, std::ostream& out) {
  DominationConfig d;
  d.measure = c.measure();
  d.gamma = c.spatial_gamma;
  d.D = c.D;
  d.horizon = c.resolved_horizon();
  d.cap = c.resolved_cap();
  d.replicates = c.resolved_replicates();
  d.resamples = c.resamples;
  d.levels = c.quantile_levels;
  const auto res = dominate_experiment(d, {c.seed, c.threads});
  print_summary(out, res.summary);
  for (const auto& l : res.levels) {
    out << "  level " << format_number(l.level) << ": lines " << format_number(l.lower_quantile) << ", ln M "
        << format_number(l.upper_quantile) << (l.violated ? " VIOLATED" : "") << '\n';
  }
  Outputs o;
  o.results = report::to_json(res);
  o.verdict = res.summary.verdict;
  return o;
}

Outputs validate_all(const RunConfig& c, std::ostream& out) {
  return summaries_output(validate_suite({c.seed, c.threads}), out);
}

struct AnalyticArgs {
  std::string op;
  double lambda = 1.0;
  double mu = 0.0;
  double t = 1.0;
  double s = 0.5;
  double c = 1.0;
  double marked_rate = 0.0;
  std::int64_t n = 1;
  std::int64_t i = 1;
  std::int64_t j = 2;
  std::int64_t J = 1;
  std::int64_t j_max = 2000;
};

const std::vector<std::string>& analytic_ops() {
  static const std::vector<std::string> ops = {
      "gw_mean",      "yule_gf",          "yule_pmf",        "yule_tail",      "bd_gf",
      "extinction_prob", "reduced_gf",    "yule_tail_lower_bound", "jump_target_pmf", "long_jump_prob",
      "schedule_lower", "schedule_lower_onset", "schedule_upper", "scaling_constants", "max_line_tail_bound",
      "yule_relative_tail", "bd_marginal", "marked_death_prob"};
  return ops;
}

json evaluate_analytic(const AnalyticArgs& a, const LinesParams& p) {
  using namespace analytic;
  const GWRates rates{a.lambda, a.mu};
  const auto& op = a.op;
  if (op == "gw_mean") return gw_mean(rates, a.t);
  if (op == "yule_gf") return yule_gf(a.s, a.t, a.lambda);
  if (op == "yule_pmf") return yule_pmf(a.n, a.t, a.lambda);
  if (op == "yule_tail") return yule_tail(a.n, a.t, a.lambda);
  if (op == "bd_gf") return bd_gf(a.s, a.t, rates);
  if (op == "extinction_prob") return extinction_prob(rates);
  if (op == "reduced_gf") return reduced_gf(a.s, a.t, rates);
  if (op == "yule_tail_lower_bound") return yule_tail_lower_bound(a.c);
  if (op == "jump_target_pmf") return jump_target_pmf(a.i, a.j, p.C);
  if (op == "long_jump_prob") return long_jump_prob(a.J, p.C);
  if (op == "schedule_lower") {
    const auto s = schedule_lower(a.J, p);
    return {{"t", s.t}, {"q", s.q}, {"log_q", s.log_q}, {"degenerate", s.degenerate}};
  }
  if (op == "schedule_lower_onset") return schedule_lower_onset(p, a.j_max);
  if (op == "schedule_upper") return schedule_upper(a.J, p);
  if (op == "scaling_constants") {
    const auto s = scaling_constants(p);
    return {{"lower", s.lower}, {"upper", s.upper}};
  }
  if (op == "max_line_tail_bound") return max_line_tail_bound(a.J, p);
  if (op == "yule_relative_tail") return yule_relative_tail(a.c, a.t, a.lambda);
  if (op == "bd_marginal") {
    const auto m = bd_marginal(rates, a.t);
    return {{"p_zero", m.p_zero}, {"success", m.success}};
  }
  if (op == "marked_death_prob") return marked_death_prob(rates, a.marked_rate, a.t);
  throw ConfigError("--op", "unknown analytic op '" + op + "'");
}

void write_outputs(const RunConfig& c, const Outputs& o) {
  if (!c.csv.empty()) {
    if (o.csv.empty()) throw ConfigError("run.csv", "experiment '" + c.experiment + "' writes no CSV");
    report::write_atomic(c.csv, o.csv);
  }
  if (!c.json.empty()) {
    report::write_atomic(c.json, report::envelope(c.experiment, to_json(c), o.results, o.verdict).dump(2) + "\n");
  }
}

}  // namespace

int run(const RunConfig& config, std::ostream& out) {
  using Handler = std::function<Outputs(const RunConfig&, std::ostream&)>;
  static const std::map<std::string, Handler> handlers = {
      {"simulate", simulate}, {"validate", validate_all}, {"events", events},   {"scaling", scaling},
      {"upper-tail", upper_tail}, {"nier", tail_calibration},         {"dominate", dominate}};
  const auto it = handlers.find(config.experiment);
  if (it == handlers.end()) throw ConfigError("", "unknown experiment '" + config.experiment + "'");
  const Outputs o = it->second(config, out);
  write_outputs(config, o);
  out << "verdict: " << to_string(o.verdict) << '\n';
  return exit_code(o.verdict);
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and oracle checks for branching systems with position-dependent branching rates"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "config file ([section] headers, key = value lines)");

  std::vector<std::pair<ConfigKey, std::string>> flag_values;
  flag_values.reserve(config_keys().size());
  for (const auto& k : config_keys()) flag_values.emplace_back(k, std::string());
  for (auto& [k, value] : flag_values) {
    std::string doc = "[" + k.section + "] " + k.key + ": " + k.doc;
    if (!k.default_value.empty()) doc += " (default " + k.default_value + ")";
    app.add_option(flag_name(k), value, doc);
  }

  const std::map<std::string, std::string> commands = {
      {"simulate", "simulate trajectories and write the CSV of the chosen model"},
      {"validate", "run every closed-form oracle check"},
      {"events", "estimate the event probabilities around the first visit of line J"},
      {"scaling", "measure the normalized extremal band of the lines or spatial model"},
      {"upper-tail", "Monte Carlo tail of the max line against its analytic bound, plus summability"},
      {"nier", "calibrate the Yule relative tail against (1/10)^c"},
      {"dominate", "quantile domination of ln M(t) over the strip minorant lines model"},
      {"analytic", "evaluate one closed-form quantity"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, doc] : commands) {
    subs[name] = app.add_subcommand(name, doc);
    subs[name]->fallthrough();
  }
  AnalyticArgs aa;
  auto* an = subs["analytic"];
  an->add_option("--op", aa.op, "quantity to evaluate")->required()->check(CLI::IsMember(analytic_ops()));
  an->add_option("--lambda", aa.lambda, "birth rate (default 1)");
  an->add_option("--mu", aa.mu, "death rate (default 0)");
  an->add_option("--t", aa.t, "time (default 1)");
  an->add_option("--s", aa.s, "generating function argument (default 0.5)");
  an->add_option("--c", aa.c, "multiple of the mean (default 1)");
  an->add_option("--n", aa.n, "count (default 1)");
  an->add_option("--i", aa.i, "jump origin line (default 1)");
  an->add_option("--j", aa.j, "jump target line (default 2)");
  an->add_option("--J", aa.J, "line index (default 1)");
  an->add_option("--marked-rate", aa.marked_rate, "rate of marked deaths (default 0)");
  an->add_option("--j-max", aa.j_max, "last J scanned by schedule_lower_onset (default 2000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kPass : kConfigError;
  }

  RunConfig config;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) config.experiment = name;
  }
  try {
    if (!config_path.empty()) apply_config_file(config, config_path);
    for (const auto& [k, value] : flag_values) {
      if (app.count(flag_name(k)) > 0) apply_setting(config, k.section, k.key, value, flag_name(k));
    }
    validate(config);
    if (config.experiment == "analytic") {
      const json result = evaluate_analytic(aa, config.lines);
      out << aa.op << " = " << result.dump() << '\n';
      if (!config.json.empty()) {
        json args = {{"op", aa.op}, {"lambda", aa.lambda}, {"mu", aa.mu}, {"t", aa.t}, {"s", aa.s}, {"c", aa.c},
                     {"n", aa.n}, {"i", aa.i}, {"j", aa.j}, {"J", aa.J}, {"marked_rate", aa.marked_rate},
                     {"j_max", aa.j_max}};
        json cfg = to_json(config);
        cfg["analytic"] = args;
        report::write_atomic(config.json,
                             report::envelope("analytic", cfg, {{"value", result}}, Verdict::Pass).dump(2) + "\n");
      }
      return kPass;
    }
    return run(config, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const InvariantError& e) {
    err << "invariant violated: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedCriticalCase& e) {
    err << "unsupported: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace ubranch::cli
