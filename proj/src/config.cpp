#include "ubranch/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "ubranch/errors.hpp"

namespace ubranch {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lines: return "lines";
    case ModelKind::Spatial: return "spatial";
    case ModelKind::Dominator: return "dominator";
  }
  return "lines";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view v, const std::string& where, std::string_view key) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(where, "'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return x;
}

std::int64_t parse_int(std::string_view v, const std::string& where, std::string_view key) {
  // Accept 1e6-style literals as long as they are whole numbers.
  std::int64_t n = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, n);
  if (res.ec == std::errc() && res.ptr == end) return n;
  const double x = parse_double(v, where, key);
  if (x != static_cast<double>(static_cast<std::int64_t>(x)) || std::abs(x) > 9.2e18) {
    throw ConfigError(where, "'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  }
  return static_cast<std::int64_t>(x);
}

std::uint64_t parse_uint(std::string_view v, const std::string& where, std::string_view key) {
  std::uint64_t n = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, n);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(where, "'" + std::string(key) + "' expects an unsigned integer, got '" + std::string(v) + "'");
  }
  return n;
}

bool parse_bool(std::string_view v, const std::string& where, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(where, "'" + std::string(key) + "' expects true or false, got '" + std::string(v) + "'");
}

template <class T, class Parse>
std::vector<T> parse_list(std::string_view v, Parse parse) {
  std::vector<T> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.push_back(parse(item));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string one_of(std::string_view v, std::initializer_list<std::string_view> allowed, const std::string& where,
                   std::string_view key) {
  for (auto a : allowed) {
    if (v == a) return std::string(v);
  }
  std::string list;
  for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ConfigError(where, "'" + std::string(key) + "' must be one of " + list + ", got '" + std::string(v) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view, const std::string&)>;

struct KeyEntry {
  ConfigKey key;
  Setter set;
};

#define UB_NUM(field) [](RunConfig& c, std::string_view v, const std::string& w) { c.field = parse_double(v, w, #field); }
#define UB_INT(field) [](RunConfig& c, std::string_view v, const std::string& w) { c.field = parse_int(v, w, #field); }
#define UB_BOOL(field) [](RunConfig& c, std::string_view v, const std::string& w) { c.field = parse_bool(v, w, #field); }

const std::vector<KeyEntry>& entries() {
  static const std::vector<KeyEntry> table = {
      {{"run", "model", "lines", "lines, spatial or dominator (the strip minorant lines model)"},
       [](RunConfig& c, std::string_view v, const std::string& w) {
         const auto m = one_of(v, {"lines", "spatial", "dominator"}, w, "model");
         c.model = m == "lines" ? ModelKind::Lines : m == "spatial" ? ModelKind::Spatial : ModelKind::Dominator;
       }},
      {{"run", "seed", "1", "master seed; replicate r draws from mt19937_64(seed ^ splitmix64(r))"},
       [](RunConfig& c, std::string_view v, const std::string& w) { c.seed = parse_uint(v, w, "seed"); }},
      {{"run", "threads", "0", "worker threads, 0 = available cores"}, UB_INT(threads)},
      {{"run", "replicates", "per experiment", "simulate 1, events 200, scaling 50, upper-tail 2000, nier 10000, dominate 1000"},
       UB_INT(replicates)},
      {{"run", "horizon", "per experiment", "simulate 10, scaling 8, dominate 6"}, UB_NUM(horizon)},
      {{"run", "cap", "per experiment", "population cap; 1e6, or 1e15 for the exit-driven lines engine"}, UB_INT(cap)},
      {{"run", "sample_grid", "101", "grid points on [0, horizon]"}, UB_INT(sample_grid)},
      {{"run", "start_line", "1", "line of the initial particle"}, UB_INT(start_line)},
      {{"run", "engine", "auto", "lines engine: gillespie, exits or auto (exits for scaling, gillespie otherwise)"},
       [](RunConfig& c, std::string_view v, const std::string& w) {
         c.engine = one_of(v, {"auto", "gillespie", "exits"}, w, "engine");
       }},
      {{"run", "csv", "", "CSV output path (empty: none)"},
       [](RunConfig& c, std::string_view v, const std::string&) { c.csv = std::string(v); }},
      {{"run", "json", "", "JSON report path (empty: none)"},
       [](RunConfig& c, std::string_view v, const std::string&) { c.json = std::string(v); }},

      {{"lines", "gamma", "0.5", "branch rate J^gamma on line J"}, UB_NUM(lines.gamma)},
      {{"lines", "C", "0.5", "jump to line J' at rate C^J'"}, UB_NUM(lines.C)},
      {{"lines", "C1", "3", "lower schedule t_J = C1 J^(1-gamma) - 1; needs C1/2 + 2 ln C > 0"}, UB_NUM(lines.C1)},
      {{"lines", "C2", "0.5", "upper schedule t_J = C2 J^(1-gamma); needs C e^C2 < 1"}, UB_NUM(lines.C2)},
      {{"lines", "jumps", "true", "false switches jumps off (pure branching on the start line)"}, UB_BOOL(jumps)},

      {{"measure", "alpha", "1", "tail index of the jump measure"}, UB_NUM(alpha)},
      {{"measure", "x_min", "1", "smallest jump size"}, UB_NUM(x_min)},
      {{"measure", "eta", "1", "total jump rate"}, UB_NUM(eta)},
      {{"measure", "L", "const", "slowly varying factor: const or log"},
       [](RunConfig& c, std::string_view v, const std::string& w) { c.slow = one_of(v, {"const", "log"}, w, "L"); }},
      {{"measure", "L_scale", "1", "scale of the slowly varying factor"}, UB_NUM(slow_scale)},

      {{"spatial", "gamma", "0.5", "branch rate (ln(1 + x))^gamma at position x"}, UB_NUM(spatial_gamma)},
      {{"spatial", "D", "1", "strip constant of the minorant lines model"}, UB_NUM(D)},
      {{"spatial", "initial_position", "0", "position of the initial particle"}, UB_NUM(initial_position)},
      {{"spatial", "movement", "true", "false freezes every particle at its birth position"}, UB_BOOL(movement)},

      {{"experiment", "levels", "per experiment", "comma list of lines J; events 2,4,8, upper-tail 5,10,15"},
       [](RunConfig& c, std::string_view v, const std::string& w) {
         c.levels = parse_list<std::int64_t>(v, [&](std::string_view s) { return parse_int(s, w, "levels"); });
       }},
      {{"experiment", "reach_factor", "4", "events: wait for line J until reach_factor t_J + reach_budget"},
       UB_NUM(reach_factor)},
      {{"experiment", "reach_budget", "10", "events: see reach_factor"}, UB_NUM(reach_budget)},
      {{"experiment", "max_attempts", "10000", "events and scaling: replicate attempts before giving up"},
       UB_INT(max_attempts)},
      {{"experiment", "slope_tolerance", "0.15", "scaling: largest accepted |slope| of ln ratio against ln t"},
       UB_NUM(slope_tolerance)},
      {{"experiment", "spread_limit", "100", "scaling: largest accepted band_high / band_low"}, UB_NUM(spread_limit)},
      {{"experiment", "min_final_population", "10", "scaling, spatial: power guard on the final population"},
       UB_INT(min_final_population)},
      {{"experiment", "resamples", "2000", "dominate: bootstrap resamples"}, UB_INT(resamples)},
      {{"experiment", "quantile_levels", "0.1,...,0.9", "dominate: compared quantile levels"},
       [](RunConfig& c, std::string_view v, const std::string& w) {
         c.quantile_levels = parse_list<double>(v, [&](std::string_view s) { return parse_double(s, w, "quantile_levels"); });
       }},
      {{"experiment", "lambda", "1", "nier: Yule rate"}, UB_NUM(lambda)},
      {{"experiment", "c_list", "0.5,1,2", "nier: multiples c of the mean in the scan"},
       [](RunConfig& c, std::string_view v, const std::string& w) {
         c.c_list = parse_list<double>(v, [&](std::string_view s) { return parse_double(s, w, "c_list"); });
       }},
      {{"experiment", "t_check", "3", "nier: time of the Monte Carlo check"}, UB_NUM(t_check)},
      {{"experiment", "c_check", "1", "nier: c of the Monte Carlo check"}, UB_NUM(c_check)},
      {{"experiment", "tolerance", "0.02", "nier: accepted |estimate - exact tail|"}, UB_NUM(tolerance)},
      {{"experiment", "j_max", "10000", "upper-tail: last J of the summability check"}, UB_INT(j_max)},
      {{"experiment", "epsilon", "1e-12", "upper-tail: Cauchy tolerance of the summability check"}, UB_NUM(epsilon)},
  };
  return table;
}

#undef UB_NUM
#undef UB_INT
#undef UB_BOOL

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
      cur += ch;
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Adds the origins of the keys of `section` that the invariant text mentions.
[[noreturn]] void rethrow_located(const RunConfig& c, std::string_view section, const InvariantError& e,
                                  std::initializer_list<std::pair<std::string_view, std::string_view>> aliases = {}) {
  const auto words = tokens(e.invariant());
  std::string where;
  for (const auto& entry : entries()) {
    if (entry.key.section != section) continue;
    bool mentioned = std::find(words.begin(), words.end(), entry.key.key) != words.end();
    for (const auto& [alias, key] : aliases) {
      mentioned = mentioned || (key == entry.key.key && std::find(words.begin(), words.end(), alias) != words.end());
    }
    if (!mentioned) continue;
    const auto it = c.origin.find(entry.key.section + "." + entry.key.key);
    const std::string loc = it != c.origin.end() ? it->second : "default " + entry.key.section + "." + entry.key.key;
    where += (where.empty() ? "" : ", ") + loc;
  }
  throw ConfigError(where, "invariant '" + e.invariant() + "' violated: " + e.what());
}

}  // namespace

JumpMeasure RunConfig::measure() const {
  const SlowVariation sv = slow == "log" ? SlowVariation::log(slow_scale) : SlowVariation::constant(slow_scale);
  return JumpMeasure(alpha, x_min, eta, sv);
}

std::int64_t RunConfig::resolved_replicates() const {
  if (replicates) return *replicates;
  if (experiment == "events") return 200;
  if (experiment == "scaling") return 50;
  if (experiment == "upper-tail") return 2000;
  if (experiment == "nier") return 10'000;
  if (experiment == "dominate") return 1000;
  return 1;
}

double RunConfig::resolved_horizon() const {
  if (horizon) return *horizon;
  if (experiment == "scaling") return 8.0;
  if (experiment == "dominate") return 6.0;
  return 10.0;
}

std::int64_t RunConfig::resolved_cap() const {
  if (cap) return *cap;
  if (experiment == "scaling" && model == ModelKind::Lines && engine != "gillespie") return 1'000'000'000'000'000;
  return 1'000'000;
}

std::vector<std::int64_t> RunConfig::resolved_levels() const {
  if (!levels.empty()) return levels;
  if (experiment == "upper-tail") return {5, 10, 15};
  return {2, 4, 8};
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

std::string flag_name(const ConfigKey& key) {
  return key.section == "run" ? "--" + key.key : "--" + key.section + "-" + key.key;
}

void apply_setting(RunConfig& config, std::string_view section, std::string_view key, std::string_view value,
                   const std::string& where) {
  for (const auto& e : entries()) {
    if (e.key.section == section && e.key.key == key) {
      e.set(config, trim(value), where);
      config.origin[e.key.section + "." + e.key.key] = where;
      return;
    }
  }
  bool known_section = false;
  for (const auto& e : entries()) known_section = known_section || e.key.section == section;
  if (!known_section) throw ConfigError(where, "unknown section [" + std::string(section) + "]");
  throw ConfigError(where, "unknown key '" + std::string(key) + "' in [" + std::string(section) + "]");
}

void apply_config_text(RunConfig& config, std::string_view text, const std::string& source) {
  std::string section;
  std::int64_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    std::string_view line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const auto& e : entries()) known = known || e.key.section == section;
      if (!known) throw ConfigError(where, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where, "expected 'key = value'");
    if (section.empty()) throw ConfigError(where, "key outside of a section");
    apply_setting(config, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str(), path.string());
}

void validate(const RunConfig& c) {
  const auto at = [&](const std::string& key) {
    const auto it = c.origin.find(key);
    return it != c.origin.end() ? it->second : "default " + key;
  };
  const auto require = [&](bool ok, const std::string& key, const std::string& invariant) {
    if (!ok) throw ConfigError(at(key), "invariant '" + invariant + "' violated");
  };
  if (c.replicates) require(*c.replicates >= 1, "run.replicates", "replicates >= 1");
  if (c.horizon) require(*c.horizon >= 0.0 && std::isfinite(*c.horizon), "run.horizon", "horizon >= 0");
  if (c.cap) require(*c.cap >= 1, "run.cap", "cap >= 1");
  require(c.threads >= 0, "run.threads", "threads >= 0");
  require(c.sample_grid >= 2, "run.sample_grid", "sample_grid >= 2");
  require(c.start_line >= 1, "run.start_line", "start_line >= 1");
  require(c.max_attempts >= 1, "experiment.max_attempts", "max_attempts >= 1");
  require(c.resamples >= 1, "experiment.resamples", "resamples >= 1");
  for (auto J : c.levels) require(J >= 1, "experiment.levels", "levels >= 1");
  for (double q : c.quantile_levels) require(q > 0.0 && q < 1.0, "experiment.quantile_levels", "0 < level < 1");
  require(c.lambda > 0.0, "experiment.lambda", "lambda > 0");

  try {
    c.lines.validate();
  } catch (const InvariantError& e) {
    rethrow_located(c, "lines", e);
  }
  try {
    (void)c.measure();
  } catch (const InvariantError& e) {
    rethrow_located(c, "measure", e, {{"scale", "L_scale"}});
  }
  require(c.spatial_gamma > 0.0 && c.spatial_gamma < 1.0, "spatial.gamma", "0 < gamma < 1");
  require(c.D > 0.0, "spatial.D", "D > 0");
  require(c.initial_position >= 0.0, "spatial.initial_position", "initial_position >= 0");
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["experiment"] = c.experiment;
  j["run"] = {{"model", to_string(c.model)},
              {"seed", c.seed},
              {"threads", c.threads},
              {"replicates", c.resolved_replicates()},
              {"horizon", c.resolved_horizon()},
              {"cap", c.resolved_cap()},
              {"sample_grid", c.sample_grid},
              {"start_line", c.start_line},
              {"engine", c.engine}};
  j["lines"] = {{"gamma", c.lines.gamma}, {"C", c.lines.C}, {"C1", c.lines.C1}, {"C2", c.lines.C2}, {"jumps", c.jumps}};
  j["measure"] = {{"alpha", c.alpha}, {"x_min", c.x_min}, {"eta", c.eta}, {"L", c.slow}, {"L_scale", c.slow_scale}};
  j["spatial"] = {{"gamma", c.spatial_gamma}, {"D", c.D}, {"initial_position", c.initial_position},
                  {"movement", c.movement}};
  j["experiment_settings"] = {{"levels", c.resolved_levels()},
                              {"reach_factor", c.reach_factor},
                              {"reach_budget", c.reach_budget},
                              {"max_attempts", c.max_attempts},
                              {"slope_tolerance", c.slope_tolerance},
                              {"spread_limit", c.spread_limit},
                              {"min_final_population", c.min_final_population},
                              {"resamples", c.resamples},
                              {"quantile_levels", c.quantile_levels},
                              {"lambda", c.lambda},
                              {"c_list", c.c_list},
                              {"t_check", c.t_check},
                              {"c_check", c.c_check},
                              {"tolerance", c.tolerance},
                              {"j_max", c.j_max},
                              {"epsilon", c.epsilon}};
  return j;
}

}  // namespace ubranch
