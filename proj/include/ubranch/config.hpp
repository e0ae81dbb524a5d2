#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ubranch/analytic.hpp"
#include "ubranch/heavy_tail.hpp"

namespace ubranch {

enum class ModelKind { Lines, Spatial, Dominator };

std::string to_string(ModelKind kind);

/// Bad config input: unknown key, unparsable value, missing file or a violated invariant.
/// `where` is "file:line", "--flag" or empty.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& message)
      : std::runtime_error(where.empty() ? message : where + ": " + message), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Every setting of a run. Optional fields fall back to per-experiment defaults (see
/// `resolved_*`).
struct RunConfig {
  std::string experiment = "simulate";

  // [run]
  ModelKind model = ModelKind::Lines;
  std::uint64_t seed = 1;
  std::int64_t threads = 0;
  std::optional<std::int64_t> replicates;
  std::optional<double> horizon;
  std::optional<std::int64_t> cap;
  std::int64_t sample_grid = 101;
  std::int64_t start_line = 1;
  std::string engine = "auto";  ///< auto, gillespie or exits
  std::string csv;
  std::string json;

  // [lines]
  LinesParams lines;
  bool jumps = true;

  // [measure]
  double alpha = 1.0;
  double x_min = 1.0;
  double eta = 1.0;
  std::string slow = "const";
  double slow_scale = 1.0;

  // [spatial]
  double spatial_gamma = 0.5;
  double D = 1.0;
  double initial_position = 0.0;
  bool movement = true;

  // [experiment]
  std::vector<std::int64_t> levels;
  double reach_factor = 4.0;
  double reach_budget = 10.0;
  std::int64_t max_attempts = 10'000;
  double slope_tolerance = 0.15;
  double spread_limit = 100.0;
  std::int64_t min_final_population = 10;
  std::int64_t resamples = 2000;
  std::vector<double> quantile_levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double lambda = 1.0;
  std::vector<double> c_list{0.5, 1.0, 2.0};
  double t_check = 3.0;
  double c_check = 1.0;
  double tolerance = 0.02;
  std::int64_t j_max = 10'000;
  double epsilon = 1e-12;

  /// Where each key was last set ("file:line" or "--flag"), keyed by "section.key".
  std::map<std::string, std::string> origin;

  JumpMeasure measure() const;
  std::int64_t resolved_replicates() const;
  double resolved_horizon() const;
  std::int64_t resolved_cap() const;
  std::vector<std::int64_t> resolved_levels() const;
};

struct ConfigKey {
  std::string section;
  std::string key;
  std::string default_value;
  std::string doc;
};

/// Every accepted key, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Command-line flag name of a key: "--key" for [run], "--section-key" otherwise.
std::string flag_name(const ConfigKey& key);

/// Sets one key from its text value. Throws ConfigError naming `where` on an unknown key or an
/// unparsable value.
void apply_setting(RunConfig& config, std::string_view section, std::string_view key, std::string_view value,
                   const std::string& where);

/// Parses "[section]" headers and "key = value" lines; '#' and ';' start comments.
void apply_config_text(RunConfig& config, std::string_view text, const std::string& source);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Re-checks every module invariant the run depends on. The error names the invariant and the
/// origin of the keys it involves.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

}  // namespace ubranch
