#include "ubranch/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "ubranch/errors.hpp"

namespace ubranch::report {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw DomainError("report: one replicate id per trajectory is required");
}

}  // namespace

std::string lines_csv(std::span<const LinesTrajectory> trajectories, std::span<const std::uint64_t> replicates,
                      std::uint64_t seed) {
  check_sizes(trajectories.size(), replicates.size());
  std::string out = "t,population,max_line,replicate,seed\n";
  const std::string s = std::to_string(seed);
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    const auto& tr = trajectories[r];
    const std::string id = std::to_string(replicates[r]);
    for (std::size_t i = 0; i < tr.sample_times.size(); ++i) {
      out += format_number(tr.sample_times[i]) + ',' + std::to_string(tr.population_at[i]) + ',' +
             std::to_string(tr.max_line_at[i]) + ',' + id + ',' + s + '\n';
    }
  }
  return out;
}

std::string spatial_csv(std::span<const SpatialTrajectory> trajectories,
                        std::span<const std::uint64_t> replicates, std::uint64_t seed) {
  check_sizes(trajectories.size(), replicates.size());
  std::string out = "t,population,max_position,replicate,seed\n";
  const std::string s = std::to_string(seed);
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    const auto& tr = trajectories[r];
    const std::string id = std::to_string(replicates[r]);
    for (std::size_t i = 0; i < tr.sample_times.size(); ++i) {
      out += format_number(tr.sample_times[i]) + ',' + std::to_string(tr.population_at[i]) + ',' +
             format_number(tr.max_position_at[i]) + ',' + id + ',' + s + '\n';
    }
  }
  return out;
}

std::string band_csv(const ScalingBand& band, std::uint64_t seed) {
  const auto& control = band.control_ratios;
  std::string out = "t,ratio,control_ratio,replicate,seed\n";
  const std::string s = std::to_string(seed);
  for (std::size_t r = 0; r < band.ratios.size(); ++r) {
    const std::string id = std::to_string(band.replicate_ids[r]);
    for (std::size_t i = 0; i < band.times.size(); ++i) {
      const double c = r < control.size() ? control[r][i] : std::nan("");
      out += format_number(band.times[i]) + ',' + format_number(band.ratios[r][i]) + ',' + format_number(c) +
             ',' + id + ',' + s + '\n';
    }
  }
  return out;
}

json to_json(const ExperimentSummary& s) {
  json j;
  j["name"] = s.name;
  j["parameters"] = s.parameters;
  j["replicates"] = s.replicates;
  j["estimate"] = number_or_null(s.estimate);
  j["ci_low"] = number_or_null(s.ci_low);
  j["ci_high"] = number_or_null(s.ci_high);
  if (s.oracle) {
    j["oracle_value"] = number_or_null(*s.oracle);
    j["abs_error"] = number_or_null(std::abs(s.estimate - *s.oracle));
  } else {
    j["oracle_value"] = nullptr;
  }
  j["verdict"] = to_string(s.verdict);
  j["runtime_seconds"] = s.runtime_seconds;
  j["notes"] = s.notes;
  return j;
}

json to_json(const ScalingBand& b) {
  json j;
  j["statistic"] = b.statistic;
  j["gamma"] = b.gamma;
  j["exponent"] = b.exponent;
  j["window"] = {b.t_lo, b.t_hi};
  j["replicates"] = b.ratios.size();
  j["band_low"] = number_or_null(b.band_low);
  j["band_high"] = number_or_null(b.band_high);
  j["median"] = number_or_null(b.median);
  j["slope"] = number_or_null(b.slope);
  j["slope_std_error"] = number_or_null(b.slope_std_error);
  j["control_slope"] = number_or_null(b.control_slope);
  j["slope_tolerance"] = b.slope_tolerance;
  j["spread_limit"] = b.spread_limit;
  j["capped"] = b.capped;
  j["nonpositive"] = b.nonpositive;
  j["final_population_min"] = b.final_population_min;
  j["verdict"] = to_string(b.verdict);
  j["runtime_seconds"] = b.runtime_seconds;
  j["notes"] = b.notes;
  return j;
}

json to_json(const DominationResult& r) {
  json j = to_json(r.summary);
  json levels = json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"level", l.level},
                      {"lower_quantile", number_or_null(l.lower_quantile)},
                      {"upper_quantile", number_or_null(l.upper_quantile)},
                      {"gap_ci", {number_or_null(l.gap_ci.low), number_or_null(l.gap_ci.high)}},
                      {"violated", l.violated}});
  }
  j["levels"] = levels;
  return j;
}

json to_json(const LinesTrajectory& t, std::uint64_t replicate) {
  json hits = json::object();
  for (const auto& [line, time] : t.first_hit) hits[std::to_string(line)] = time;
  return {{"replicate", replicate},
          {"horizon", t.horizon},
          {"start_line", t.start_line},
          {"first_hit", hits},
          {"cap_hit", t.cap_hit ? json(*t.cap_hit) : json(nullptr)},
          {"final_population", t.population_at.back()},
          {"final_max_line", t.max_line_at.back()},
          {"events", t.events}};
}

json to_json(const SpatialTrajectory& t, std::uint64_t replicate) {
  json hits = json::object();
  for (const auto& [strip, time] : t.strip_first_hit) hits[std::to_string(strip)] = time;
  return {{"replicate", replicate},
          {"horizon", t.horizon},
          {"strip_first_hit", hits},
          {"cap_hit", t.cap_hit ? json(*t.cap_hit) : json(nullptr)},
          {"final_population", t.population_at.back()},
          {"final_max_position", t.max_position_at.back()},
          {"root_position", t.root_position},
          {"events", t.events}};
}

json envelope(std::string_view command, json config, json results, Verdict verdict) {
  return {{"schema_version", kSchemaVersion},
          {"command", std::string(command)},
          {"config", std::move(config)},
          {"verdict", to_string(verdict)},
          {"results", std::move(results)}};
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace ubranch::report
