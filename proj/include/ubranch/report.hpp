#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ubranch/experiments.hpp"
#include "ubranch/lines.hpp"
#include "ubranch/spatial.hpp"

namespace ubranch::report {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form; identical across runs and thread counts.
std::string format_number(double x);

/// Columns t,population,max_line,replicate,seed; one row per grid time per trajectory.
std::string lines_csv(std::span<const LinesTrajectory> trajectories, std::span<const std::uint64_t> replicates,
                      std::uint64_t seed);

/// Columns t,population,max_position,replicate,seed.
std::string spatial_csv(std::span<const SpatialTrajectory> trajectories,
                        std::span<const std::uint64_t> replicates, std::uint64_t seed);

/// Raw band ratios: t,ratio,control_ratio,replicate,seed.
std::string band_csv(const ScalingBand& band, std::uint64_t seed);

nlohmann::json to_json(const ExperimentSummary& summary);
nlohmann::json to_json(const ScalingBand& band);  ///< statistics only, ratios go to CSV
nlohmann::json to_json(const DominationResult& result);
nlohmann::json to_json(const LinesTrajectory& trajectory, std::uint64_t replicate);
nlohmann::json to_json(const SpatialTrajectory& trajectory, std::uint64_t replicate);

/// Top-level report: {schema_version, command, config, verdict, results}.
nlohmann::json envelope(std::string_view command, nlohmann::json config, nlohmann::json results,
                        Verdict verdict);

/// Writes to a sibling temporary file and renames it over `path`. Throws IoError.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace ubranch::report
