#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "owcsim/adapt.hpp"
#include "owcsim/geometry.hpp"
#include "owcsim/protocol.hpp"

namespace owcsim {

inline constexpr int kConfigSchemaVersion = 1;

/// Holds p_a constant for `frames` consecutive frames.
struct TrajectorySegment
{
    double pa = 0.0;
    std::uint64_t frames = 0;

    friend bool operator==(const TrajectorySegment&, const TrajectorySegment&) = default;
};

enum class OutputFormat { csv, json };

struct OutputSettings
{
    std::string path;  // empty = stdout
    OutputFormat format = OutputFormat::csv;

    friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

/**
 * Everything a run needs, as loaded from a YAML document:
 *
 *   schema: 1
 *   scenario:
 *     room: {width: 50, depth: 50, height: 3}
 *     devices: {per_side: 26, pitch: 2}
 *     access_points: {per_side: 3}          # optional pitch
 *     lambertian: {...}                      # optional, defaults below
 *     fov_deg: 45
 *   protocol:
 *     slots: 1
 *     degree_distribution: {1: 1.0}
 *     pa: [0.1, 0.2]                         # or {start, stop, step}
 *     trajectory: [{pa: 0.05, frames: 100}]  # optional, for adapt
 *   sweep:
 *     fov_deg: {start: 1, stop: 89, step: 1} # optional, defaults to [fov_deg]
 *     frames: 100000
 *     seed: 1
 *   adapt: {estimator: oracle, noise_sigma: 0, preamble_fov: current, wide_fov_deg: 89}
 *   output: {path: out.csv, format: csv}
 *
 * Unknown keys are rejected. Degree weights are normalized on load.
 */
struct RunConfig
{
    int schema = kConfigSchemaVersion;
    Scenario scenario;
    int slots = 1;
    std::map<int, double> degree_weights{{1, 1.0}};
    std::vector<double> pa;
    std::vector<TrajectorySegment> trajectory;
    std::vector<double> fov_grid;
    std::uint64_t frames = 100000;
    std::uint64_t seed = 1;
    AdaptOptions adapt;
    OutputSettings output;

    DegreeDistribution omega() const { return DegreeDistribution::normalized(degree_weights); }

    /// Expands the trajectory into one p_a per frame.
    std::vector<double> pa_per_frame() const;

    /// Throws ConfigError listing every violated constraint.
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates. Throws ConfigError with every issue found. Soft
/// problems (e.g. degree weights not summing to 1) go to `warnings`.
RunConfig parse_config(std::string_view text, std::vector<std::string>* warnings = nullptr);

RunConfig load_config(const std::filesystem::path& path,
                      std::vector<std::string>* warnings = nullptr);

/// Serializes to the same YAML layout; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

/// Raw weights of the 16-degree irregular distribution. They sum to 1.254
/// and are normalized on use.
std::map<int, double> irsa16_degree_weights();

enum class Preset { fig4, fig5, fig6 };

std::optional<Preset> parse_preset(std::string_view name);

struct PresetVariant
{
    std::string label;
    RunConfig config;
};

/**
 * Preset variants layered over a base config (grids, frames,
 * seed and room are kept):
 *   fig4: L = 1, Omega = x,        APs 1x1 / 3x3 / 5x5
 *   fig5: L = 100, 16-degree Omega, APs 1x1 / 3x3 / 5x5
 *   fig6: APs 3x3, Omega = x^2,     L = 5 / 10 / 100
 */
std::vector<PresetVariant> apply_preset(const RunConfig& base, Preset preset);

}  // namespace owcsim
