// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ris/geometry.hpp"

namespace ris {

enum class WallId : std::uint8_t { XMin = 0, XMax, YMin, YMax, ZMin, ZMax };

inline constexpr std::array<WallId, 6> kAllWalls{WallId::XMin, WallId::XMax, WallId::YMin,
                                                 WallId::YMax, WallId::ZMin, WallId::ZMax};

std::string_view to_string(WallId id);
std::optional<WallId> parse_wall_id(std::string_view name);

enum class Neighborhood : std::uint8_t { Moore8, VonNeumann4 };

std::string_view to_string(Neighborhood nb);

struct SceneConfig {
    double room_side = 1.5;                   // m
    double frequency = 6.0e9;                 // Hz
    Vec3 tx_position{1.05, 0.35, 1.0};        // m
    std::optional<Vec3> tx_boresight;         // unset: aim at the panel center
    double tx_pattern_exponent = 2.0;
    WallId ris_wall = WallId::XMin;
    int grid_side = 120;
    double spacing_wavelengths = 0.25;        // element pitch in units of lambda
    double element_cosine_exponent = 1.0;
    std::array<double, 6> wall_reflectivity{0.7, 0.7, 0.7, 0.7, 0.7, 0.7};
    std::vector<Vec3> focus_centers{{0.65, 1.05, 0.7}};
    double focus_radius = 0.15;               // m
    int focus_samples = 12500;
    int outer_samples = 15000;
    double corridor_multiplier = 2.0;         // near-out capsule radius in units of focus_radius
    std::uint64_t sampling_seed = 1;
};

struct CouplingSpec {
    double alpha = 0.15;
    Neighborhood neighborhood = Neighborhood::Moore8;
    int max_iterations = 50;
    double tolerance = 1e-10;
    bool single_bounce = false;
    /// Length unit of the coupling kernel e^{ikr} / (r / unit), in wavelengths.
    /// The default 1/(2pi) gives the dimensionless kernel e^{ikr} / (kr).
    double length_unit = 1.0 / kTwoPi;
};

struct MatchParams {
    double delta_phi_stage1 = 0.2;
    double eps_local = 1e-2;
    double delta_phi_stage3 = 0.1;
    double eps_final = 1e-5;
    int max_iterations = 10000;
    bool minimize_outer = true;
    double outer_weight = 1.0;
    double freeze_fraction = 0.05;
    double freeze_period_fraction = 0.25;
    std::uint64_t rng_seed = 1;
    std::size_t dense_h_cap = 4096;
};

struct Nsga2Params {
    int population = 300;
    int generations = 75;
    double crossover_index = 8.0;
    double mutation_index = 8.0;
    double mutation_probability = 0.25;   // per gene
    double crossover_probability = 0.9;   // per mating pair
};

struct RunConfig {
    std::string profile = "paper";
    SceneConfig scene;
    CouplingSpec coupling;
    MatchParams match;
    Nsga2Params nsga;
};

/// Full-scale parameter set (120 x 120 panel, 12500 / 15000 samples, 300 x 75 NSGA-II).
RunConfig paper_profile();
/// Workstation-sized profile: 24 x 24 panel, 800 / 1200 samples, 60 x 20 NSGA-II.
RunConfig desk_profile();
/// Throws ConfigError on an unknown profile name.
RunConfig profile_by_name(std::string_view name);

struct ParsedConfig {
    RunConfig config;
    /// Dotted key ("focus.radius") -> 1-based line where it was set.
    std::map<std::string, int> key_lines;
};

/// Parses the sectioned key/value format. A top-level `profile = desk|paper`
/// selects the base; otherwise `base_profile` is used. Throws ConfigError
/// with the line number on syntax errors, unknown keys and malformed values.
ParsedConfig parse_config(std::string_view text, std::string_view base_profile = "paper");
ParsedConfig load_config_file(const std::string &path, std::string_view base_profile = "paper");

/// Range and consistency checks that do not need geometry. Throws ConfigError.
void validate_parameters(const RunConfig &cfg);

/// Canonical text form: every field materialized, fixed key order, doubles in
/// round-trip precision. parse_config(canonical_text(c)) reproduces c.
std::string canonical_text(const RunConfig &cfg);

using Digest = std::array<std::uint8_t, 32>;

/// Digest of the canonical text of the whole configuration.
Digest config_hash(const RunConfig &cfg);
/// Digest of the configuration with the codebook key fields (transmitter
/// position, focus centers) and the optimizer seed removed. Entries compiled
/// for different scenarios of one environment share this hash.
Digest scene_hash(const RunConfig &cfg);

std::string to_hex(const Digest &d);

}  // namespace ris
