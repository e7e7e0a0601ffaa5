// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ris/config.hpp"
#include "ris/geometry.hpp"

namespace ris {

struct Wall {
    WallId id{};
    Vec3 normal;          // unit, pointing into the room
    int axis = 0;         // 0, 1, 2 for x, y, z
    double offset = 0.0;  // plane coordinate along `axis`
    double reflectivity = 0.0;
    bool ris_mounted = false;
};

struct Room {
    double side = 0.0;
    std::array<Wall, 6> walls{};

    const Wall &wall(WallId id) const { return walls[static_cast<std::size_t>(id)]; }
    bool contains(const Vec3 &p) const;         // closed cube
    bool strictly_contains(const Vec3 &p) const;
};

struct Transmitter {
    Vec3 position;
    Vec3 boresight;              // unit
    double pattern_exponent = 0.0;
    double frequency = 0.0;
    double wavelength = 0.0;
    double wavenumber = 0.0;
};

struct RisPanel {
    int grid_side = 0;
    double spacing = 0.0;
    WallId wall{};
    Vec3 inward_normal;          // mounting-wall normal, into the room
    double cosine_exponent = 0.0;
    Vec3 center;
    /// Raster order: index = row * grid_side + col.
    std::vector<Vec3> element_centers;

    std::size_t size() const { return element_centers.size(); }
    int row(std::size_t n) const { return static_cast<int>(n / static_cast<std::size_t>(grid_side)); }
    int col(std::size_t n) const { return static_cast<int>(n % static_cast<std::size_t>(grid_side)); }
};

struct FocusRegion {
    std::vector<Vec3> centers;
    double radius = 0.0;

    bool contains(const Vec3 &p) const;
};

enum class Region : std::uint8_t { Focus = 0, NearOut = 1, FarOut = 2 };

std::string_view to_string(Region r);

struct SamplingSets {
    std::vector<Vec3> focus_points;
    std::vector<Vec3> outer_points;
    /// One label per point: focus points first, then outer points.
    std::vector<Region> labels;
    /// Lattice points per axis used for the outer set.
    int outer_lattice = 0;

    double focus_weight() const { return 1.0 / static_cast<double>(focus_points.size()); }
    double outer_weight() const { return 1.0 / static_cast<double>(outer_points.size()); }
    Region outer_label(std::size_t j) const { return labels[focus_points.size() + j]; }
};

/// Immutable simulation geometry. Build with build_scene().
struct Scene {
    Room room;
    Transmitter tx;
    RisPanel panel;
    FocusRegion focus;
    double corridor_multiplier = 2.0;
    SamplingSets samples;
    /// Non-fatal findings, e.g. element pitch above lambda/4.
    std::vector<std::string> warnings;

    std::size_t element_count() const { return panel.size(); }
};

/// Validates `config` and constructs the scene, including the sampling sets.
/// Throws ConfigError naming the offending key.
Scene build_scene(const SceneConfig &config);

/// Builds the scene geometry without sampling sets (samples left empty).
Scene build_geometry(const SceneConfig &config);

/// Reflection of the transmitter across the plane of `wall`.
Vec3 mirror_transmitter(const Scene &scene, const Wall &wall);
Vec3 mirror_point(const Vec3 &p, const Wall &wall);

/// Seeded focus sampling (uniform rejection sampling inside each sphere,
/// allocated evenly) and lattice sampling of the outer region.
SamplingSets sample_points(const Scene &geometry, int focus_count, int outer_count, std::uint64_t seed);

Region classify_region(const Vec3 &point, const Scene &scene);

}  // namespace ris
