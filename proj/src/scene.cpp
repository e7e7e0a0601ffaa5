// SPDX-License-Identifier: Apache-2.0
#include "ris/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ris/errors.hpp"

namespace ris {

namespace {

constexpr double kPositionTolerance = 1e-9;

int wall_axis(WallId id) { return static_cast<int>(id) / 2; }
bool wall_is_max(WallId id) { return static_cast<int>(id) % 2 == 1; }

// Uniform double in [0, 1) from the top 53 bits; fixed across standard libraries.
double unit_uniform(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

bool Room::contains(const Vec3 &p) const {
    for (int a = 0; a < 3; ++a) {
        if (p[a] < 0.0 || p[a] > side) return false;
    }
    return true;
}

bool Room::strictly_contains(const Vec3 &p) const {
    for (int a = 0; a < 3; ++a) {
        if (!(p[a] > 0.0 && p[a] < side)) return false;
    }
    return true;
}

bool FocusRegion::contains(const Vec3 &p) const {
    return std::any_of(centers.begin(), centers.end(),
                       [&](const Vec3 &c) { return distance(p, c) <= radius; });
}

std::string_view to_string(Region r) {
    switch (r) {
    case Region::Focus: return "focus";
    case Region::NearOut: return "near_out";
    case Region::FarOut: return "far_out";
    }
    return "?";
}

Scene build_geometry(const SceneConfig &cfg) {
    RunConfig probe;
    probe.scene = cfg;
    // Parameter-level checks only; match/nsga defaults are always valid.
    validate_parameters(probe);

    Scene scene;
    const double L = cfg.room_side;
    scene.room.side = L;
    for (auto id : kAllWalls) {
        Wall w;
        w.id = id;
        w.axis = wall_axis(id);
        w.offset = wall_is_max(id) ? L : 0.0;
        w.normal[w.axis] = wall_is_max(id) ? -1.0 : 1.0;
        w.ris_mounted = (id == cfg.ris_wall);
        w.reflectivity = w.ris_mounted ? 0.0 : cfg.wall_reflectivity[static_cast<std::size_t>(id)];
        scene.room.walls[static_cast<std::size_t>(id)] = w;
    }

    auto &tx = scene.tx;
    tx.position = cfg.tx_position;
    if (!scene.room.strictly_contains(tx.position)) {
        throw ConfigError("transmitter.position", "transmitter.position: transmitter lies outside the room");
    }
    tx.pattern_exponent = cfg.tx_pattern_exponent;
    tx.frequency = cfg.frequency;
    tx.wavelength = kSpeedOfLight / cfg.frequency;
    tx.wavenumber = kTwoPi / tx.wavelength;

    auto &panel = scene.panel;
    const Wall &mount = scene.room.wall(cfg.ris_wall);
    panel.grid_side = cfg.grid_side;
    panel.spacing = cfg.spacing_wavelengths * tx.wavelength;
    panel.wall = cfg.ris_wall;
    panel.inward_normal = mount.normal;
    panel.cosine_exponent = cfg.element_cosine_exponent;
    const double extent = panel.spacing * cfg.grid_side;
    if (extent > L * (1.0 + 1e-12)) {
        throw ConfigError("ris.grid_side", "ris.grid_side: panel (" + std::to_string(extent) +
                                               " m) does not fit on the mounting wall");
    }
    if (cfg.spacing_wavelengths > 0.25 + 1e-12) {
        scene.warnings.push_back("ris.spacing exceeds lambda/4; the surface field is undersampled");
    }
    const int t1 = (mount.axis + 1) % 3;
    const int t2 = (mount.axis + 2) % 3;
    const double half = 0.5 * (cfg.grid_side - 1);
    panel.element_centers.reserve(static_cast<std::size_t>(cfg.grid_side) * cfg.grid_side);
    for (int row = 0; row < cfg.grid_side; ++row) {
        for (int col = 0; col < cfg.grid_side; ++col) {
            Vec3 p;
            p[mount.axis] = mount.offset;
            p[t1] = 0.5 * L + (col - half) * panel.spacing;
            p[t2] = 0.5 * L + (row - half) * panel.spacing;
            panel.element_centers.push_back(p);
        }
    }
    panel.center[mount.axis] = mount.offset;
    panel.center[t1] = 0.5 * L;
    panel.center[t2] = 0.5 * L;

    if (cfg.tx_boresight) {
        tx.boresight = normalized(*cfg.tx_boresight);
    } else {
        const Vec3 aim = panel.center - tx.position;
        if (norm(aim) < kPositionTolerance) {
            throw ConfigError("transmitter.position", "transmitter.position: coincides with the panel center");
        }
        tx.boresight = normalized(aim);
    }

    auto &focus = scene.focus;
    focus.centers = cfg.focus_centers;
    focus.radius = cfg.focus_radius;
    for (const auto &c : focus.centers) {
        for (int a = 0; a < 3; ++a) {
            if (c[a] - focus.radius < 0.0 || c[a] + focus.radius > L) {
                throw ConfigError("focus.centers", "focus.centers: focus sphere intersects a wall");
            }
        }
    }
    for (std::size_t i = 0; i < focus.centers.size(); ++i) {
        for (std::size_t j = i + 1; j < focus.centers.size(); ++j) {
            if (distance(focus.centers[i], focus.centers[j]) <= 2.0 * focus.radius) {
                throw ConfigError("focus.centers", "focus.centers: focus spheres overlap");
            }
        }
    }
    scene.corridor_multiplier = cfg.corridor_multiplier;
    return scene;
}

Scene build_scene(const SceneConfig &cfg) {
    Scene scene = build_geometry(cfg);
    scene.samples = sample_points(scene, cfg.focus_samples, cfg.outer_samples, cfg.sampling_seed);
    return scene;
}

Vec3 mirror_point(const Vec3 &p, const Wall &wall) {
    Vec3 m = p;
    m[wall.axis] = 2.0 * wall.offset - p[wall.axis];
    return m;
}

Vec3 mirror_transmitter(const Scene &scene, const Wall &wall) { return mirror_point(scene.tx.position, wall); }

SamplingSets sample_points(const Scene &scene, int focus_count, int outer_count, std::uint64_t seed) {
    if (focus_count <= 0) throw ConfigError("sampling.focus_points", "sampling.focus_points: must be > 0");
    if (outer_count <= 0) throw ConfigError("sampling.outer_points", "sampling.outer_points: must be > 0");
    const auto &focus = scene.focus;
    if (focus.centers.empty() || focus.radius < kPositionTolerance) {
        throw ConfigError("focus.radius", "focus.radius: focus volume is degenerate");
    }

    SamplingSets sets;
    std::mt19937_64 rng(seed);
    const auto spheres = focus.centers.size();
    const auto base = static_cast<std::size_t>(focus_count) / spheres;
    const auto extra = static_cast<std::size_t>(focus_count) % spheres;
    sets.focus_points.reserve(static_cast<std::size_t>(focus_count));
    for (std::size_t s = 0; s < spheres; ++s) {
        const std::size_t quota = base + (s < extra ? 1 : 0);
        std::size_t drawn = 0;
        while (drawn < quota) {
            const Vec3 u{2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0,
                         2.0 * unit_uniform(rng) - 1.0};
            if (dot(u, u) > 1.0) continue;
            sets.focus_points.push_back(focus.centers[s] + u * focus.radius);
            ++drawn;
        }
    }

    // Smallest cell-centred cubic lattice with enough points outside every sphere.
    const double L = scene.room.side;
    int n = std::max(1, static_cast<int>(std::floor(std::cbrt(static_cast<double>(outer_count)))));
    auto lattice_point = [L](int n, int ix, int iy, int iz) {
        const double h = L / n;
        return Vec3{(ix + 0.5) * h, (iy + 0.5) * h, (iz + 0.5) * h};
    };
    while (true) {
        std::size_t surviving = 0;
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix)
                    if (!focus.contains(lattice_point(n, ix, iy, iz))) ++surviving;
        if (surviving >= static_cast<std::size_t>(outer_count)) break;
        ++n;
    }
    sets.outer_lattice = n;
    sets.outer_points.reserve(static_cast<std::size_t>(outer_count));
    for (int iz = 0; iz < n && sets.outer_points.size() < static_cast<std::size_t>(outer_count); ++iz)
        for (int iy = 0; iy < n && sets.outer_points.size() < static_cast<std::size_t>(outer_count); ++iy)
            for (int ix = 0; ix < n && sets.outer_points.size() < static_cast<std::size_t>(outer_count); ++ix) {
                const Vec3 p = lattice_point(n, ix, iy, iz);
                if (!focus.contains(p)) sets.outer_points.push_back(p);
            }

    sets.labels.reserve(sets.focus_points.size() + sets.outer_points.size());
    sets.labels.assign(sets.focus_points.size(), Region::Focus);
    for (const auto &p : sets.outer_points) sets.labels.push_back(classify_region(p, scene));
    return sets;
}

Region classify_region(const Vec3 &point, const Scene &scene) {
    const auto &focus = scene.focus;
    if (focus.contains(point)) return Region::Focus;
    const Vec3 *nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto &c : focus.centers) {
        const double d = distance(point, c);
        if (d < best) {
            best = d;
            nearest = &c;
        }
    }
    if (nearest == nullptr) return Region::FarOut;
    const double corridor = scene.corridor_multiplier * focus.radius;
    return segment_distance(point, scene.panel.center, *nearest) <= corridor ? Region::NearOut : Region::FarOut;
}

}  // namespace ris
