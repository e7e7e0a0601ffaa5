// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON artifacts (stage traces, ablation table, run manifest) and planar
// field-map exports.

#include <string>
#include <vector>

#include "ris/config.hpp"
#include "ris/field.hpp"
#include "ris/match.hpp"

namespace ris {

inline constexpr int kJsonSchemaVersion = 1;

/// Deterministic: wall-clock times are excluded (see timings_json). A
/// non-empty `failure` marks a partial trace.
std::string trace_json(const StageTrace &trace, const std::string &failure = "");
std::string timings_json(const StageTrace &trace);

struct AblationRow {
    std::string stage;  // GO, S1, S2 w, S2 w/o, S3 w, S3 w/o
    EnergyReport report;
    double gain_db = 0.0;
};

std::vector<AblationRow> ablation_rows(const AblationResult &result);
std::string ablation_json(const AblationResult &result);
/// Fixed-width text table of the ablation rows, fractions in percent.
std::string ablation_table(const AblationResult &result);

struct RunManifest {
    std::string subcommand;
    RunConfig config;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> outputs;  // role -> path
    std::string tool_version;
};

std::string manifest_json(const RunManifest &manifest);

struct PlaneSpec {
    int axis = 2;           // normal axis of the plane: 0, 1, 2
    double offset = 0.0;    // m
    int resolution = 200;   // samples per side
};

/// Cell-centred res x res grid on the plane, row-major with the first
/// in-plane axis fastest. Throws ConfigError when the plane is outside the room.
std::vector<Vec3> plane_points(const Scene &scene, const PlaneSpec &plane);

FieldMap plane_field(const Scene &scene, const PhaseConfig &config, const IncidentField &incident,
                     const PlaneSpec &plane);

/// Share of the plane's sum |E|^2 at points inside the focus discs (the
/// focus spheres cut by the plane).
double disc_energy_fraction(const Scene &scene, const FieldMap &map);

void write_field_csv(const std::string &path, const FieldMap &map);
/// 8-bit binary PGM of |E| scaled by its maximum; returns the maximum.
double write_field_pgm(const std::string &path, const FieldMap &map, int resolution);
void write_field_sidecar(const std::string &path, const Scene &scene, const PlaneSpec &plane, double max_abs);

}  // namespace ris
