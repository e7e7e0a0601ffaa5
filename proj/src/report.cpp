// SPDX-License-Identifier: Apache-2.0
#include "ris/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ris/scene.hpp"

namespace ris {

namespace {

using json = nlohmann::json;

json report_json(const EnergyReport &r) {
    return {{"eta_focus", r.eta_focus},   {"eta_dirOut", r.eta_dir_out}, {"eta_unexp", r.eta_unexp},
            {"mean_focus", r.mean_focus}, {"mean_outer", r.mean_outer}, {"focal_energy", r.focal_energy}};
}

std::ofstream open_out(const std::string &path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

void check_written(std::ofstream &out, const std::string &path) {
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

// In-plane axes (u, v) for a plane normal to `axis`.
std::pair<int, int> plane_axes(int axis) { return {(axis + 1) % 3, (axis + 2) % 3}; }

}  // namespace

std::string trace_json(const StageTrace &trace, const std::string &failure) {
    json j;
    j["schema_version"] = kJsonSchemaVersion;
    j["minimize_outer"] = trace.minimize_outer;
    if (!failure.empty()) j["failure"] = failure;
    j["seed"] = trace.seed;
    auto &stages = j["stages"] = json::array();
    for (const auto &s : trace.stages) {
        json js = report_json(s.report);
        js["name"] = s.name;
        js["gain_db"] = s.gain_db;
        js["iterations"] = s.iterations;
        js["evaluations"] = s.evaluations;
        js["flags"] = s.flags;
        js["objective_history"] = s.objective_history;
        stages.push_back(std::move(js));
    }
    return j.dump(2) + "\n";
}

std::string timings_json(const StageTrace &trace) {
    json j;
    j["schema_version"] = kJsonSchemaVersion;
    for (const auto &s : trace.stages) j["wall_clock_s"][s.name] = s.wall_clock_s;
    return j.dump(2) + "\n";
}

std::vector<AblationRow> ablation_rows(const AblationResult &result) {
    const auto &w = result.with_min.trace.stages;
    const auto &wo = result.without_min.trace.stages;
    if (w.size() != 4 || wo.size() != 4) throw NumericalError("ablation traces are incomplete");
    return {{"GO", w[0].report, w[0].gain_db},      {"S1", w[1].report, w[1].gain_db},
            {"S2 w", w[2].report, w[2].gain_db},    {"S2 w/o", wo[2].report, wo[2].gain_db},
            {"S3 w", w[3].report, w[3].gain_db},    {"S3 w/o", wo[3].report, wo[3].gain_db}};
}

std::string ablation_json(const AblationResult &result) {
    json j;
    j["schema_version"] = kJsonSchemaVersion;
    j["seed"] = result.with_min.trace.seed;
    auto &rows = j["rows"] = json::array();
    for (const auto &r : ablation_rows(result)) {
        json jr = report_json(r.report);
        jr["stage"] = r.stage;
        jr["gain_db"] = r.gain_db;
        rows.push_back(std::move(jr));
    }
    return j.dump(2) + "\n";
}

std::string ablation_table(const AblationResult &result) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %10s\n", "stage", "focus %", "dirOut %", "unexp %",
                  "gain dB");
    out << line;
    for (const auto &r : ablation_rows(result)) {
        std::snprintf(line, sizeof line, "%-8s %10.3f %10.3f %10.3f %10.3f\n", r.stage.c_str(),
                      100.0 * r.report.eta_focus, 100.0 * r.report.eta_dir_out, 100.0 * r.report.eta_unexp,
                      r.gain_db);
        out << line;
    }
    return out.str();
}

std::string manifest_json(const RunManifest &m) {
    json j;
    j["schema_version"] = kJsonSchemaVersion;
    j["subcommand"] = m.subcommand;
    j["tool_version"] = m.tool_version;
    j["profile"] = m.config.profile;
    j["seed"] = m.seed;
    j["config_hash"] = to_hex(config_hash(m.config));
    j["scene_hash"] = to_hex(scene_hash(m.config));
    j["resolved_config"] = canonical_text(m.config);
    auto &outs = j["outputs"] = json::object();
    for (const auto &[role, path] : m.outputs) outs[role] = path;
    return j.dump(2) + "\n";
}

std::vector<Vec3> plane_points(const Scene &scene, const PlaneSpec &plane) {
    const double L = scene.room.side;
    if (plane.axis < 0 || plane.axis > 2) throw ConfigError("plane.axis", "axis must be x, y or z");
    if (!(plane.offset > 0.0 && plane.offset < L)) {
        throw ConfigError("plane.offset", "plane lies outside the room");
    }
    if (plane.resolution < 1) throw ConfigError("plane.resolution", "resolution must be positive");
    const auto [ua, va] = plane_axes(plane.axis);
    const double h = L / plane.resolution;
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(plane.resolution) * plane.resolution);
    for (int iv = 0; iv < plane.resolution; ++iv) {
        for (int iu = 0; iu < plane.resolution; ++iu) {
            Vec3 p;
            p[plane.axis] = plane.offset;
            p[ua] = (iu + 0.5) * h;
            p[va] = (iv + 0.5) * h;
            pts.push_back(p);
        }
    }
    return pts;
}

FieldMap plane_field(const Scene &scene, const PhaseConfig &config, const IncidentField &incident,
                     const PlaneSpec &plane) {
    const auto pts = plane_points(scene, plane);
    return total_field(scene, config, incident, pts);
}

double disc_energy_fraction(const Scene &scene, const FieldMap &map) {
    double inside = 0.0, total = 0.0;
    for (std::size_t i = 0; i < map.points.size(); ++i) {
        const double e = std::norm(map.values[i]);
        total += e;
        if (scene.focus.contains(map.points[i])) inside += e;
    }
    return total > 0.0 ? inside / total : 0.0;
}

void write_field_csv(const std::string &path, const FieldMap &map) {
    auto out = open_out(path);
    out << "x,y,z,re,im,abs\n";
    char line[256];
    for (std::size_t i = 0; i < map.points.size(); ++i) {
        const auto &p = map.points[i];
        const auto v = map.values[i] * map.normalization;
        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.17g,%.17g,%.17g\n", p.x, p.y, p.z, v.real(), v.imag(),
                      std::abs(v));
        out << line;
    }
    check_written(out, path);
}

double write_field_pgm(const std::string &path, const FieldMap &map, int resolution) {
    const std::size_t n = static_cast<std::size_t>(resolution) * resolution;
    if (map.values.size() != n) throw NumericalError("field map size does not match the resolution");
    double vmax = 0.0;
    for (const auto &v : map.values) vmax = std::max(vmax, std::abs(v));
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << "P5\n" << resolution << ' ' << resolution << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(resolution));
    // Top image row is the largest second in-plane coordinate.
    for (int iv = resolution - 1; iv >= 0; --iv) {
        for (int iu = 0; iu < resolution; ++iu) {
            const double a = std::abs(map.values[static_cast<std::size_t>(iv) * resolution + iu]);
            row[static_cast<std::size_t>(iu)] =
                vmax > 0.0 ? static_cast<unsigned char>(std::lround(255.0 * a / vmax)) : 0;
        }
        out.write(reinterpret_cast<const char *>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    check_written(out, path);
    return vmax;
}

void write_field_sidecar(const std::string &path, const Scene &scene, const PlaneSpec &plane, double max_abs) {
    auto out = open_out(path);
    const auto [ua, va] = plane_axes(plane.axis);
    const char *names = "xyz";
    const double L = scene.room.side;
    auto pixel = [&](const Vec3 &p) {
        const int col = static_cast<int>(std::floor(p[ua] / L * plane.resolution));
        const int row = plane.resolution - 1 - static_cast<int>(std::floor(p[va] / L * plane.resolution));
        return std::to_string(col) + " " + std::to_string(row);
    };
    char buf[256];
    out << "plane_axis " << names[plane.axis] << "\n";
    std::snprintf(buf, sizeof buf, "plane_offset_m %.9g\n", plane.offset);
    out << buf;
    out << "resolution " << plane.resolution << "\n";
    out << "image_columns_axis " << names[ua] << "\n";
    out << "image_rows_axis " << names[va] << " (descending)\n";
    out << "normalization_V_per_m 1\n";
    std::snprintf(buf, sizeof buf, "pgm_scale_max_abs %.17g\n", max_abs);
    out << buf;
    const auto &tx = scene.tx.position;
    std::snprintf(buf, sizeof buf, "transmitter %.9g %.9g %.9g pixel ", tx.x, tx.y, tx.z);
    out << buf << pixel(tx) << "\n";
    for (const auto &c : scene.focus.centers) {
        std::snprintf(buf, sizeof buf, "focus %.9g %.9g %.9g radius %.9g pixel ", c.x, c.y, c.z,
                      scene.focus.radius);
        out << buf << pixel(c) << "\n";
    }
    check_written(out, path);
}

}  // namespace ris
