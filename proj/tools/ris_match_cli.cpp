// SPDX-License-Identifier: Apache-2.0
// ris-match: validate scenes, compile codebook entries, export field maps.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "ris/codebook.hpp"
#include "ris/config.hpp"
#include "ris/match.hpp"
#include "ris/report.hpp"
#include "ris/scene.hpp"

namespace fs = std::filesystem;
using namespace ris;

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string profile;
    int threads = 0;
    std::string output_dir = "ris-match-out";
};

struct Loaded {
    RunConfig config;
    std::map<std::string, int> key_lines;
};

Loaded load(const Globals &g) {
    Loaded out;
    const std::string base = g.profile.empty() ? "paper" : g.profile;
    if (g.config_path.empty()) {
        out.config = profile_by_name(base);
    } else {
        auto parsed = load_config_file(g.config_path, base);
        out.config = std::move(parsed.config);
        out.key_lines = std::move(parsed.key_lines);
    }
    if (g.seed) out.config.match.rng_seed = *g.seed;
    return out;
}

void set_threads(int requested) {
    int n = requested;
    if (n <= 0) {
        if (const char *env = std::getenv("RIS_MATCH_THREADS"); env && *env) n = std::atoi(env);
    }
    if (n > 0) omp_set_num_threads(n);
}

fs::path prepare_output_dir(const std::string &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
    return fs::path(dir);
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

void write_manifest(const fs::path &dir, const std::string &subcommand, const RunConfig &cfg,
                    std::vector<std::pair<std::string, std::string>> outputs) {
    RunManifest m{subcommand, cfg, cfg.match.rng_seed, std::move(outputs), RIS_MATCH_VERSION};
    write_text(dir / "manifest.json", manifest_json(m));
}

struct Progress : CompileObserver {
    void stage_done(const StageRecord &r) override {
        std::fprintf(stderr, "%-14s eta_focus %.4f  eta_dirOut %.4f  eta_unexp %.4f  gain %+.2f dB  (%.1f s)\n",
                     r.name.c_str(), r.report.eta_focus, r.report.eta_dir_out, r.report.eta_unexp, r.gain_db,
                     r.wall_clock_s);
    }
};

Vec3 parse_point(const std::string &text, const std::string &what) {
    std::stringstream ss(text);
    Vec3 p;
    char c1 = 0, c2 = 0;
    if (!(ss >> p.x >> c1 >> p.y >> c2 >> p.z) || c1 != ',' || c2 != ',' || !(ss >> std::ws).eof()) {
        throw ConfigError(what, "expected x,y,z");
    }
    return p;
}

// "lo:hi:n" or a single value.
std::vector<double> parse_axis(const std::string &text, const std::string &key) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    try {
        if (parts.size() == 1) return {std::stod(parts[0])};
        if (parts.size() == 3) {
            const double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
            const int n = std::stoi(parts[2]);
            if (n < 1) throw ConfigError(key, "grid count must be positive");
            if (n == 1) return {lo};
            std::vector<double> v;
            for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
            return v;
        }
    } catch (const std::logic_error &) {
    }
    throw ConfigError(key, "expected 'value' or 'lo:hi:count'");
}

std::vector<Vec3> parse_focus_grid(const std::string &spec) {
    std::vector<double> axes[3];
    bool seen[3] = {false, false, false};
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto eq = item.find('=');
        if (eq != 1 || std::string("xyz").find(item[0]) == std::string::npos) {
            throw ConfigError("focus-grid", "expected x=..,y=..,z=..");
        }
        const int a = static_cast<int>(std::string("xyz").find(item[0]));
        axes[a] = parse_axis(item.substr(2), "focus-grid");
        seen[a] = true;
    }
    if (!seen[0] || !seen[1] || !seen[2]) throw ConfigError("focus-grid", "all of x, y and z are required");
    std::vector<Vec3> pts;
    for (double z : axes[2])
        for (double y : axes[1])
            for (double x : axes[0]) pts.push_back({x, y, z});
    return pts;
}

std::vector<std::uint64_t> parse_seeds(const std::string &text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    for (std::string s; std::getline(ss, s, ',');) {
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::logic_error &) {
            throw ConfigError("seeds", "expected a comma-separated list of integers");
        }
    }
    if (seeds.empty()) throw ConfigError("seeds", "seed list is empty");
    return seeds;
}

// ---- subcommands ---------------------------------------------------------

int cmd_validate(const Globals &g) {
    auto loaded = load(g);
    validate_parameters(loaded.config);
    const Scene geometry = build_geometry(loaded.config.scene);
    for (const auto &w : geometry.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("valid: %zu elements, %zu wall(s) reflecting, scene %s\n", geometry.element_count(),
                static_cast<std::size_t>(std::count_if(geometry.room.walls.begin(), geometry.room.walls.end(),
                                                       [](const Wall &w) { return w.reflectivity > 0.0; })),
                to_hex(scene_hash(loaded.config)).substr(0, 16).c_str());
    return kOk;
}

int cmd_compile(const Globals &g, bool ablation, bool stamp_time) {
    auto cfg = load(g).config;
    validate_parameters(cfg);
    const auto dir = prepare_output_dir(g.output_dir);
    std::vector<std::pair<std::string, std::string>> outputs{{"codebook", "codebook.risc"},
                                                             {"trace", "trace.json"},
                                                             {"timings", "timings.json"}};
    if (ablation) {
        outputs = {{"codebook", "codebook.risc"},         {"codebook_without", "codebook_without.risc"},
                   {"trace", "trace.json"},               {"trace_without", "trace_without.json"},
                   {"ablation", "ablation.json"},         {"ablation_table", "ablation.txt"},
                   {"timings", "timings.json"}};
    }
    write_manifest(dir, ablation ? "compile --ablation" : "compile", cfg, outputs);

    Progress progress;
    auto store = [&](CompileResult &r, const std::string &book_name, const std::string &trace_name) {
        if (stamp_time) r.entry.created_at = entry_timestamp(true);
        Codebook book(r.entry.scene_hash);
        book.put(r.entry);
        save_codebook(book, (dir / book_name).string());
        write_text(dir / trace_name, trace_json(r.trace));
    };
    try {
        if (ablation) {
            auto result = compile_ablation(cfg, &progress);
            store(result.with_min, "codebook.risc", "trace.json");
            store(result.without_min, "codebook_without.risc", "trace_without.json");
            write_text(dir / "ablation.json", ablation_json(result));
            const auto table = ablation_table(result);
            write_text(dir / "ablation.txt", table);
            write_text(dir / "timings.json", timings_json(result.with_min.trace));
            std::fputs(table.c_str(), stdout);
        } else {
            auto result = compile(cfg, &progress);
            store(result, "codebook.risc", "trace.json");
            write_text(dir / "timings.json", timings_json(result.trace));
        }
    } catch (const StageFailure &e) {
        write_text(dir / "trace.json", trace_json(e.partial_trace(), e.what()));
        throw;
    }
    std::printf("wrote %s\n", dir.string().c_str());
    return kOk;
}

int cmd_fieldmap(const Globals &g, const std::string &codebook_path, const std::string &phases_src,
                 std::optional<std::string> focus_text, double tolerance, const std::string &axis_name,
                 std::optional<double> offset, int resolution) {
    auto cfg = load(g).config;
    validate_parameters(cfg);
    if (phases_src != "go" && phases_src != "entry") throw ConfigError("phases", "expected go or entry");
    const auto dir = prepare_output_dir(g.output_dir);

    std::optional<CodebookEntry> entry;
    if (phases_src == "entry") {
        if (codebook_path.empty()) throw ConfigError("codebook", "--codebook is required with --phases entry");
        const auto book = load_codebook(codebook_path);
        const Vec3 focus =
            focus_text ? parse_point(*focus_text, "focus") : cfg.scene.focus_centers.front();
        const auto *found = book.lookup(cfg.scene.tx_position, focus, tolerance);
        if (!found) throw ConfigError("focus", "no codebook entry matches this transmitter and focus");
        entry = *found;
        cfg.scene.tx_position = entry->key.tx_position;
        cfg.scene.focus_centers = entry->key.focus_centers;
        if (entry->scene_hash != scene_hash(cfg)) {
            throw ConfigError("codebook", "codebook entry was compiled for a different scene");
        }
    } else if (focus_text) {
        cfg.scene.focus_centers = {parse_point(*focus_text, "focus")};
    }

    const auto scene = build_geometry(cfg.scene);
    const int axis = static_cast<int>(std::string("xyz").find(axis_name));
    if (axis_name.size() != 1 || axis < 0) throw ConfigError("axis", "expected x, y or z");
    const PlaneSpec plane{axis, offset.value_or(scene.focus.centers.front()[axis]), resolution};

    write_manifest(dir, "fieldmap", cfg,
                   {{"csv", "fieldmap.csv"}, {"pgm", "fieldmap.pgm"}, {"annotations", "fieldmap.txt"}});

    const PhaseConfig config = entry ? PhaseConfig(entry->phases) : go_init(scene);
    if (config.size() != scene.element_count()) throw ConfigError("codebook", "entry has the wrong element count");
    const auto incident = solve_incident(scene, config, cfg.coupling);
    const auto map = plane_field(scene, config, incident, plane);
    write_field_csv((dir / "fieldmap.csv").string(), map);
    const double vmax = write_field_pgm((dir / "fieldmap.pgm").string(), map, plane.resolution);
    write_field_sidecar((dir / "fieldmap.txt").string(), scene, plane, vmax);
    std::printf("focus-disc energy fraction %.6f\n", disc_energy_fraction(scene, map));
    return kOk;
}

int cmd_sweep(const Globals &g, const std::string &grid, const std::string &seeds_text) {
    auto base = load(g).config;
    validate_parameters(base);
    const auto points = parse_focus_grid(grid);
    const auto seeds = seeds_text.empty() ? std::vector<std::uint64_t>{base.match.rng_seed} : parse_seeds(seeds_text);
    const auto dir = prepare_output_dir(g.output_dir);
    write_manifest(dir, "sweep", base, {{"codebook", "sweep.risc"}, {"log", "sweep.jsonl"}});

    std::ofstream log(dir / "sweep.jsonl", std::ios::binary);
    if (!log) throw IoError("cannot open sweep.jsonl for writing");
    Codebook book(scene_hash(base));
    std::size_t failures = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        RunConfig cfg = base;
        cfg.scene.focus_centers = {points[i]};
        cfg.match.rng_seed = seeds[i % seeds.size()];
        nlohmann::json line{{"index", i},
                            {"focus", {points[i].x, points[i].y, points[i].z}},
                            {"seed", cfg.match.rng_seed}};
        try {
            auto result = compile(cfg);
            const auto &m = result.entry.metrics;
            line["status"] = "ok";
            line["eta_focus"] = m.eta_focus;
            line["eta_dirOut"] = m.eta_dir_out;
            line["eta_unexp"] = m.eta_unexp;
            line["mean_focus"] = m.mean_focus;
            line["mean_outer"] = m.mean_outer;
            book.put(std::move(result.entry));
        } catch (const Error &e) {
            ++failures;
            line["status"] = "failed";
            line["error"] = e.what();
        }
        const auto text = line.dump() + "\n";
        log << text << std::flush;
        std::fputs(text.c_str(), stdout);
        std::fflush(stdout);
    }
    save_codebook(book, (dir / "sweep.risc").string());
    std::fprintf(stderr, "%zu entries, %zu failed\n", book.size(), failures);
    return failures == 0 ? kOk : kNumerical;
}

int cmd_export(const std::string &codebook_path, bool no_phases, const std::string &out_path) {
    const auto book = load_codebook(codebook_path);
    const auto text = codebook_json(book, !no_phases);
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_text(out_path, text);
    }
    return kOk;
}

void report_config_error(const ConfigError &e, const Globals &g) {
    int line = e.line();
    if (line == 0 && !e.key().empty() && !g.config_path.empty()) {
        try {
            const auto parsed = load_config_file(g.config_path, g.profile.empty() ? "paper" : g.profile);
            if (auto it = parsed.key_lines.find(e.key()); it != parsed.key_lines.end()) line = it->second;
        } catch (const Error &) {
        }
    }
    std::string where = g.config_path.empty() ? "config" : g.config_path;
    if (line > 0) where += ":" + std::to_string(line);
    const std::string msg = e.what();
    const bool keyed = e.key().empty() || msg.rfind(e.key(), 0) == 0;
    std::fprintf(stderr, "%s: error: %s%s%s\n", where.c_str(), keyed ? "" : e.key().c_str(), keyed ? "" : ": ",
                 msg.c_str());
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Compile phase-configuration codebooks for a reconfigurable surface in a room"};
    app.set_version_flag("--version", RIS_MATCH_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "Scene/run configuration file");
    auto *seed_opt = app.add_option("--seed", seed, "Optimizer seed (overrides match.seed)");
    app.add_option("--profile", g.profile, "Base parameter profile")->check(CLI::IsMember({"paper", "desk"}));
    app.add_option("--threads", g.threads, "Worker threads (fallback: RIS_MATCH_THREADS)")->check(CLI::NonNegativeNumber);
    app.add_option("--output-dir", g.output_dir, "Directory for artifacts");

    auto *validate = app.add_subcommand("validate", "Parse and check a configuration");

    auto *compile_cmd = app.add_subcommand("compile", "Run the four-stage optimizer and write a codebook");
    bool ablation = false, stamp_time = false;
    compile_cmd->add_flag("--ablation", ablation, "Run with and without outer-field minimization");
    compile_cmd->add_flag("--stamp-time", stamp_time, "Record the wall-clock time in created_at");

    auto *fieldmap = app.add_subcommand("fieldmap", "Export |E| on a plane as CSV and PGM");
    std::string codebook_path, phases_src = "entry", axis_name = "z";
    std::optional<std::string> focus_text;
    std::optional<double> offset;
    double tolerance = 1e-3;
    int resolution = 200;
    fieldmap->add_option("--codebook", codebook_path, "Codebook file");
    fieldmap->add_option("--phases", phases_src, "go or entry")->check(CLI::IsMember({"go", "entry"}));
    fieldmap->add_option("--focus", focus_text, "Focus center x,y,z used as the lookup key");
    fieldmap->add_option("--tolerance", tolerance, "Lookup tolerance in m")->check(CLI::NonNegativeNumber);
    fieldmap->add_option("--axis", axis_name, "Plane normal axis")->check(CLI::IsMember({"x", "y", "z"}));
    fieldmap->add_option("--offset", offset, "Plane coordinate in m (default: focus center)");
    fieldmap->add_option("--resolution", resolution, "Samples per side")->check(CLI::PositiveNumber);

    auto *sweep = app.add_subcommand("sweep", "Compile one entry per focus grid point");
    std::string grid, seeds_text;
    sweep->add_option("--focus-grid", grid, "x=lo:hi:n,y=lo:hi:n,z=value")->required();
    sweep->add_option("--seeds", seeds_text, "Comma-separated seeds, cycled over entries");

    auto *export_cmd = app.add_subcommand("export", "Print a codebook as JSON");
    std::string export_path, export_out;
    bool json_flag = false, no_phases = false;
    export_cmd->add_option("codebook", export_path, "Codebook file")->required();
    export_cmd->add_flag("--json", json_flag, "JSON output (the only format)");
    export_cmd->add_flag("--no-phases", no_phases, "Omit phase arrays");
    export_cmd->add_option("-o,--out", export_out, "Write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    if (*seed_opt) g.seed = seed;
    set_threads(g.threads);

    try {
        if (*validate) return cmd_validate(g);
        if (*compile_cmd) return cmd_compile(g, ablation, stamp_time);
        if (*fieldmap)
            return cmd_fieldmap(g, codebook_path, phases_src, focus_text, tolerance, axis_name, offset, resolution);
        if (*sweep) return cmd_sweep(g, grid, seeds_text);
        if (*export_cmd) return cmd_export(export_path, no_phases, export_out);
    } catch (const ConfigError &e) {
        report_config_error(e, g);
        return kConfig;
    } catch (const NumericalError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumerical;
    } catch (const IoError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIo;
    } catch (const CodebookError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIo;
    } catch (const Error &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumerical;
    }
    return kOk;
}
