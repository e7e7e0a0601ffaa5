// SPDX-License-Identifier: Apache-2.0
#include "ris/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "ris/digest.hpp"
#include "ris/errors.hpp"

namespace ris {

namespace {

constexpr std::array<std::string_view, 6> kWallNames{"x_min", "x_max", "y_min",
                                                     "y_max", "z_min", "z_max"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_vec(const Vec3 &v) {
    return format_double(v.x) + ", " + format_double(v.y) + ", " + format_double(v.z);
}

double parse_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw std::invalid_argument("expected a finite number, got '" + std::string(s) + "'");
    }
    return v;
}

long long parse_integer(std::string_view s) {
    s = trim(s);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

int parse_int(std::string_view s) {
    const long long v = parse_integer(s);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw std::invalid_argument("integer out of range");
    }
    return static_cast<int>(v);
}

std::uint64_t parse_u64(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument("expected a non-negative integer, got '" + std::string(s) + "'");
    }
    return v;
}

bool parse_bool(std::string_view s) {
    s = trim(s);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw std::invalid_argument("expected true/false, got '" + std::string(s) + "'");
}

Vec3 parse_vec(std::string_view s) {
    Vec3 v;
    int axis = 0;
    while (true) {
        const auto comma = s.find(',');
        const auto part = s.substr(0, comma);
        if (axis > 2) throw std::invalid_argument("expected 3 components");
        v[axis++] = parse_double(part);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    if (axis != 3) throw std::invalid_argument("expected 3 components");
    return v;
}

std::vector<Vec3> parse_vec_list(std::string_view s) {
    std::vector<Vec3> out;
    while (true) {
        const auto semi = s.find(';');
        const auto part = trim(s.substr(0, semi));
        if (!part.empty()) out.push_back(parse_vec(part));
        if (semi == std::string_view::npos) break;
        s.remove_prefix(semi + 1);
    }
    if (out.empty()) throw std::invalid_argument("expected at least one 3-vector");
    return out;
}

struct FieldDef {
    std::string key;
    std::function<void(RunConfig &, std::string_view)> set;
    std::function<std::string(const RunConfig &)> get;
    bool scenario_key = false;  // excluded from scene_hash
};

const std::vector<FieldDef> &field_table() {
    static const std::vector<FieldDef> table = [] {
        std::vector<FieldDef> t;
        auto dbl = [&t](std::string key, std::function<double &(RunConfig &)> ref) {
            t.push_back({std::move(key),
                         [ref](RunConfig &c, std::string_view v) { ref(c) = parse_double(v); },
                         [ref](const RunConfig &c) { return format_double(ref(const_cast<RunConfig &>(c))); }});
        };
        auto integer = [&t](std::string key, std::function<int &(RunConfig &)> ref) {
            t.push_back({std::move(key),
                         [ref](RunConfig &c, std::string_view v) { ref(c) = parse_int(v); },
                         [ref](const RunConfig &c) { return std::to_string(ref(const_cast<RunConfig &>(c))); }});
        };
        auto u64 = [&t](std::string key, std::function<std::uint64_t &(RunConfig &)> ref, bool scenario) {
            t.push_back({std::move(key),
                         [ref](RunConfig &c, std::string_view v) { ref(c) = parse_u64(v); },
                         [ref](const RunConfig &c) { return std::to_string(ref(const_cast<RunConfig &>(c))); },
                         scenario});
        };
        auto boolean = [&t](std::string key, std::function<bool &(RunConfig &)> ref) {
            t.push_back({std::move(key),
                         [ref](RunConfig &c, std::string_view v) { ref(c) = parse_bool(v); },
                         [ref](const RunConfig &c) {
                             return std::string(ref(const_cast<RunConfig &>(c)) ? "true" : "false");
                         }});
        };

        dbl("room.side", [](RunConfig &c) -> double & { return c.scene.room_side; });
        for (std::size_t w = 0; w < kWallNames.size(); ++w) {
            dbl("room.reflectivity." + std::string(kWallNames[w]),
                [w](RunConfig &c) -> double & { return c.scene.wall_reflectivity[w]; });
        }

        t.push_back({"transmitter.position",
                     [](RunConfig &c, std::string_view v) { c.scene.tx_position = parse_vec(v); },
                     [](const RunConfig &c) { return format_vec(c.scene.tx_position); }, true});
        t.push_back({"transmitter.boresight",
                     [](RunConfig &c, std::string_view v) {
                         if (trim(v) == "auto") c.scene.tx_boresight.reset();
                         else c.scene.tx_boresight = parse_vec(v);
                     },
                     [](const RunConfig &c) {
                         return c.scene.tx_boresight ? format_vec(*c.scene.tx_boresight) : std::string("auto");
                     }});
        dbl("transmitter.pattern_exponent", [](RunConfig &c) -> double & { return c.scene.tx_pattern_exponent; });
        dbl("transmitter.frequency", [](RunConfig &c) -> double & { return c.scene.frequency; });

        t.push_back({"ris.wall",
                     [](RunConfig &c, std::string_view v) {
                         const auto id = parse_wall_id(trim(v));
                         if (!id) throw std::invalid_argument("unknown wall '" + std::string(trim(v)) + "'");
                         c.scene.ris_wall = *id;
                     },
                     [](const RunConfig &c) { return std::string(to_string(c.scene.ris_wall)); }});
        integer("ris.grid_side", [](RunConfig &c) -> int & { return c.scene.grid_side; });
        dbl("ris.spacing", [](RunConfig &c) -> double & { return c.scene.spacing_wavelengths; });
        dbl("ris.cosine_exponent", [](RunConfig &c) -> double & { return c.scene.element_cosine_exponent; });

        t.push_back({"focus.centers",
                     [](RunConfig &c, std::string_view v) { c.scene.focus_centers = parse_vec_list(v); },
                     [](const RunConfig &c) {
                         std::string s;
                         for (std::size_t i = 0; i < c.scene.focus_centers.size(); ++i) {
                             if (i) s += "; ";
                             s += format_vec(c.scene.focus_centers[i]);
                         }
                         return s;
                     },
                     true});
        dbl("focus.radius", [](RunConfig &c) -> double & { return c.scene.focus_radius; });

        integer("sampling.focus_points", [](RunConfig &c) -> int & { return c.scene.focus_samples; });
        integer("sampling.outer_points", [](RunConfig &c) -> int & { return c.scene.outer_samples; });
        u64("sampling.seed", [](RunConfig &c) -> std::uint64_t & { return c.scene.sampling_seed; }, false);
        dbl("sampling.corridor_multiplier", [](RunConfig &c) -> double & { return c.scene.corridor_multiplier; });

        dbl("coupling.alpha", [](RunConfig &c) -> double & { return c.coupling.alpha; });
        t.push_back({"coupling.neighborhood",
                     [](RunConfig &c, std::string_view v) {
                         v = trim(v);
                         if (v == "moore8") c.coupling.neighborhood = Neighborhood::Moore8;
                         else if (v == "von_neumann4") c.coupling.neighborhood = Neighborhood::VonNeumann4;
                         else throw std::invalid_argument("expected moore8 or von_neumann4");
                     },
                     [](const RunConfig &c) { return std::string(to_string(c.coupling.neighborhood)); }});
        integer("coupling.max_iterations", [](RunConfig &c) -> int & { return c.coupling.max_iterations; });
        dbl("coupling.tolerance", [](RunConfig &c) -> double & { return c.coupling.tolerance; });
        boolean("coupling.single_bounce", [](RunConfig &c) -> bool & { return c.coupling.single_bounce; });
        dbl("coupling.length_unit", [](RunConfig &c) -> double & { return c.coupling.length_unit; });

        dbl("match.delta_phi_stage1", [](RunConfig &c) -> double & { return c.match.delta_phi_stage1; });
        dbl("match.eps_local", [](RunConfig &c) -> double & { return c.match.eps_local; });
        dbl("match.delta_phi_stage3", [](RunConfig &c) -> double & { return c.match.delta_phi_stage3; });
        dbl("match.eps_final", [](RunConfig &c) -> double & { return c.match.eps_final; });
        integer("match.max_iterations", [](RunConfig &c) -> int & { return c.match.max_iterations; });
        boolean("match.minimize_outer", [](RunConfig &c) -> bool & { return c.match.minimize_outer; });
        dbl("match.outer_weight", [](RunConfig &c) -> double & { return c.match.outer_weight; });
        dbl("match.freeze_fraction", [](RunConfig &c) -> double & { return c.match.freeze_fraction; });
        dbl("match.freeze_period_fraction",
            [](RunConfig &c) -> double & { return c.match.freeze_period_fraction; });
        u64("match.seed", [](RunConfig &c) -> std::uint64_t & { return c.match.rng_seed; }, true);
        t.push_back({"match.dense_h_cap",
                     [](RunConfig &c, std::string_view v) { c.match.dense_h_cap = parse_u64(v); },
                     [](const RunConfig &c) { return std::to_string(c.match.dense_h_cap); }});

        integer("nsga2.population", [](RunConfig &c) -> int & { return c.nsga.population; });
        integer("nsga2.generations", [](RunConfig &c) -> int & { return c.nsga.generations; });
        dbl("nsga2.crossover_index", [](RunConfig &c) -> double & { return c.nsga.crossover_index; });
        dbl("nsga2.mutation_index", [](RunConfig &c) -> double & { return c.nsga.mutation_index; });
        dbl("nsga2.mutation_probability", [](RunConfig &c) -> double & { return c.nsga.mutation_probability; });
        dbl("nsga2.crossover_probability",
            [](RunConfig &c) -> double & { return c.nsga.crossover_probability; });
        return t;
    }();
    return table;
}

const FieldDef *find_field(std::string_view key) {
    for (const auto &f : field_table()) {
        if (f.key == key) return &f;
    }
    return nullptr;
}

std::string render(const RunConfig &cfg, bool include_profile, bool include_scenario_keys) {
    std::string out;
    if (include_profile) out += "profile = " + cfg.profile + "\n";
    std::string section;
    for (const auto &f : field_table()) {
        if (f.scenario_key && !include_scenario_keys) continue;
        const auto dot = f.key.find('.');
        const std::string sec = f.key.substr(0, dot);
        if (sec != section) {
            out += "\n[" + sec + "]\n";
            section = sec;
        }
        out += f.key.substr(dot + 1) + " = " + f.get(cfg) + "\n";
    }
    return out;
}

}  // namespace

std::string_view to_string(WallId id) { return kWallNames[static_cast<std::size_t>(id)]; }

std::optional<WallId> parse_wall_id(std::string_view name) {
    for (std::size_t i = 0; i < kWallNames.size(); ++i) {
        if (kWallNames[i] == name) return static_cast<WallId>(i);
    }
    return std::nullopt;
}

std::string_view to_string(Neighborhood nb) {
    return nb == Neighborhood::Moore8 ? "moore8" : "von_neumann4";
}

RunConfig paper_profile() { return RunConfig{}; }

RunConfig desk_profile() {
    RunConfig c;
    c.profile = "desk";
    c.scene.grid_side = 24;
    c.scene.focus_samples = 800;
    c.scene.outer_samples = 1200;
    c.nsga.population = 60;
    c.nsga.generations = 20;
    c.match.max_iterations = 2000;
    return c;
}

RunConfig profile_by_name(std::string_view name) {
    if (name == "paper") return paper_profile();
    if (name == "desk") return desk_profile();
    throw ConfigError("profile", "unknown profile '" + std::string(name) + "' (expected paper or desk)");
}

ParsedConfig parse_config(std::string_view text, std::string_view base_profile) {
    ParsedConfig parsed{profile_by_name(base_profile), {}};
    std::string section;
    bool seen_assignment = false;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("", "malformed section header", line_no);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw ConfigError("", "empty section name", line_no);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("", "expected 'key = value'", line_no);
        const std::string name(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (name.empty()) throw ConfigError("", "missing key before '='", line_no);

        if (section.empty() && name == "profile") {
            if (seen_assignment) {
                throw ConfigError("profile", "'profile' must precede all other settings", line_no);
            }
            try {
                parsed.config = profile_by_name(value);
            } catch (const ConfigError &e) {
                throw ConfigError("profile", e.what(), line_no);
            }
            parsed.key_lines["profile"] = line_no;
            seen_assignment = true;
            continue;
        }

        std::string key = section.empty() ? name : section + "." + name;
        if (key == "room.reflectivity") {
            // Shorthand: one value for every wall.
            double beta = 0.0;
            try {
                beta = parse_double(value);
            } catch (const std::invalid_argument &e) {
                throw ConfigError(key, key + ": " + e.what(), line_no);
            }
            parsed.config.scene.wall_reflectivity.fill(beta);
            for (auto w : kWallNames) parsed.key_lines["room.reflectivity." + std::string(w)] = line_no;
            parsed.key_lines[key] = line_no;
            seen_assignment = true;
            continue;
        }

        const FieldDef *field = find_field(key);
        if (!field) throw ConfigError(key, "unknown key '" + key + "'", line_no);
        try {
            field->set(parsed.config, value);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(key, key + ": " + e.what(), line_no);
        }
        parsed.key_lines[key] = line_no;
        seen_assignment = true;
    }
    return parsed;
}

ParsedConfig load_config_file(const std::string &path, std::string_view base_profile) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), base_profile);
}

void validate_parameters(const RunConfig &cfg) {
    const auto &s = cfg.scene;
    auto require = [](bool ok, const char *key, const std::string &msg) {
        if (!ok) throw ConfigError(key, std::string(key) + ": " + msg);
    };
    require(s.room_side > 0.0, "room.side", "must be > 0");
    for (std::size_t w = 0; w < 6; ++w) {
        const std::string key = "room.reflectivity." + std::string(kWallNames[w]);
        if (!(s.wall_reflectivity[w] >= 0.0 && s.wall_reflectivity[w] <= 1.0)) {
            throw ConfigError(key, key + ": must lie in [0, 1]");
        }
    }
    require(s.frequency > 0.0, "transmitter.frequency", "must be > 0");
    require(s.tx_pattern_exponent >= 0.0, "transmitter.pattern_exponent", "must be >= 0");
    if (s.tx_boresight) {
        require(norm(*s.tx_boresight) > 1e-12, "transmitter.boresight", "must be a non-zero vector");
    }
    require(s.grid_side > 0, "ris.grid_side", "must be > 0 (zero elements)");
    require(s.spacing_wavelengths > 0.0, "ris.spacing", "must be > 0");
    require(s.element_cosine_exponent >= 0.0, "ris.cosine_exponent", "must be >= 0");
    require(s.focus_radius > 0.0, "focus.radius", "must be > 0");
    require(!s.focus_centers.empty(), "focus.centers", "at least one center required");
    require(s.focus_samples > 0, "sampling.focus_points", "must be > 0");
    require(s.outer_samples > 0, "sampling.outer_points", "must be > 0");
    require(s.corridor_multiplier >= 0.0, "sampling.corridor_multiplier", "must be >= 0");

    const auto &c = cfg.coupling;
    require(c.alpha >= 0.0 && c.alpha <= 1.0, "coupling.alpha", "must lie in [0, 1]");
    require(c.max_iterations >= 1, "coupling.max_iterations", "must be >= 1");
    require(c.tolerance > 0.0, "coupling.tolerance", "must be > 0");
    require(c.length_unit > 0.0, "coupling.length_unit", "must be > 0");

    const auto &m = cfg.match;
    require(m.delta_phi_stage1 > 0.0, "match.delta_phi_stage1", "must be > 0");
    require(m.eps_local > 0.0, "match.eps_local", "must be > 0");
    require(m.delta_phi_stage3 > 0.0, "match.delta_phi_stage3", "must be > 0");
    require(m.eps_final > 0.0, "match.eps_final", "must be > 0");
    require(m.max_iterations >= 1, "match.max_iterations", "must be >= 1");
    require(m.outer_weight >= 0.0, "match.outer_weight", "must be >= 0");
    require(m.freeze_fraction >= 0.0 && m.freeze_fraction < 1.0, "match.freeze_fraction",
            "must lie in [0, 1)");
    require(m.freeze_period_fraction > 0.0 && m.freeze_period_fraction <= 1.0,
            "match.freeze_period_fraction", "must lie in (0, 1]");

    const auto &n = cfg.nsga;
    require(n.population >= 4 && n.population % 2 == 0, "nsga2.population", "must be even and >= 4");
    require(n.generations >= 1, "nsga2.generations", "must be >= 1");
    require(n.crossover_index > 0.0, "nsga2.crossover_index", "must be > 0");
    require(n.mutation_index > 0.0, "nsga2.mutation_index", "must be > 0");
    require(n.mutation_probability >= 0.0 && n.mutation_probability <= 1.0, "nsga2.mutation_probability",
            "must lie in [0, 1]");
    require(n.crossover_probability >= 0.0 && n.crossover_probability <= 1.0,
            "nsga2.crossover_probability", "must lie in [0, 1]");
}

std::string canonical_text(const RunConfig &cfg) { return render(cfg, true, true); }

Digest config_hash(const RunConfig &cfg) { return sha256(render(cfg, false, true)); }

Digest scene_hash(const RunConfig &cfg) { return sha256(render(cfg, false, false)); }

std::string to_hex(const Digest &d) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (auto b : d) {
        s += kHex[b >> 4];
        s += kHex[b & 0xF];
    }
    return s;
}

}  // namespace ris
