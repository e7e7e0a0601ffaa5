// SPDX-License-Identifier: Apache-2.0
#include "ris/codebook.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "binary_io.hpp"
#include "ris/digest.hpp"

namespace ris {

namespace {

constexpr std::uint8_t kMagic[4] = {'R', 'I', 'S', 'C'};

double snap(double x) { return std::round(x * 1e6) / 1e6; }
Vec3 snap(const Vec3 &p) { return {snap(p.x), snap(p.y), snap(p.z)}; }

void put_vec(detail::ByteWriter &w, const Vec3 &v) {
    w.put(v.x);
    w.put(v.y);
    w.put(v.z);
}

template <typename R>
Vec3 get_vec(R &r) {
    Vec3 v;
    v.x = r.template get<double>();
    v.y = r.template get<double>();
    v.z = r.template get<double>();
    return v;
}

void encode_entry(detail::ByteWriter &w, const CodebookEntry &e) {
    put_vec(w, e.key.tx_position);
    w.put(static_cast<std::uint32_t>(e.key.focus_centers.size()));
    for (const auto &c : e.key.focus_centers) put_vec(w, c);
    w.put(e.key.focus_radius);
    w.put(e.key.frequency);
    w.put(static_cast<std::uint32_t>(e.phases.size()));
    w.put_f64s(e.phases);
    const auto &m = e.metrics;
    for (double x : {m.eta_focus, m.eta_dir_out, m.eta_unexp, m.mean_focus, m.mean_outer, m.focal_energy}) w.put(x);
    w.put(e.seed);
    w.put(e.created_at);
    w.put(static_cast<std::uint32_t>(e.stage_summary.size()));
    for (const auto &s : e.stage_summary) {
        if (s.name.size() > std::numeric_limits<std::uint16_t>::max()) throw CodebookError("stage name too long");
        w.put(static_cast<std::uint16_t>(s.name.size()));
        w.put_bytes({reinterpret_cast<const std::uint8_t *>(s.name.data()), s.name.size()});
        w.put(s.eta_focus);
        w.put(s.eta_dir_out);
        w.put(s.eta_unexp);
    }
}

using Reader = detail::ByteReader<CodebookError>;

CodebookEntry decode_entry(Reader &r) {
    CodebookEntry e;
    e.key.tx_position = get_vec(r);
    const auto centers = r.get<std::uint32_t>();
    if (centers > r.remaining() / 24) throw CodebookError("file is truncated");
    for (std::uint32_t i = 0; i < centers; ++i) e.key.focus_centers.push_back(get_vec(r));
    e.key.focus_radius = r.get<double>();
    e.key.frequency = r.get<double>();
    const auto n = r.get<std::uint32_t>();
    if (n > r.remaining() / 8) throw CodebookError("file is truncated");
    e.phases = r.get_f64s(n);
    auto &m = e.metrics;
    for (double *x : {&m.eta_focus, &m.eta_dir_out, &m.eta_unexp, &m.mean_focus, &m.mean_outer, &m.focal_energy})
        *x = r.get<double>();
    e.seed = r.get<std::uint64_t>();
    e.created_at = r.get<std::int64_t>();
    const auto stages = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < stages; ++i) {
        StageSummary s;
        const auto len = r.get<std::uint16_t>();
        const auto name = r.get_bytes(len);
        s.name.assign(name.begin(), name.end());
        s.eta_focus = r.get<double>();
        s.eta_dir_out = r.get<double>();
        s.eta_unexp = r.get<double>();
        e.stage_summary.push_back(std::move(s));
    }
    return e;
}

nlohmann::json vec_json(const Vec3 &v) { return nlohmann::json::array({v.x, v.y, v.z}); }

}  // namespace

CodebookKey canonicalize(CodebookKey key) {
    key.tx_position = snap(key.tx_position);
    for (auto &c : key.focus_centers) c = snap(c);
    key.focus_radius = snap(key.focus_radius);
    return key;
}

CodebookKey canonical_key(const SceneConfig &scene) {
    return canonicalize({scene.tx_position, scene.focus_centers, scene.focus_radius, scene.frequency});
}

void Codebook::put(CodebookEntry entry, bool overwrite) {
    if (has_hash_ && entry.scene_hash != scene_hash_) {
        throw CodebookError("entry scene hash does not match the codebook");
    }
    if (!has_hash_) {
        scene_hash_ = entry.scene_hash;
        has_hash_ = true;
    }
    entry.key = canonicalize(std::move(entry.key));
    for (auto &existing : entries_) {
        if (existing.key == entry.key) {
            if (!overwrite) throw CodebookError("codebook already holds an entry for this key");
            existing = std::move(entry);
            return;
        }
    }
    entries_.push_back(std::move(entry));
}

const CodebookEntry *Codebook::find(const CodebookKey &key) const {
    const auto k = canonicalize(key);
    for (const auto &e : entries_)
        if (e.key == k) return &e;
    return nullptr;
}

const CodebookEntry *Codebook::lookup(const Vec3 &tx, const Vec3 &focus, double tolerance) const {
    const CodebookEntry *best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto &e : entries_) {
        if (distance(e.key.tx_position, tx) > tolerance) continue;
        double d = std::numeric_limits<double>::infinity();
        for (const auto &c : e.key.focus_centers) d = std::min(d, distance(c, focus));
        if (d <= tolerance && d < best_d) {
            best_d = d;
            best = &e;
        }
    }
    return best;
}

std::vector<std::uint8_t> encode_codebook(const Codebook &book) {
    detail::ByteWriter w;
    w.put_bytes(kMagic);
    w.put(book.version());
    const Digest hash = book.scene_hash().value_or(Digest{});
    w.put_bytes(hash);
    w.put(static_cast<std::uint32_t>(book.size()));
    for (const auto &e : book.entries()) {
        const std::size_t start = w.size();
        w.put_bytes(hash);  // checksummed prefix, removed below
        const std::size_t payload = w.size();
        encode_entry(w, e);
        const auto crc = crc32c(w.view(start));
        auto &bytes = w.bytes();
        bytes.erase(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                    bytes.begin() + static_cast<std::ptrdiff_t>(payload));
        w.put(crc);
    }
    return std::move(w.bytes());
}

Codebook decode_codebook(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.get_bytes(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) throw CodebookError("not a codebook file (bad magic)");
    const auto version = r.get<std::uint16_t>();
    if ((version >> 8) != (kCodebookVersion >> 8)) {
        throw CodebookError("unsupported codebook major version " + std::to_string(version >> 8));
    }
    Codebook book;
    book.version_ = version;
    const auto hash = r.get_bytes(32);
    std::copy(hash.begin(), hash.end(), book.scene_hash_.begin());
    const auto count = r.get<std::uint32_t>();
    book.has_hash_ = count > 0 || book.scene_hash_ != Digest{};
    std::vector<std::uint8_t> scratch;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t start = r.position();
        auto entry = decode_entry(r);
        const auto payload = r.span_between(start, r.position());
        const auto stored = r.get<std::uint32_t>();
        scratch.assign(book.scene_hash_.begin(), book.scene_hash_.end());
        scratch.insert(scratch.end(), payload.begin(), payload.end());
        if (crc32c(scratch) != stored) {
            throw CodebookError("checksum mismatch in codebook entry " + std::to_string(i));
        }
        entry.scene_hash = book.scene_hash_;
        book.entries_.push_back(std::move(entry));
    }
    if (r.remaining() != 0) throw CodebookError("trailing bytes after the last codebook entry");
    return book;
}

void save_codebook(const Codebook &book, const std::string &path) {
    detail::write_file_bytes(path, encode_codebook(book));
}

Codebook load_codebook(const std::string &path) { return decode_codebook(detail::read_file_bytes(path)); }

std::string codebook_json(const Codebook &book, bool include_phases) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["format_version"] = book.version();
    j["scene_hash"] = book.scene_hash() ? to_hex(*book.scene_hash()) : "";
    auto &arr = j["entries"] = nlohmann::json::array();
    for (const auto &e : book.entries()) {
        nlohmann::json je;
        je["key"]["tx_position"] = vec_json(e.key.tx_position);
        je["key"]["focus_centers"] = nlohmann::json::array();
        for (const auto &c : e.key.focus_centers) je["key"]["focus_centers"].push_back(vec_json(c));
        je["key"]["focus_radius"] = e.key.focus_radius;
        je["key"]["frequency"] = e.key.frequency;
        je["elements"] = e.phases.size();
        if (include_phases) je["phases"] = e.phases;
        je["seed"] = e.seed;
        je["created_at"] = e.created_at;
        je["metrics"] = {{"eta_focus", e.metrics.eta_focus},   {"eta_dirOut", e.metrics.eta_dir_out},
                         {"eta_unexp", e.metrics.eta_unexp},   {"mean_focus", e.metrics.mean_focus},
                         {"mean_outer", e.metrics.mean_outer}, {"focal_energy", e.metrics.focal_energy}};
        je["stages"] = nlohmann::json::array();
        for (const auto &s : e.stage_summary) {
            je["stages"].push_back({{"name", s.name},
                                    {"eta_focus", s.eta_focus},
                                    {"eta_dirOut", s.eta_dir_out},
                                    {"eta_unexp", s.eta_unexp}});
        }
        arr.push_back(std::move(je));
    }
    return j.dump(2) + "\n";
}

}  // namespace ris
