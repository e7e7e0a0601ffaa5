// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ris/config.hpp"
#include "ris/errors.hpp"
#include "ris/field.hpp"

namespace ris {

/// Scenario key. Positions are canonicalized to a 1e-6 m grid.
struct CodebookKey {
    Vec3 tx_position;
    std::vector<Vec3> focus_centers;
    double focus_radius = 0.0;
    double frequency = 0.0;

    friend bool operator==(const CodebookKey &, const CodebookKey &) = default;
};

CodebookKey canonical_key(const SceneConfig &scene);
CodebookKey canonicalize(CodebookKey key);

struct StageSummary {
    std::string name;
    double eta_focus = 0.0;
    double eta_dir_out = 0.0;
    double eta_unexp = 0.0;

    friend bool operator==(const StageSummary &, const StageSummary &) = default;
};

struct CodebookEntry {
    CodebookKey key;
    std::vector<double> phases;  // radians, raster order
    Digest scene_hash{};
    std::uint64_t seed = 0;
    EnergyReport metrics;
    std::int64_t created_at = 0;  // seconds since the Unix epoch
    std::vector<StageSummary> stage_summary;

    friend bool operator==(const CodebookEntry &, const CodebookEntry &) = default;
};

class CodebookError : public Error {
  public:
    using Error::Error;
};

/// Format version: major in the high byte.
inline constexpr std::uint16_t kCodebookVersion = 0x0100;

class Codebook {
  public:
    Codebook() = default;
    explicit Codebook(const Digest &scene_hash) : scene_hash_(scene_hash), has_hash_(true) {}

    /// Throws CodebookError on a duplicate key without `overwrite`, or when the
    /// entry's scene hash differs from the book's.
    void put(CodebookEntry entry, bool overwrite = false);

    /// Entry whose nearest focus center is closest to `focus`, among entries
    /// whose transmitter lies within `tolerance` of `tx` and whose focus
    /// distance is within `tolerance`. Ties go to the earlier insertion.
    const CodebookEntry *lookup(const Vec3 &tx, const Vec3 &focus, double tolerance) const;
    const CodebookEntry *find(const CodebookKey &key) const;

    const std::vector<CodebookEntry> &entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::optional<Digest> scene_hash() const {
        return has_hash_ ? std::optional<Digest>(scene_hash_) : std::nullopt;
    }
    std::uint16_t version() const { return version_; }

    friend bool operator==(const Codebook &, const Codebook &) = default;

  private:
    Digest scene_hash_{};
    bool has_hash_ = false;
    std::uint16_t version_ = kCodebookVersion;
    std::vector<CodebookEntry> entries_;

    friend Codebook decode_codebook(std::span<const std::uint8_t> bytes);
};

/// Binary container: magic "RISC", u16 version, scene hash (32 bytes),
/// u32 entry count, then per entry a little-endian payload followed by a
/// CRC-32C over the scene hash and the payload.
std::vector<std::uint8_t> encode_codebook(const Codebook &book);
/// Throws CodebookError on bad magic, checksum, version, truncation or trailing bytes.
Codebook decode_codebook(std::span<const std::uint8_t> bytes);

void save_codebook(const Codebook &book, const std::string &path);
Codebook load_codebook(const std::string &path);

/// Human-readable mirror of the binary file.
std::string codebook_json(const Codebook &book, bool include_phases = true);

}  // namespace ris
