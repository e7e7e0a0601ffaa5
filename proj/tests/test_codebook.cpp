// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include <json.hpp>

#include "ris/codebook.hpp"
#include "ris/random.hpp"

using namespace ris;

namespace {

Digest hash_of(std::uint8_t fill) {
    Digest d{};
    d.fill(fill);
    return d;
}

CodebookEntry entry(const Vec3 &tx, std::vector<Vec3> centers, std::uint64_t seed = 1) {
    CodebookEntry e;
    e.key = canonicalize({tx, std::move(centers), 0.1, 5.8e9});
    e.phases = {0.0, 1.0, 2.5, 6.0};
    e.scene_hash = hash_of(7);
    e.seed = seed;
    e.metrics = {0.5, 0.25, 0.25, 10.0, 2.0, 300.0};
    e.created_at = 1700000000;
    e.stage_summary = {{"GO", 0.1, 0.2, 0.7}, {"Stage 3", 0.5, 0.25, 0.25}};
    return e;
}

Codebook three() {
    Codebook book(hash_of(7));
    book.put(entry({1, 1, 1}, {{0.5, 0.5, 0.5}}, 1));
    book.put(entry({1, 1, 1}, {{0.75, 0.5, 0.5}}, 2));
    book.put(entry({1, 0.5, 1}, {{0.5, 0.5, 0.5}, {1.2, 1.0, 0.4}}, 3));
    return book;
}

std::string message(const std::vector<std::uint8_t> &bytes) {
    try {
        decode_codebook(bytes);
    } catch (const CodebookError &e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("key canonicalization") {
    const auto k = canonicalize({{0.1 + 0.2, 1.0000004, 2.0}, {{0.3, 0.3, 0.3}}, 0.1000000001, 5.8e9});
    CHECK(k.tx_position.x == 0.3);
    CHECK(k.tx_position.y == 1.0);
    CHECK(k.focus_radius == 0.1);
    CHECK(canonicalize(k) == k);
}

TEST_CASE("put") {
    Codebook book;
    CHECK_FALSE(book.scene_hash());
    book.put(entry({1, 1, 1}, {{0.5, 0.5, 0.5}}));
    REQUIRE(book.scene_hash());
    CHECK(*book.scene_hash() == hash_of(7));
    CHECK_THROWS_AS(book.put(entry({1, 1, 1}, {{0.5, 0.5, 0.5}}, 9)), CodebookError);
    book.put(entry({1, 1, 1}, {{0.5, 0.5, 0.5}}, 9), true);
    CHECK(book.size() == 1);
    CHECK(book.entries()[0].seed == 9);

    auto other = entry({1, 1, 1}, {{0.7, 0.5, 0.5}});
    other.scene_hash = hash_of(8);
    CHECK_THROWS_AS(book.put(other), CodebookError);
    CHECK(book.find(canonicalize({{1, 1, 1}, {{0.5, 0.5, 0.5}}, 0.1, 5.8e9})) != nullptr);
    CHECK(book.find(canonicalize({{1, 1, 1}, {{0.5, 0.5, 0.5}}, 0.2, 5.8e9})) == nullptr);
}

TEST_CASE("lookup") {
    const Codebook empty;
    CHECK(empty.lookup({1, 1, 1}, {0.5, 0.5, 0.5}, 1.0) == nullptr);

    const auto book = three();
    const auto *e = book.lookup({1, 1, 1}, {0.5, 0.5, 0.5}, 1e-9);
    REQUIRE(e);
    CHECK(e->seed == 1);
    // midway between two centers: the earlier entry wins
    e = book.lookup({1, 1, 1}, {0.625, 0.5, 0.5}, 0.2);
    REQUIRE(e);
    CHECK(e->seed == 1);
    e = book.lookup({1, 1, 1}, {0.63, 0.5, 0.5}, 0.2);
    REQUIRE(e);
    CHECK(e->seed == 2);
    // transmitter outside the tolerance
    CHECK(book.lookup({1, 1, 1.5}, {0.5, 0.5, 0.5}, 0.1) == nullptr);
    // any of an entry's centers counts
    e = book.lookup({1, 0.5, 1}, {1.2, 1.0, 0.41}, 0.05);
    REQUIRE(e);
    CHECK(e->seed == 3);
    CHECK(book.lookup({1, 1, 1}, {2.0, 2.0, 2.0}, 0.1) == nullptr);
}

TEST_CASE("lookup agrees with a linear scan on 10^4 entries") {
    Rng rng(3);
    Codebook book(hash_of(7));
    const Vec3 tx{1, 1, 1};
    for (std::uint64_t i = 0; i < 10000; ++i)
        book.put(entry(tx, {{rng.uniform() * 1.5, rng.uniform() * 1.5, rng.uniform() * 1.5}}, i));
    for (int q = 0; q < 200; ++q) {
        const Vec3 f{rng.uniform() * 1.5, rng.uniform() * 1.5, rng.uniform() * 1.5};
        const double tol = 0.02 + 0.1 * rng.uniform();
        std::size_t best = book.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < book.size(); ++i) {
            const auto &c = book.entries()[i].key.focus_centers[0];
            const double d = std::sqrt((c.x - f.x) * (c.x - f.x) + (c.y - f.y) * (c.y - f.y) + (c.z - f.z) * (c.z - f.z));
            if (d <= tol && d < best_d) best_d = d, best = i;
        }
        const auto *e = book.lookup(tx, f, tol);
        if (best == book.size()) {
            CHECK(e == nullptr);
        } else {
            REQUIRE(e);
            CHECK(e->seed == best);
        }
    }
}

TEST_CASE("binary round trip") {
    const auto book = three();
    const auto bytes = encode_codebook(book);
    const auto back = decode_codebook(bytes);
    CHECK(back == book);
    CHECK(encode_codebook(back) == bytes);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "RISC");

    const auto path = (std::filesystem::temp_directory_path() / "ris_codebook_test.risc").string();
    save_codebook(book, path);
    CHECK(load_codebook(path) == book);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_codebook(path), IoError);

    const Codebook empty(hash_of(1));
    CHECK(decode_codebook(encode_codebook(empty)) == empty);
}

TEST_CASE("corrupted files") {
    const auto bytes = encode_codebook(three());
    constexpr std::size_t header = 4 + 2 + 32 + 4;

    auto flipped = bytes;
    flipped[header + 30] ^= 0x01;
    CHECK(message(flipped).find("checksum") != std::string::npos);

    auto hash = bytes;
    hash[10] ^= 0x01;  // the book hash is covered by every entry checksum
    CHECK(message(hash).find("checksum") != std::string::npos);

    auto magic = bytes;
    magic[0] = 'X';
    CHECK(message(magic).find("magic") != std::string::npos);

    auto major = bytes;
    major[5] = 0x02;
    CHECK(message(major).find("version") != std::string::npos);

    auto minor = bytes;
    minor[4] = 0x07;
    CHECK_NOTHROW(decode_codebook(minor));

    for (std::size_t cut : {std::size_t{3}, header - 1, header + 10, bytes.size() - 1}) {
        const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        CHECK(message(truncated).find("truncated") != std::string::npos);
    }

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK(message(trailing).find("trailing") != std::string::npos);
}

TEST_CASE("json export") {
    const auto book = three();
    const auto j = nlohmann::json::parse(codebook_json(book));
    CHECK(j["schema_version"] == 1);
    CHECK(j["scene_hash"] == to_hex(hash_of(7)));
    REQUIRE(j["entries"].size() == 3);
    CHECK(j["entries"][0]["phases"].size() == 4);
    CHECK(j["entries"][2]["key"]["focus_centers"].size() == 2);
    CHECK(j["entries"][0]["stages"][1]["name"] == "Stage 3");
    const auto bare = nlohmann::json::parse(codebook_json(book, false));
    CHECK_FALSE(bare["entries"][0].contains("phases"));
    CHECK(bare["entries"][0]["elements"] == 4);
}
