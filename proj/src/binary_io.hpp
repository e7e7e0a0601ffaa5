// SPDX-License-Identifier: Apache-2.0
#pragma once

// Little-endian byte encoding shared by the binary file formats.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "ris/errors.hpp"

namespace ris::detail {

class ByteWriter {
  public:
    template <typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
    }
    void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
    void put_f64s(std::span<const double> v) {
        for (double x : v) put(x);
    }

    std::size_t size() const { return bytes_.size(); }
    std::span<const std::uint8_t> view(std::size_t from = 0) const {
        return std::span(bytes_).subspan(from);
    }
    std::vector<std::uint8_t> &bytes() { return bytes_; }

  private:
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked reader; throws `Truncated` past the end.
template <typename Truncated>
class ByteReader {
  public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        require(sizeof(T));
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, raw, sizeof(T));
        return value;
    }
    std::span<const std::uint8_t> get_bytes(std::size_t n) {
        require(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::vector<double> get_f64s(std::size_t n) {
        require(n * sizeof(double));
        std::vector<double> v(n);
        for (auto &x : v) x = get<double>();
        return v;
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::span<const std::uint8_t> span_between(std::size_t from, std::size_t to) const {
        return bytes_.subspan(from, to - from);
    }

  private:
    void require(std::size_t n) const {
        if (n > bytes_.size() - pos_) throw Truncated("file is truncated");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file_bytes(const std::string &path);
void write_file_bytes(const std::string &path, std::span<const std::uint8_t> bytes);

}  // namespace ris::detail
