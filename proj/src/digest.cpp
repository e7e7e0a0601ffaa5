// SPDX-License-Identifier: Apache-2.0
#include "ris/digest.hpp"

#include <openssl/evp.h>

#include <boost/crc.hpp>

#include "ris/errors.hpp"

namespace ris {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw Error("sha256: digest failed");
    }
    return out;
}

std::array<std::uint8_t, 32> sha256(std::string_view text) {
    return sha256(std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

std::uint32_t crc32c(std::span<const std::uint8_t> bytes) {
    boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

}  // namespace ris
